"""Tanaka-Webster connection from its axioms, curvature and covariant derivatives.

Frames are h-orthonormal (h = g + theta^2) with the Reeb field last.  The
connection is encoded by ``Gamma[i, j, k] = h(nabla_{E_i} E_j, E_k)`` and the
bracket by ``c[i, j, k] = h([E_i, E_j], E_k)``.  All quantities are jets at a
point; the derivative budget shrinks by one with every frame derivative.

Conventions: ``omega(X, Y) = g(JX, Y)``, ``R(X, Y)Z = nabla_X nabla_Y Z -
nabla_Y nabla_X Z - nabla_[X,Y] Z``, ``R(X, Y, Z, V) = g(R(X, Y)Z, V)``, and
``nabla^k f`` puts the newest derivative in the first slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg

from .defaults import DEFAULTS
from .jets import JetAlgebra
from .models import FrameData, Model, frame_at


class ConnectionError_(RuntimeError):
    """The axiom system is singular or inconsistent for this frame."""


# -- the axiom system ---------------------------------------------------------


@dataclass(frozen=True)
class AxiomSystem:
    n: int
    matrix: np.ndarray  # (rows, unknowns)
    const: np.ndarray  # (rows,) constant right-hand side
    c_rows: np.ndarray  # rows fed by a bracket component
    c_index: np.ndarray  # flat index into c for each such row
    labels: tuple[str, ...]
    min_singular: float
    rank: int
    # column-pivoted QR of the matrix
    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray

    @property
    def unknowns(self) -> int:
        return self.matrix.shape[1]

    def rhs(self, c: np.ndarray) -> np.ndarray:
        """Right-hand sides for bracket jets ``c`` of shape (N, N, N, M)."""
        m = c.shape[-1]
        out = np.zeros((self.matrix.shape[0], m))
        out[:, 0] = self.const
        flat = c.reshape(-1, m)
        out[self.c_rows] += flat[self.c_index]
        return out

    def solve(self, rhs: np.ndarray) -> tuple[np.ndarray, float]:
        """Least-squares solution through the pivoted QR, and its residual."""
        k = self.unknowns
        y = self.q[:, :k].T @ rhs
        z = scipy.linalg.solve_triangular(self.r[:k, :k], y)
        u = np.empty_like(z)
        u[self.perm] = z
        res = float(np.max(np.abs(self.matrix @ u - rhs))) if rhs.size else 0.0
        return u, res


def _system_rows(n: int, J: np.ndarray):
    N = 2 * n + 1
    h = 2 * n
    z = N - 1
    nG = N ** 3
    nA = h * h

    def g(i, j, k):
        return (i * N + j) * N + k

    def a(i, j):
        return nG + i * h + j

    rows, consts, cidx, labels = [], [], [], []

    def add(coeffs, const=0.0, c=None, label=""):
        row = np.zeros(nG + nA)
        for col, v in coeffs:
            row[col] += v
        rows.append(row)
        consts.append(const)
        cidx.append(-1 if c is None else c)
        labels.append(label)

    # metric: Gamma_ijk + Gamma_ikj = 0
    for i in range(N):
        for j in range(N):
            for k in range(j, N):
                add([(g(i, j, k), 1.0), (g(i, k, j), 1.0)], label="nabla h")
    # Reeb field parallel
    for i in range(N):
        for k in range(N):
            add([(g(i, z, k), 1.0)], label="nabla xi")
    # contact form parallel
    for i in range(N):
        for j in range(h):
            add([(g(i, j, z), 1.0)], label="nabla theta")
    # J parallel on H: sum_l J_lj Gamma_ilk - sum_m Gamma_ijm J_km = 0
    for i in range(N):
        for j in range(h):
            for k in range(h):
                co = [(g(i, l, k), J[l, j]) for l in range(h) if J[l, j]]
                co += [(g(i, j, m), -J[k, m]) for m in range(h) if J[k, m]]
                add(co, label="nabla J")
    # horizontal torsion T(e_a, e_b) = 2 omega(e_a, e_b) xi, omega_ab = J_ba
    for i in range(h):
        for j in range(i + 1, h):
            for k in range(N):
                const = 2.0 * J[j, i] if k == z else 0.0
                add([(g(i, j, k), 1.0), (g(j, i, k), -1.0)], const,
                    c=g(i, j, k), label="torsion H")
    # T(xi, e_a): horizontal, equal to A e_a
    for i in range(h):
        add([(g(z, i, z), 1.0), (g(i, z, z), -1.0)], c=g(z, i, z), label="torsion xi")
        for k in range(h):
            add([(g(z, i, k), 1.0), (g(i, z, k), -1.0), (a(i, k), -1.0)],
                c=g(z, i, k), label="torsion xi")
    # A symmetric and J-anti-invariant
    for i in range(h):
        for j in range(i + 1, h):
            add([(a(i, j), 1.0), (a(j, i), -1.0)], label="A symmetric")
    for i in range(h):
        for j in range(h):
            co = [(a(i, j), 1.0)]
            co += [(a(c, d), J[c, i] * J[d, j]) for c in range(h) for d in range(h)
                   if J[c, i] and J[d, j]]
            add(co, label="A J-anti")
    return (np.array(rows), np.array(consts), np.array(cidx), tuple(labels))


@lru_cache(maxsize=None)
def _axiom_system_cached(n: int, jbytes: bytes) -> AxiomSystem:
    J = np.frombuffer(jbytes).reshape(2 * n, 2 * n)
    M, const, cidx, labels = _system_rows(n, J)
    sv = np.linalg.svd(M, compute_uv=False)
    q, r, perm = scipy.linalg.qr(M, pivoting=True)
    rank = int(np.sum(sv > DEFAULTS.solver_min_singular))
    mask = cidx >= 0
    return AxiomSystem(n, M, const, np.nonzero(mask)[0], cidx[mask], labels,
                       float(sv.min()), rank, q, r, perm)


def axiom_system(model: Model) -> AxiomSystem:
    return _axiom_system_cached(model.n, np.ascontiguousarray(model.J, dtype=float).tobytes())


@dataclass(frozen=True)
class ConnectionCoeffs:
    gamma: np.ndarray  # (N, N, N, M)
    A: np.ndarray  # (N, N, M), zero on Reeb slots
    residual: float
    min_singular: float

    def value(self) -> np.ndarray:
        return self.gamma[..., 0]


def solve_tanaka_webster(model: Model, p=None, frame: FrameData | None = None,
                         c: np.ndarray | None = None) -> ConnectionCoeffs:
    """Solve the connection axioms for Gamma and A, coefficient by coefficient."""
    if frame is None:
        frame = frame_at(model, p)
    if c is None:
        c = frame.structure_functions()
    system = axiom_system(model)
    if system.min_singular < DEFAULTS.solver_min_singular or system.rank < system.unknowns:
        raise ConnectionError_(
            f"axiom matrix is rank deficient (min singular value {system.min_singular:.3g})"
        )
    rhs = system.rhs(c)
    u, _ = system.solve(rhs)
    N = model.N
    h = 2 * model.n
    m = c.shape[-1]
    # On the sphere only the value coefficient is intrinsic: the ambient
    # extension of the frame is not adapted off the sphere.
    check = slice(0, 1) if model.is_sphere else slice(None)
    resid = system.matrix @ u[:, check] - rhs[:, check]
    residual = float(np.max(np.abs(resid)))
    if residual > DEFAULTS.solver_residual:
        worst = np.argsort(-np.abs(resid).max(axis=1))[:5]
        detail = ", ".join(f"{system.labels[w]}={np.abs(resid[w]).max():.3g}" for w in worst)
        raise ConnectionError_(f"axiom system inconsistent (residual {residual:.3g}: {detail})")
    gamma = u[: N ** 3].reshape(N, N, N, m)
    A = np.zeros((N, N, m))
    A[:h, :h] = u[N ** 3:].reshape(h, h, m)
    return ConnectionCoeffs(gamma, A, residual, system.min_singular)


# -- pointwise geometry -----------------------------------------------------------


def _letters(r: int) -> str:
    return "BCDEFGHKLMNOQRSTUVW"[:r]


def _min_order(alg: JetAlgebra, *arrs) -> int:
    return min(alg.order_of(a) for a in arrs)


def jsum(alg: JetAlgebra, *terms) -> np.ndarray:
    """Sum of jets of possibly different orders, truncated to the lowest."""
    k = _min_order(alg, *terms)
    out = alg.truncate(terms[0], k).copy()
    for t in terms[1:]:
        out = out + alg.truncate(t, k)
    return out


@dataclass
class CurvaturePack:
    R: np.ndarray  # (N, N, N, N) values
    Ric: np.ndarray  # (N, N)
    rho: np.ndarray  # (N, N)
    S: float
    A: np.ndarray  # (N, N)
    DA: np.ndarray  # (N, N, N): DA[i, j, k] = (nabla_i A)(j, k)
    torsion: np.ndarray  # (N, N, N)


class PointGeometry:
    """Jets of the Tanaka-Webster geometry at one point of a model."""

    def __init__(self, model: Model, p, order: int | None = None):
        self.model = model
        self.frame = frame_at(model, p, order)
        self.alg = self.frame.alg
        self.point = self.frame.point
        self.n = model.n
        self.N = model.N
        self.h = 2 * model.n
        self.J = model.J
        self.c = self.frame.structure_functions()
        self.connection = solve_tanaka_webster(model, frame=self.frame, c=self.c)
        self.gamma = self.connection.gamma

    # -- derivatives ---------------------------------------------------------

    def E(self, a: np.ndarray) -> np.ndarray:
        """Frame derivatives ``E_i(a)`` stacked on a new leading axis."""
        return self.alg.apply_fields(self.frame.fields, a)

    def covariant(self, T: np.ndarray) -> np.ndarray:
        """``(nabla T)[i, j1..jr] = E_i T[j..] - sum_s Gamma[i, j_s, k] T[..k..]``."""
        alg = self.alg
        r = T.ndim - 1
        ET = self.E(T)
        k = min(alg.order_of(ET), alg.order_of(self.gamma))
        out = alg.truncate(ET, k)
        G = alg.truncate(self.gamma, k)
        Tk = alg.truncate(T, k)
        L = _letters(r)
        for s in range(r):
            tsp = L[:s] + "Y" + L[s + 1:]
            out = out - alg.contract(f"A{L[s]}Y,{tsp}->A{L}", G, Tk)
        return out

    def derivatives(self, fjet: np.ndarray, k: int) -> list[np.ndarray]:
        """``[f, nabla f, ..., nabla^k f]`` as jets."""
        out = [fjet]
        cur = self.E(fjet)
        out.append(cur)
        for _ in range(k - 1):
            cur = self.covariant(cur)
            out.append(cur)
        return out

    def sublaplacian(self, ujet: np.ndarray) -> np.ndarray:
        d2 = self.derivatives(ujet, 2)[2]
        h = self.h
        return -np.einsum("aap->p", d2[:h, :h])

    # -- connection derived tensors -----------------------------------------

    @cached_property
    def torsion(self) -> np.ndarray:
        G = self.gamma
        k = min(self.alg.order_of(G), self.alg.order_of(self.c))
        G = self.alg.truncate(G, k)
        return G - np.swapaxes(G, 0, 1) - self.alg.truncate(self.c, k)

    @property
    def A(self) -> np.ndarray:
        return self.connection.A

    @cached_property
    def R(self) -> np.ndarray:
        alg = self.alg
        G = self.gamma
        EG = self.E(G)  # EG[i, j, k, m] = E_i Gamma_jkm
        k = alg.order_of(EG)
        Gk = alg.truncate(G, k)
        ck = alg.truncate(self.c, k)
        return (
            EG
            - np.swapaxes(EG, 0, 1)
            + alg.contract("JKL,ILM->IJKM", Gk, Gk)
            - alg.contract("IKL,JLM->IJKM", Gk, Gk)
            - alg.contract("IJL,LKM->IJKM", ck, Gk)
        )

    @cached_property
    def Ric(self) -> np.ndarray:
        h = self.h
        return np.einsum("aBCap->BCp", self.R[:h, :, :, :h])

    @cached_property
    def rho(self) -> np.ndarray:
        h = self.h
        # rho(X, Y) = 1/2 R(X, Y, e_a, J e_a), J e_a = J[b, a] e_b
        return 0.5 * np.einsum("XYabp,ba->XYp", self.R[:, :, :h, :h], self.J)

    @cached_property
    def S(self) -> np.ndarray:
        h = self.h
        return np.einsum("aap->p", self.Ric[:h, :h])

    @cached_property
    def DA(self) -> np.ndarray:
        return self.covariant(self.A)

    def curvature(self) -> CurvaturePack:
        v = self.alg.value
        return CurvaturePack(v(self.R), v(self.Ric), v(self.rho), float(v(self.S)),
                             v(self.A), v(self.DA), v(self.torsion))

    # -- Levi-Civita of the Webster metric ----------------------------------

    @cached_property
    def gamma_lc(self) -> np.ndarray:
        """Koszul formula for the h-orthonormal frame: values only."""
        c = self.alg.value(self.c)
        return 0.5 * (c - np.einsum("jki->ijk", c) + np.einsum("kij->ijk", c))

    def riemannian_hessian(self, df_jet: np.ndarray) -> np.ndarray:
        """``D^2 f(E_i, E_j)`` from the jets of ``df(E_j)``."""
        v = self.alg.value
        return v(self.E(df_jet)) - np.einsum("ijk,k->ij", self.gamma_lc, v(df_jet))


def levi_civita_compare(geo: PointGeometry) -> dict[str, float]:
    """Residuals of the two relations between the Levi-Civita connection and nabla."""
    G = geo.alg.value(geo.gamma)
    D = geo.gamma_lc
    T = geo.alg.value(geo.torsion)
    # h(nabla_A B, C) = h(D_A B, C) + 1/2 [T(A,B,C) - T(B,C,A) + T(C,A,B)]
    rhs = D + 0.5 * (T - np.einsum("jki->ijk", T) + np.einsum("kij->ijk", T))
    scale = max(1.0, float(np.max(np.abs(G))))
    out = {"lcbi": float(np.max(np.abs(G - rhs))) / scale}
    # for A = 0: D_B C = nabla_B C + theta(B) JC + theta(C) JB - omega(B, C) xi
    N, h = geo.N, geo.h
    Jx = np.zeros((N, N))
    Jx[:h, :h] = geo.J  # J E_j = Jx[k, j] E_k, J xi = 0
    om = np.zeros((N, N))
    om[:h, :h] = geo.J.T  # omega(e_i, e_j) = J[j, i]
    W = G.copy()
    W[N - 1, :, :] += Jx.T
    W[:, N - 1, :] += Jx.T
    W[:, :, N - 1] -= om
    out["wh"] = float(np.max(np.abs(D - W))) / scale
    return out

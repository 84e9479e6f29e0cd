"""Catalog of exact pseudohermitian model manifolds.

Three families are available:

* ``heisenberg(n)``: the Heisenberg group of dimension 2n+1, realised in
  exponential coordinates with left-invariant frame ``e_1..e_2n, xi`` and
  ``[e_{2k-1}, e_{2k}] = 2 xi``.
* ``sphere(n)``: the Sasakian sphere S^{2n+1} in C^{n+1}, realised in ambient
  coordinates ``(Re z_1, Im z_1, ..., Re z_{n+1}, Im z_{n+1})`` with contact
  form ``theta(V) = <i z, V>`` and Reeb field ``xi = i z``.
* ``group3d(c1, c2)``: three dimensional Lie groups with
  ``[e1, e2] = 2 xi``, ``[xi, e1] = c1 e2``, ``[e2, xi] = c2 e1``.

Frames are ordered horizontal-first, the Reeb field last.  Every frame field
is returned as a jet (truncated Taylor expansion) of its coefficients in the
model's coordinates around the requested point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np
from scipy.special import bernoulli

from .defaults import DEFAULTS
from .jets import JetAlgebra, jet_algebra
from .polynomial import Polynomial
from .quadrature import SphereIntegral, integrate_sphere_polynomial

KINDS = ("heisenberg", "sphere", "group3d")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    n: int = 1
    c1: Fraction = Fraction(0)
    c2: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if int(self.n) != self.n or self.n < 1:
            raise ModelError(f"CR dimension n must be a positive integer, got {self.n}")
        if self.kind == "group3d" and self.n != 1:
            raise ModelError("group3d models have n = 1")
        for name in ("c1", "c2"):
            v = getattr(self, name)
            try:
                object.__setattr__(self, name, Fraction(v))
            except (TypeError, ValueError):
                raise ModelError(f"{name} must be rational, got {v!r}") from None
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def label(self) -> str:
        if self.kind == "group3d":
            return f"group3d({_fmt(self.c1)},{_fmt(self.c2)})"
        return f"{self.kind}({self.n})"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "n": self.n}
        if self.kind == "group3d":
            out["c1"] = _fmt(self.c1)
            out["c2"] = _fmt(self.c2)
        return out


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def heisenberg(n: int = 1) -> ModelSpec:
    return ModelSpec("heisenberg", n)


def sphere(n: int = 1) -> ModelSpec:
    return ModelSpec("sphere", n)


def group3d(c1, c2) -> ModelSpec:
    return ModelSpec("group3d", 1, c1, c2)


@dataclass(frozen=True)
class Model:
    spec: ModelSpec
    jet_order: int
    nvars: int
    J: np.ndarray  # (2n, 2n), J e_j = sum_l J[l, j] e_l
    structure: np.ndarray | None  # (N, N, N) group structure constants
    compact: bool
    has_quadrature: bool
    flags: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def N(self) -> int:
        return 2 * self.spec.n + 1

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def is_sphere(self) -> bool:
        return self.spec.kind == "sphere"

    @property
    def is_group(self) -> bool:
        return self.spec.kind != "sphere"

    def algebra(self, order: int | None = None) -> JetAlgebra:
        return jet_algebra(self.nvars, self.jet_order if order is None else order)


@dataclass(frozen=True)
class FrameData:
    """Frame e_1..e_2n, xi at a point, as jets of coordinate coefficients."""

    model: Model
    point: np.ndarray
    alg: JetAlgebra
    fields: np.ndarray  # (N, nvars, M): coefficient jets of each frame field

    @property
    def J(self) -> np.ndarray:
        return self.model.J

    def values(self) -> np.ndarray:
        """Frame vectors at the point, shape (N, nvars)."""
        return self.fields[..., 0]

    def brackets(self) -> np.ndarray:
        """Jets of ``[E_i, E_j]`` coordinate coefficients, shape (N, N, d, M')."""
        alg = self.alg
        # d_i(E_j^mu) for all i, j, mu
        de = alg.apply_fields(self.fields, self.fields)  # (N_i, N_j, d, M')
        return de - np.swapaxes(de, 0, 1)

    def structure_functions(self) -> np.ndarray:
        """Jets of ``c_ijk = h([E_i, E_j], E_k)``, shape (N, N, N, M')."""
        br = self.brackets()
        alg = self.alg
        k = alg.order_of(br)
        if self.model.is_sphere:
            f = alg.truncate(self.fields, k)
            return alg.contract("ijm,km->ijk", br, f)
        # groups: coordinates are not orthonormal, solve br = sum_k c_k E_k
        return _solve_frame_components(alg, alg.truncate(self.fields, k), br)


def _solve_frame_components(alg: JetAlgebra, fields: np.ndarray, vec: np.ndarray):
    """Solve ``vec[..., mu] = sum_k c[..., k] fields[k, mu]`` for jets ``c``.

    ``fields`` has shape (N, d, M) with d == N (groups), ``vec`` shape
    ``batch + (d, M)``.  Uses the jet inverse of the frame matrix.
    """
    inv = _jet_matrix_inverse(alg, np.swapaxes(fields, 0, 1))  # (d, N) -> inverse (N, d)
    return alg.contract("km,...m->...k", inv, vec)


def _jet_matrix_inverse(alg: JetAlgebra, mat: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix of jets via Neumann series around its value."""
    k = alg.order_of(mat)
    m0 = mat[..., 0]
    inv0 = np.linalg.inv(m0)
    delta = mat.copy()
    delta[..., 0] = 0.0
    # (M0 + D)^-1 = sum_j (-M0^-1 D)^j M0^-1
    step = -alg.contract("ij,jk->ik", alg.constant(inv0, k), delta)
    term = alg.constant(inv0, k)
    out = term.copy()
    for _ in range(k):
        term = alg.contract("ij,jk->ik", step, term)
        out = out + term
    return out


# -- construction ------------------------------------------------------------


def _group_structure(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    n = spec.n
    N = 2 * n + 1
    C = np.zeros((N, N, N))
    J = np.zeros((2 * n, 2 * n))
    xi = N - 1
    for k in range(n):
        a, b = 2 * k, 2 * k + 1
        C[a, b, xi] = 2.0
        C[b, a, xi] = -2.0
        # J e_a = -e_b, J e_b = e_a keeps g = -1/2 dtheta(J., .) positive
        J[b, a] = -1.0
        J[a, b] = 1.0
    if spec.kind == "group3d":
        c1, c2 = float(spec.c1), float(spec.c2)
        C[xi, 0, 1] = c1
        C[0, xi, 1] = -c1
        C[1, xi, 0] = c2
        C[xi, 1, 0] = -c2
    return C, J


def jacobi_residual(C: np.ndarray) -> float:
    """max |[E_i,[E_j,E_k]] + cyclic| for structure constants ``C[i, j, k]``."""
    # [E_i, [E_j, E_k]] = C[j,k,l] C[i,l,m] E_m
    t = np.einsum("jkl,ilm->ijkm", C, C)
    cyc = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(cyc))) if cyc.size else 0.0


def _sphere_J(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    for k in range(n):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def ambient_complex_structure(n: int) -> np.ndarray:
    """Multiplication by i on R^{2n+2}, coordinates (Re z_1, Im z_1, ...)."""
    m = 2 * n + 2
    Ja = np.zeros((m, m))
    for k in range(n + 1):
        Ja[2 * k + 1, 2 * k] = 1.0
        Ja[2 * k, 2 * k + 1] = -1.0
    return Ja


def build_model(spec: ModelSpec, jet_order: int | None = None,
                check_points: int | None = None, seed: int = 0) -> Model:
    """Build a model and check its frame invariants at random points."""
    if not isinstance(spec, ModelSpec):
        raise ModelError("build_model expects a ModelSpec")
    K = DEFAULTS.jet_order if jet_order is None else int(jet_order)
    if K < 2:
        raise ModelError("jet order must be at least 2")
    flags = []
    if spec.kind == "sphere":
        model = Model(spec, K, 2 * spec.n + 2, _sphere_J(spec.n), None,
                      compact=True, has_quadrature=True)
    else:
        C, J = _group_structure(spec)
        jac = jacobi_residual(C)
        if jac > 1e-12:
            raise ModelError(f"structure constants violate the Jacobi identity ({jac:.3g})")
        if spec.kind == "group3d" and (spec.c1 == 0 or spec.c2 == 0):
            flags.append("degenerate bracket")
        model = Model(spec, K, 2 * spec.n + 1, J, C, compact=False,
                      has_quadrature=False, flags=tuple(flags))
    count = DEFAULTS.model_check_points if check_points is None else check_points
    if count:
        for p in sample_points(model, count, seed):
            res = frame_residuals(frame_at(model, p, order=2))
            worst = max(res.values())
            if worst > DEFAULTS.tol_frame:
                raise ModelError(f"frame invariants fail at {p}: {res}")
    return model


# -- frames ------------------------------------------------------------------


def _psi_coefficients(count: int) -> np.ndarray:
    """Taylor coefficients of z / (1 - exp(-z))."""
    B = bernoulli(count)
    return np.array([B[m] * (-1) ** m / factorial(m) for m in range(count + 1)])


_PSI = _psi_coefficients(120)


def _group_frame(model: Model, p: np.ndarray, alg: JetAlgebra) -> np.ndarray:
    """Left-invariant fields in exponential coordinates: psi(ad_X) e_i."""
    C = model.structure
    d = model.nvars
    k = alg.order
    X = np.stack([alg.variable(mu, k, center=p[mu]) for mu in range(d)])
    # (ad_X)_{kj} = sum_i X_i C[i, j, k]
    ad = np.einsum("im,ijk->kjm", X, C)
    rho = max(abs(np.linalg.eigvals(ad[..., 0])), default=0.0)
    if rho > 0.8 * 2 * np.pi:
        raise ModelError("point too far from the identity for the exponential chart")
    term = alg.constant(np.eye(d), k)
    total = _PSI[0] * term
    for m in range(1, len(_PSI)):
        term = alg.contract("ij,jk->ik", ad, term)
        if not np.any(term):
            break
        total = total + _PSI[m] * term
        # odd coefficients vanish, so bound the tail by the decay |B_m/m!| ~ 2/(2 pi)^m
        if np.max(np.abs(term)) * 2.0 / (2 * np.pi) ** m < 1e-18 * max(1.0, np.max(np.abs(total))):
            break
    # column i of psi(ad_X) holds the coefficients of E_i
    return np.swapaxes(total, 0, 1)  # (N_i, d_mu, M)


def _sphere_frame(model: Model, p: np.ndarray, alg: JetAlgebra) -> np.ndarray:
    n = model.n
    m = 2 * n + 2
    k = alg.order
    Ja = ambient_complex_structure(n)
    x = np.stack([alg.variable(mu, k, center=p[mu]) for mu in range(m)])  # (m, M)
    jx = Ja @ x  # linear, exact
    basis: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    remaining = list(range(m))
    pjx = Ja @ p
    for _ in range(n):
        # residual norms at the point decide the pivot
        best, best_norm = None, -1.0
        for s in remaining:
            v = -p[s] * p - pjx[s] * pjx
            v[s] += 1.0
            for b in vals:
                v = v - np.dot(v, b) * b
            nv = np.linalg.norm(v)
            if nv > best_norm + 1e-14:
                best, best_norm = s, nv
        remaining.remove(best)
        s = best
        v = -alg.mul(x[s], x) - alg.mul(jx[s], jx)
        v[s, 0] += 1.0
        for b in basis:
            v = v - alg.mul(alg.contract("m,m->", v, b)[None, :], b)
        norm = alg.sqrt(alg.contract("m,m->", v, v))
        e = alg.mul(v, alg.reciprocal(norm)[None, :])
        je = Ja @ e
        basis.extend([e, je])
        vals.extend([e[:, 0], je[:, 0]])
    basis.append(jx)
    return np.stack(basis)  # (N, m, M)


def check_point(model: Model, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (model.nvars,):
        raise ModelError(f"point must have {model.nvars} coordinates")
    if model.is_sphere and abs(np.dot(p, p) - 1.0) > 1e-10:
        raise ModelError("point is not on the unit sphere")
    return p


def frame_at(model: Model, p, order: int | None = None) -> FrameData:
    p = check_point(model, p)
    alg = model.algebra(order)
    if model.is_sphere:
        fields = _sphere_frame(model, p, alg)
    else:
        fields = _group_frame(model, p, alg)
    return FrameData(model, p, alg, fields)


def frame_residuals(frame: FrameData) -> dict[str, float]:
    """Pointwise residuals of the contact/metric/complex-structure invariants."""
    model = frame.model
    n = model.n
    E = frame.values()
    H = E[: 2 * n]
    xi = E[-1]
    J = model.J
    out = {}
    out["J^2=-1"] = float(np.max(np.abs(J @ J + np.eye(2 * n))))
    if model.is_sphere:
        p = frame.point
        Ja = ambient_complex_structure(n)

        def theta(v):
            return v @ (Ja @ p)

        def dtheta(u, v):
            # dtheta(U, V) = 2 <J_amb U, V>, rows of u and v are vectors
            return 2.0 * (u @ Ja.T) @ v.T

        gram = H @ H.T
        out["g(e_a,e_b)=delta"] = float(np.max(np.abs(gram - np.eye(2 * n))))
        out["tangent"] = float(np.max(np.abs(E @ p)))
        out["theta(e_a)=0"] = float(np.max(np.abs(theta(H))))
        out["theta(xi)=1"] = float(abs(theta(xi) - 1.0))
        out["xi_dtheta=0"] = float(np.max(np.abs(dtheta(xi[None, :], E))))
        # model J agrees with ambient multiplication by i
        out["J=J_amb"] = float(np.max(np.abs((Ja @ H.T).T - J.T @ H)))
        JH = J.T @ H  # rows: J e_a in ambient coordinates
        lhs = 2 * gram
        rhs = -dtheta(JH, H)
        out["2g=-dtheta(J.,.)"] = float(np.max(np.abs(lhs - rhs)))
        out["Je_a.e_a=0"] = float(np.max(np.abs(np.sum(JH * H, axis=1))))
    else:
        alg = frame.alg
        c = frame.structure_functions()  # (N,N,N,M)
        C = model.structure
        out["brackets=structure"] = float(np.max(np.abs(c - alg.constant(C, alg.order_of(c)))))
        dth = -c[:, :, -1, 0]  # dtheta(E_i, E_j) = -theta([E_i, E_j])
        Jm = J
        lhs = 2 * np.eye(2 * n)
        rhs = -(Jm.T @ dth[: 2 * n, : 2 * n])
        out["2g=-dtheta(J.,.)"] = float(np.max(np.abs(lhs - rhs)))
        out["xi_dtheta=0"] = float(np.max(np.abs(dth[-1])))
        out["Je_a.e_a=0"] = float(np.max(np.abs(np.diag(Jm))))
    return out


def sample_points(model: Model, count: int, seed: int) -> list[np.ndarray]:
    if count < 1:
        raise ModelError("count must be >= 1")
    rng = np.random.default_rng(seed)
    if model.is_sphere:
        pts = rng.standard_normal((count, model.nvars))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    else:
        h = DEFAULTS.group_box[model.kind]
        pts = rng.uniform(-h, h, size=(count, model.nvars))
    return [p for p in pts]


def integrate_polynomial(model: Model, f) -> SphereIntegral:
    """Exact round-measure integral of a polynomial field over the sphere."""
    if not model.is_sphere:
        raise ModelError("exact integration is only available on sphere models")
    poly = getattr(f, "poly", f)
    if not isinstance(poly, Polynomial):
        raise ModelError("integrate_polynomial needs a polynomial field")
    if poly.nvars != model.nvars:
        raise ModelError("polynomial lives in the wrong ambient space")
    return integrate_sphere_polynomial(poly)


def vol_theta_ratio(model: Model) -> int:
    """Constant ratio Vol_theta / round measure on the calibrated sphere (n!)."""
    return factorial(model.n)

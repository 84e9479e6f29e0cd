"""Differential operators on scalar fields.

Two independent routes are provided.

*Pointwise* (:class:`LocalCalculus`): iterated Tanaka-Webster covariant
derivatives of the jet of ``f`` at a point, valid on every model.

*Field mode* (sphere only): closed polynomial formulas in ambient
coordinates.  With ``E`` the Euler operator and ``xi F = <i x, dF>``,

    Delta^h F = -lap F + E^2 F + 2n E F          (positive Riemannian Laplacian)
    Delta_b F = Delta^h F + xi^2 F                (positive sub-Laplacian)
    C F       = Delta_b^2 F + 4 n^2 xi^2 F        (Paneitz, torsion free)

:class:`SphereAmbient` evaluates the first and second order horizontal
calculus numerically at many sphere points at once, which is how integrands
of the integral identities are produced.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .calculus import ScalarField, TensorValue
from .connection import PointGeometry, jsum
from .models import Model, ModelError, ambient_complex_structure
from .polynomial import Polynomial

OPERATORS = ("sublaplacian", "riemannian_laplacian", "B", "B0", "P", "C", "hgrad", "hdiv")


# -- pointwise route ----------------------------------------------------------


class LocalCalculus:
    """Covariant derivatives of one scalar jet at one point."""

    def __init__(self, geo: PointGeometry, fjet: np.ndarray, depth: int = 4):
        self.geo = geo
        self.alg = geo.alg
        self.n, self.N, self.h = geo.n, geo.N, geo.h
        self.J = geo.J
        depth = min(depth, self.alg.order_of(fjet))
        self.jets = geo.derivatives(fjet, depth)

    @classmethod
    def at(cls, f: ScalarField, p, geo: PointGeometry | None = None, depth: int = 4):
        if geo is None:
            geo = PointGeometry(f.model, p)
        return cls(geo, f.jet_at(geo.point, geo.alg.order), depth)

    def d(self, k: int) -> np.ndarray:
        """Value of ``nabla^k f`` (full frame slots)."""
        return self.alg.value(self.jets[k])

    # frequently used values
    @cached_property
    def f(self) -> float:
        return float(self.d(0))

    @cached_property
    def grad(self) -> np.ndarray:
        return self.d(1)[: self.h]

    @cached_property
    def xi_f(self) -> float:
        return float(self.d(1)[-1])

    @cached_property
    def lap_jet(self) -> np.ndarray:
        h = self.h
        return -np.einsum("aap->p", self.jets[2][:h, :h])

    @property
    def lap(self) -> float:
        return float(self.lap_jet[0])

    @cached_property
    def hess(self) -> np.ndarray:
        h = self.h
        return self.d(2)[:h, :h]

    @cached_property
    def B_jet(self) -> np.ndarray:
        """(1,1) part of the horizontal Hessian, extended by zero on xi slots."""
        h, N, J = self.h, self.N, self.J
        H = self.jets[2][:h, :h]
        up = np.einsum("ca,db,cdp->abp", J, J, H)
        out = np.zeros((N, N, H.shape[-1]))
        out[:h, :h] = 0.5 * (H + up)
        return out

    @cached_property
    def B0_jet(self) -> np.ndarray:
        h, N, n, J = self.h, self.N, self.n, self.J
        H = self.jets[2][:h, :h]
        tr_om = np.einsum("ab,abp->p", J.T, H)  # g(nabla^2 f, omega)
        B = self.B_jet.copy()
        g = np.zeros((N, N))
        g[:h, :h] = np.eye(h)
        om = np.zeros((N, N))
        om[:h, :h] = J.T
        B += (self.lap_jet / (2 * n))[None, None, :] * g[..., None]
        B -= (tr_om / (2 * n))[None, None, :] * om[..., None]
        return B

    @cached_property
    def P_jet(self) -> np.ndarray:
        """``P(X) = nabla^3 f(X,e_b,e_b) + nabla^3 f(JX,e_b,Je_b) + 4n A(X, J grad f)``."""
        geo, alg = self.geo, self.alg
        h, N, n, J = self.h, self.N, self.n, self.J
        D3 = self.jets[3]
        t1 = np.einsum("Xbbp->Xp", D3[:h, :h, :h])
        # sum_b nabla^3 f(Y, e_b, J e_b) with J e_b = J[c, b] e_c
        tY = np.einsum("Ybcp,cb->Yp", D3[:h, :h, :h], J)
        t2 = np.einsum("cX,cp->Xp", J, tY)  # Y = J e_X = J[c, X] e_c
        grad = self.jets[1][:h]
        Jgrad = np.einsum("ab,bp->ap", J, grad)
        A = geo.A[:h, :h]
        t3 = 4 * n * alg.contract("Xa,a->X", A, Jgrad)
        core = jsum(alg, t1, t2, t3)
        out = np.zeros((N, core.shape[-1]))
        out[:h] = core
        return out

    @property
    def P(self) -> np.ndarray:
        return self.alg.value(self.P_jet)[: self.h]

    @cached_property
    def C(self) -> float:
        """``C f = (nabla_{e_a} P)(e_a)``."""
        DP = self.alg.value(self.geo.covariant(self.P_jet))
        h = self.h
        return float(np.trace(DP[:h, :h]))

    @cached_property
    def C_expanded(self) -> float:
        """Fourth order expansion of ``C f`` through nabla^4 f and the torsion."""
        h, n, J = self.h, self.n, self.J
        D4 = self.d(4)[:h, :h, :h, :h]
        t1 = np.einsum("aabb->", D4)
        # nabla^4 f(e_a, J e_a, e_b, J e_b)
        t2 = np.einsum("acbd,ca,db->", D4, J, J)
        DA = self.alg.value(self.geo.DA)[:h, :h, :h]
        divA = -np.einsum("aaX->X", DA)  # (nabla^* A)(X)
        Jgrad = J @ self.grad
        # g(nabla^2 f, JA), (JA)(X, Y) = g(J A X, Y) = -A(X, JY)
        A = self.alg.value(self.geo.A)[:h, :h]
        JA = -(A @ J)
        return float(t1 + t2 - 4 * n * divA @ Jgrad - 4 * n * np.sum(self.hess * JA))

    @cached_property
    def riemannian_laplacian(self) -> float:
        D2 = self.geo.riemannian_hessian(self.jets[1])
        return float(-np.trace(D2))

    def tensor(self, name: str) -> TensorValue:
        hs = ("horizontal",)
        if name == "B":
            return TensorValue(self.alg.value(self.B_jet)[: self.h, : self.h], hs * 2, self.n)
        if name == "B0":
            return TensorValue(self.alg.value(self.B0_jet)[: self.h, : self.h], hs * 2, self.n)
        if name == "P":
            return TensorValue(self.P, hs, self.n)
        if name == "hgrad":
            return TensorValue(self.grad, hs, self.n)
        if name == "hessian":
            return TensorValue(self.hess, hs * 2, self.n)
        raise KeyError(name)


def apply_batch(geo: PointGeometry, jets: np.ndarray, operator: str) -> np.ndarray:
    """Second order operator applied to a stack of scalar jets ``(B, M)`` at once.

    Uses ``nabla^2 f(E_i, E_j) = E_i E_j f - Gamma_ijk E_k f`` with the
    Tanaka-Webster (sub-Laplacian) or Levi-Civita (Webster Laplacian) symbols.
    """
    alg = geo.alg
    EF = alg.value(geo.E(jets))  # (N, B)
    EEF = alg.value(geo.E(geo.E(jets)))  # (N, N, B)
    if operator == "sublaplacian":
        G = alg.value(geo.gamma)
        idx = range(geo.h)
    elif operator == "riemannian_laplacian":
        G = geo.gamma_lc
        idx = range(geo.N)
    else:
        raise KeyError(operator)
    out = np.zeros(jets.shape[0])
    for i in idx:
        out -= EEF[i, i] - G[i, i] @ EF
    return out


def hdiv_pointwise(geo: PointGeometry, vjet: np.ndarray) -> float:
    """``sum_a g(nabla_{e_a} V, e_a)`` for a horizontal field given by frame jets."""
    h = geo.h
    full = np.zeros((geo.N, vjet.shape[-1]))
    full[:h] = vjet[:h]
    DV = geo.alg.value(geo.covariant(full))
    return float(np.trace(DV[:h, :h]))


# -- field mode (exact polynomials on spheres) -------------------------------------


def _require_sphere(model: Model):
    if not model.is_sphere:
        raise ModelError("field mode is only available on sphere models")


def _ambient_J_rows(n: int) -> list[list[int]]:
    return [[int(v) for v in row] for row in ambient_complex_structure(n)]


def xi_poly(F: Polynomial, n: int) -> Polynomial:
    return F.apply_linear_field(_ambient_J_rows(n))


def riemannian_laplacian_poly(F: Polynomial, n: int) -> Polynomial:
    E = F.euler()
    return -F.laplacian() + E.euler() + E * (2 * n)


def sublaplacian_poly(F: Polynomial, n: int) -> Polynomial:
    return riemannian_laplacian_poly(F, n) + xi_poly(xi_poly(F, n), n)


def paneitz_C_poly(F: Polynomial, n: int) -> Polynomial:
    L = sublaplacian_poly(F, n)
    return sublaplacian_poly(L, n) + xi_poly(xi_poly(F, n), n) * (4 * n * n)


def hgrad_poly(F: Polynomial, n: int) -> list[Polynomial]:
    """Ambient components of the horizontal gradient ``dF - x E F - (ix) xi F``."""
    m = F.nvars
    E = F.euler()
    X = xi_poly(F, n)
    Ja = ambient_complex_structure(n)
    out = []
    for i, dF in enumerate(F.gradient()):
        comp = dF - Polynomial.variable(m, i) * E
        for j in range(m):
            if Ja[i, j]:
                comp = comp - Polynomial.variable(m, j) * X * int(Ja[i, j])
        out.append(comp)
    return out


def hdiv_poly(V: list[Polynomial], n: int) -> Polynomial:
    """Horizontal divergence ``tr(P dV)`` of a horizontal ambient vector field."""
    m = len(V)
    Jrows = _ambient_J_rows(n)
    out = Polynomial(m)
    for i, Vi in enumerate(V):
        out = out + Vi.diff(i)
        out = out - Polynomial.variable(m, i) * Vi.euler()
        jx_i = Polynomial(m)
        for j in range(m):
            if Jrows[i][j]:
                jx_i = jx_i + Polynomial.variable(m, j) * Jrows[i][j]
        out = out - jx_i * Vi.apply_linear_field(Jrows)
    return out


def sublaplacian(f: ScalarField, p=None, geo: PointGeometry | None = None):
    """Pointwise value at ``p``, or the exact polynomial field when ``p`` is None."""
    if p is None and geo is None:
        _require_sphere(f.model)
        return ScalarField.polynomial(f.model, sublaplacian_poly(f.poly, f.model.n))
    return LocalCalculus.at(f, p, geo, depth=2).lap


def riemannian_laplacian(f: ScalarField, p=None, geo: PointGeometry | None = None):
    if p is None and geo is None:
        _require_sphere(f.model)
        return ScalarField.polynomial(f.model, riemannian_laplacian_poly(f.poly, f.model.n))
    return LocalCalculus.at(f, p, geo, depth=2).riemannian_laplacian


def B(f: ScalarField, p, geo: PointGeometry | None = None) -> TensorValue:
    return LocalCalculus.at(f, p, geo, depth=2).tensor("B")


def B0(f: ScalarField, p, geo: PointGeometry | None = None) -> TensorValue:
    return LocalCalculus.at(f, p, geo, depth=2).tensor("B0")


def paneitz_P(f: ScalarField, p, geo: PointGeometry | None = None) -> TensorValue:
    return LocalCalculus.at(f, p, geo, depth=3).tensor("P")


def paneitz_C(f: ScalarField, p=None, geo: PointGeometry | None = None):
    if p is None and geo is None:
        _require_sphere(f.model)
        return ScalarField.polynomial(f.model, paneitz_C_poly(f.poly, f.model.n))
    return LocalCalculus.at(f, p, geo, depth=4).C


def hgrad(f: ScalarField, p=None, geo: PointGeometry | None = None):
    if p is None and geo is None:
        _require_sphere(f.model)
        return hgrad_poly(f.poly, f.model.n)
    return LocalCalculus.at(f, p, geo, depth=1).tensor("hgrad")


def hdiv(model: Model, V: list[Polynomial]) -> ScalarField:
    _require_sphere(model)
    return ScalarField.polynomial(model, hdiv_poly(V, model.n))


# -- ambient numeric calculus on the sphere -----------------------------------------


class MonomialTable:
    """All monomials of degree ``<= degree`` evaluated at a fixed set of points."""

    def __init__(self, points: np.ndarray, degree: int):
        from .jets import jet_algebra

        points = np.asarray(points, dtype=float)
        alg = jet_algebra(points.shape[1], degree)
        self.exponents = alg.exponents
        self.index = alg.index
        self.degree = degree
        self.npts = len(points)
        pw = np.ones((degree + 1,) + points.shape)
        for d in range(1, degree + 1):
            pw[d] = pw[d - 1] * points
        E = np.array(self.exponents, dtype=int)
        self.mon = np.ones((len(E), len(points)))
        for j in range(points.shape[1]):
            self.mon *= pw[E[:, j], :, j]

    def many(self, polys: list[Polynomial]) -> np.ndarray:
        """Values of several polynomials, shape ``(len(polys), npts)``."""
        C = np.zeros((len(polys), len(self.exponents)))
        for r, poly in enumerate(polys):
            for e, c in poly.terms.items():
                if sum(e) > self.degree:
                    raise ValueError("polynomial degree exceeds the monomial table")
                C[r, self.index[e]] = float(c)
        return C @ self.mon

    def __call__(self, poly: Polynomial) -> np.ndarray:
        return self.many([poly])[0]


class SphereAmbient:
    """Horizontal calculus of a polynomial on the torsion-free sphere at many points.

    The horizontal Hessian is ``P (Hess F - (E F) I - (xi F) J_amb^T) P`` with
    ``P`` the orthogonal projection onto the horizontal space.
    """

    def __init__(self, model: Model, F: Polynomial, points: np.ndarray,
                 table: MonomialTable | None = None):
        _require_sphere(model)
        n = model.n
        self.n = n
        self.x = np.asarray(points, dtype=float)
        m = self.x.shape[1]
        Ja = ambient_complex_structure(n)
        self.Ja = Ja
        self.F = F
        self.lapF = sublaplacian_poly(F, n)
        self.xiF = xi_poly(F, n)
        grads = F.gradient()
        hess = [[grads[i].diff(j) for j in range(m)] for i in range(m)]
        polys = [F, self.lapF, self.xiF] + grads + [h for row in hess for h in row]
        polys += self.lapF.gradient() + self.xiF.gradient()
        if table is None:
            table = MonomialTable(self.x, max(p.degree for p in polys))
        V = table.many(polys)
        self.f, self.lap, self.xi = V[0], V[1], V[2]
        self.dF = V[3:3 + m].T
        self.HF = V[3 + m:3 + m + m * m].T.reshape(-1, m, m)
        self.dlap = V[3 + m + m * m:3 + 2 * m + m * m].T
        self.dxi = V[3 + 2 * m + m * m:].T
        jx = self.x @ Ja.T
        self.P = (np.eye(m)[None] - self.x[:, :, None] * self.x[:, None, :]
                  - jx[:, :, None] * jx[:, None, :])
        EF = np.einsum("qi,qi->q", self.x, self.dF)
        M = self.HF - EF[:, None, None] * np.eye(m)[None] - self.xi[:, None, None] * Ja.T[None]
        self.hess = self.P @ M @ self.P
        self.grad = np.einsum("qij,qj->qi", self.P, self.dF)

    @cached_property
    def grad_norm2(self) -> np.ndarray:
        return np.einsum("qi,qi->q", self.grad, self.grad)

    def _ups(self, T):
        return self.Ja.T @ T @ self.Ja  # T(JX, JY)

    @cached_property
    def B(self) -> np.ndarray:
        return 0.5 * (self.hess + self._ups(self.hess))

    @cached_property
    def B_minus(self) -> np.ndarray:
        return 0.5 * (self.hess - self._ups(self.hess))

    @cached_property
    def omega_trace(self) -> np.ndarray:
        """``g(nabla^2 f, omega) = sum_a nabla^2 f(e_a, J e_a)``."""
        return np.einsum("qij,ji->q", self.hess, self.Ja)

    @cached_property
    def B0(self) -> np.ndarray:
        n = self.n
        Om = self.Ja.T @ self.P  # omega(X, Y) = <J X, Y>
        return (self.B + (self.lap / (2 * n))[:, None, None] * self.P
                - (self.omega_trace / (2 * n))[:, None, None] * Om)

    @staticmethod
    def norm2(T) -> np.ndarray:
        return np.einsum("qij,qij->q", T, T)

    @cached_property
    def P_of_grad(self) -> np.ndarray:
        """``P_f(grad f) = -d(Delta f)(grad f) - 2n d(xi f)(J grad f)``."""
        Jg = self.grad @ self.Ja.T
        return (-np.einsum("qi,qi->q", self.dlap, self.grad)
                - 2 * self.n * np.einsum("qi,qi->q", self.dxi, Jg))

    @cached_property
    def vert_hess_Jgrad(self) -> np.ndarray:
        """``nabla^2 f(xi, J grad f) = d(xi f)(J grad f)`` (torsion free)."""
        return np.einsum("qi,qi->q", self.dxi, self.grad @ self.Ja.T)

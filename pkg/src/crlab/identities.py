"""The identity catalog: named pointwise, integral and spectral checks.

Every check returns a relative residual; :mod:`crlab.verify` decides pass or
fail against the tolerance of its class.  Frame conventions: ``e_0..e_{2n-1}``
horizontal, ``xi`` last, ``J e_j = sum_l J[l, j] e_l``, ``omega(X, Y) = g(JX, Y)``
and ``nabla^k f`` lists the newest differentiation slot first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from .connection import PointGeometry, levi_civita_compare
from .models import Model, frame_residuals
from .operators import LocalCalculus


def rel(*pairs) -> float:
    """Largest ``|lhs - rhs|`` over the pairs, relative to ``max(1, |lhs|, |rhs|)``."""
    worst = 0.0
    for lhs, rhs in pairs:
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
    return worst


def zero(*arrs) -> float:
    """Residual of quantities that must vanish (absolute, scaled by 1)."""
    return max(float(np.max(np.abs(np.asarray(a, dtype=float)))) for a in arrs)


@dataclass(frozen=True)
class IdentityCheck:
    """One registered identity.

    ``source`` is ``"random"`` (a random test field), ``"extremal"`` (the
    extremal eigenfunction), ``"geometry"`` (no field), ``"integral"`` or
    ``"spectral"``.  ``guards`` name hypotheses that must hold on the model.
    """

    id: str
    anchor: str
    kind: str
    source: str
    suites: tuple[str, ...]
    fn: Callable = field(compare=False, repr=False)
    guards: tuple[str, ...] = ()
    tol: str = "pointwise"
    note: str = ""


REGISTRY: dict[str, IdentityCheck] = {}


def register(id, anchor, *, kind="pointwise", source="random", suites=("pointwise",),
             guards=(), tol=None, note=""):
    if tol is None:
        tol = {"extremal": "extremal", "integral": "integral",
               "spectral": "spectral"}.get(source, "pointwise")

    def deco(fn):
        if id in REGISTRY:
            raise ValueError(f"duplicate check id {id}")
        REGISTRY[id] = IdentityCheck(id, anchor, kind, source, tuple(suites), fn,
                                     tuple(guards), tol, note)
        return fn

    return deco


COLLAPSE = "verified under A=0 collapse"


# -- pointwise context ----------------------------------------------------------------


class PointContext:
    """Geometry and derivative values at one sample point."""

    def __init__(self, geo: PointGeometry, fjet: np.ndarray | None = None,
                 extremal_jet: np.ndarray | None = None, poly=None):
        self.geo = geo
        self.poly = poly  # the random field as a polynomial, when it is one
        self.model: Model = geo.model
        self.n, self.h, self.N = geo.n, geo.h, geo.N
        self.z = geo.N - 1
        self.J = geo.J
        self.om = geo.J.T
        self.g = np.eye(self.h)
        self.v = geo.alg.value
        self._fjet = fjet
        self._ejet = extremal_jet

    @cached_property
    def rf(self) -> LocalCalculus:
        return LocalCalculus(self.geo, self._fjet, depth=4)

    @cached_property
    def ex(self) -> LocalCalculus:
        return LocalCalculus(self.geo, self._ejet, depth=3)

    # curvature values
    @cached_property
    def A(self):
        return self.v(self.geo.A)[: self.h, : self.h]

    @cached_property
    def R(self):
        return self.v(self.geo.R)

    @cached_property
    def Ric(self):
        return self.v(self.geo.Ric)

    @cached_property
    def rho(self):
        return self.v(self.geo.rho)

    @cached_property
    def S(self) -> float:
        return float(self.v(self.geo.S))

    @cached_property
    def dS(self):
        return self.v(self.geo.E(self.geo.S))

    @cached_property
    def DA(self):
        return self.v(self.geo.DA)

    @cached_property
    def DAh(self):
        h = self.h
        return self.DA[:h, :h, :h]

    @cached_property
    def divA(self):
        """``(nabla^* A)(X) = -(nabla_{e_a} A)(e_a, X)``."""
        return -np.einsum("aaX->X", self.DAh)

    @cached_property
    def k0_matrix(self):
        """Quadratic form ``Ric(X, X) + 4 A(X, JX)`` on H, symmetrised."""
        Q = self.Ric[: self.h, : self.h] + 4 * self.A @ self.J
        return 0.5 * (Q + Q.T)


class FieldView:
    """Frequently used values of a field's covariant derivatives."""

    def __init__(self, c: PointContext, lc: LocalCalculus):
        self.c, self.lc = c, lc
        h, z = c.h, c.z
        self.f = lc.f
        self.g = lc.grad
        self.Jg = c.J @ self.g
        self.xi = lc.xi_f
        self.d2 = lc.d(2)
        self.H = self.d2[:h, :h]
        self.vx = self.d2[z, :h]  # nabla^2 f(xi, X)
        self.xv = self.d2[:h, z]  # nabla^2 f(X, xi)
        self.xi2 = self.d2[z, z]

    @cached_property
    def d3(self):
        return self.lc.d(3)

    @cached_property
    def dfJ(self):
        """``df(J Y)`` as a covector in ``Y``."""
        return self.c.J.T @ self.g

    def xi_jet(self):
        return self.lc.jets[1][self.c.z]


def _fv(c: PointContext, which: str) -> FieldView:
    key = "_fv_" + which
    if key not in c.__dict__:
        c.__dict__[key] = FieldView(c, c.rf if which == "random" else c.ex)
    return c.__dict__[key]


def R_grad(c: PointContext, grad):
    """``R(X, Y, Z, grad)`` for horizontal X, Y, Z."""
    h = c.h
    return np.einsum("xyzv,v->xyz", c.R[:h, :h, :h, :h], grad)


# ===================================================================================
# unconditional pointwise identities (random fields)
# ===================================================================================


@register("frame", "theta(xi)=1, xi_dtheta=0, theta(e_a)=0, g(e_a,e_b)=delta_ab, J^2=-1",
          source="geometry", tol="structure")
def _frame(c):
    return max(frame_residuals(c.geo.frame).values())


@register("torha", "nabla xi = nabla J = nabla theta = nabla g = 0, T(X,Y) = 2 omega(X,Y) xi, "
          "T(xi,X) in H, g(T(xi,X),Y) = g(T(xi,Y),X) = -g(T(xi,JX),JY)", source="geometry")
def _torha(c):
    G = c.v(c.geo.gamma)
    T = c.v(c.geo.torsion)
    h, z, J = c.h, c.z, c.J
    out = [G + np.swapaxes(G, 1, 2)]  # metric
    out.append(G[:, z, :])  # nabla xi = 0
    for i in range(c.N):
        Gi = G[i, :h, :h]
        out.append(J.T @ Gi - Gi @ J.T)  # nabla J = 0
    out.append(T[:h, :h, :h])
    out.append(T[:h, :h, z] - 2 * c.om)
    out.append(T[z, :h, z])
    Tx = T[z, :h, :h]  # A(X, Y) = g(T(xi, X), Y)
    out.append(Tx - Tx.T)
    out.append(Tx + J.T @ Tx @ J)
    out.append(Tx - c.A)
    return zero(*out)


@register("tortrace", "A(e_a,e_a) = A(e_a,Je_a) = 0, A(X,Y) = A(Y,X) = -A(JX,JY)",
          source="geometry")
def _tortrace(c):
    A, J = c.A, c.J
    return zero(np.trace(A), np.sum(A * J), A - A.T, A + J.T @ A @ J)


@register("curv-sym", "R(X,Y,JZ,JV) = R(X,Y,Z,V) = -R(X,Y,V,Z), R(X,Y,Z,xi) = 0",
          source="geometry")
def _curv_sym(c):
    R, h, J = c.R, c.h, c.J
    Rh = R[:, :, :h, :h]
    RJ = np.einsum("xycd,cz,dv->xyzv", Rh, J, J)
    return rel((RJ, Rh), (Rh, -np.swapaxes(Rh, 2, 3)), (R, -np.swapaxes(R, 0, 1)),
               (R[:, :, :, c.z], 0 * R[:, :, :, c.z]), (R[:, :, c.z, :], 0 * R[:, :, c.z, :]))


@register("currrr", "1/2[R(X,Y,Z,V) - R(JX,JY,Z,V)] = -g(X,Z)A(Y,JV) - g(Y,V)A(X,JZ) "
          "+ g(Y,Z)A(X,JV) + g(X,V)A(Y,JZ) - omega(X,Z)A(Y,V) - omega(Y,V)A(X,Z) "
          "+ omega(Y,Z)A(X,V) + omega(X,V)A(Y,Z)", source="geometry")
def _currrr(c):
    h, J, A, g, om = c.h, c.J, c.A, c.g, c.om
    R = c.R[:h, :h, :h, :h]
    RJ = np.einsum("cdzv,cx,dy->xyzv", R, J, J)
    AJ = A @ J
    e = np.einsum
    rhs = (-e("xz,yv->xyzv", g, AJ) - e("yv,xz->xyzv", g, AJ) + e("yz,xv->xyzv", g, AJ)
           + e("xv,yz->xyzv", g, AJ) - e("xz,yv->xyzv", om, A) - e("yv,xz->xyzv", om, A)
           + e("yz,xv->xyzv", om, A) + e("xv,yz->xyzv", om, A))
    return rel((0.5 * (R - RJ), rhs))


@register("currr", "R(xi,X,Y,Z) = (nabla_Y A)(Z,X) - (nabla_Z A)(Y,X)", source="geometry")
def _currr(c):
    h = c.h
    lhs = c.R[c.z, :h, :h, :h]  # [x, y, w]
    D = c.DAh  # D[y, w, x] = (nabla_y A)(w, x)
    rhs = np.einsum("ywx->xyw", D) - np.einsum("wyx->xyw", D)
    return rel((lhs, rhs))


@register("torric", "Ric(X,Y) = Ric(Y,X), Ric(X,Y) - Ric(JX,JY) = 4(n-1)A(X,JY)",
          source="geometry")
def _torric(c):
    h, J, n = c.h, c.J, c.n
    Ric = c.Ric[:h, :h]
    return rel((Ric, Ric.T), (Ric - J.T @ Ric @ J, 4 * (n - 1) * c.A @ J))


@register("rho", "2 rho(X,JY) = -Ric(X,Y) - Ric(JX,JY) = R(e_a,Je_a,X,JY)", source="geometry")
def _rho(c):
    h, J = c.h, c.J
    Ric, rho = c.Ric[:h, :h], c.rho[:h, :h]
    lhs = 2 * rho @ J
    mid = -Ric - J.T @ Ric @ J
    R = c.R[:h, :h, :h, :h]
    right = np.einsum("abxc,ba,cy->xy", R, J, J)
    return rel((lhs, mid), (mid, right))


@register("rid", "Ric(X,Y) = rho(JX,Y) + 2(n-1)A(JX,Y)", source="geometry")
def _rid(c):
    h, J = c.h, c.J
    return rel((c.Ric[:h, :h], J.T @ c.rho[:h, :h] + 2 * (c.n - 1) * J.T @ c.A))


@register("condm", "Ric(X,X) + 4A(X,JX) = rho(JX,X) + 2(n+1)A(JX,X)", source="geometry")
def _condm(c):
    h, J = c.h, c.J

    def sym(M):
        return 0.5 * (M + M.T)

    lhs = sym(c.Ric[:h, :h] + 4 * c.A @ J)
    rhs = sym(J.T @ c.rho[:h, :h] + 2 * (c.n + 1) * J.T @ c.A)
    return rel((lhs, rhs))


@register("div", "2 (nabla_{e_a} Ric)(e_a, X) = dS(X)", source="geometry")
def _div(c):
    h = c.h
    DRic = c.v(c.geo.covariant(c.geo.Ric))
    return rel((2 * np.einsum("aaX->X", DRic[:h, :h, :h]), c.dS[:h]))


@register("lcbi", "h(nabla_A B, C) = h(D_A B, C) + 1/2[h(T(A,B),C) - h(T(B,C),A) + h(T(C,A),B)]",
          source="geometry")
def _lcbi(c):
    return levi_civita_compare(c.geo)["lcbi"]


@register("wh", "D_B C = nabla_B C + theta(B) JC + theta(C) JB - omega(B,C) xi",
          source="geometry", guards=("A=0",))
def _wh(c):
    return levi_civita_compare(c.geo)["wh"]


RICCI = "e:ricci-identities"


@register(f"{RICCI}/1", "nabla^2 f(X,Y) - nabla^2 f(Y,X) = -2 omega(X,Y) df(xi)",
          suites=("pointwise", "ricci"))
def _ricci1(c):
    F = _fv(c, "random")
    return rel((F.H - F.H.T, -2 * c.om * F.xi))


@register(f"{RICCI}/2", "nabla^2 f(X,xi) - nabla^2 f(xi,X) = A(X, grad f)",
          suites=("pointwise", "ricci"))
def _ricci2(c):
    F = _fv(c, "random")
    return rel((F.xv - F.vx, c.A @ F.g))


@register(f"{RICCI}/3", "nabla^3 f(X,Y,Z) - nabla^3 f(Y,X,Z) = -R(X,Y,Z,grad f) "
          "- 2 omega(X,Y) nabla^2 f(xi,Z)", suites=("pointwise", "ricci"))
def _ricci3(c):
    F = _fv(c, "random")
    h = c.h
    D3 = F.d3[:h, :h, :h]
    rhs = -R_grad(c, F.g) - 2 * np.einsum("xy,z->xyz", c.om, F.vx)
    return rel((D3 - np.swapaxes(D3, 0, 1), rhs))


@register(f"{RICCI}/4", "nabla^3 f(X,Y,Z) - nabla^3 f(Z,Y,X) = -R(X,Y,Z,grad f) - R(Y,Z,X,grad f) "
          "- 2 omega(X,Y) nabla^2 f(xi,Z) - 2 omega(Y,Z) nabla^2 f(xi,X) "
          "+ 2 omega(Z,X) nabla^2 f(xi,Y) + 2 omega(Z,X) A(Y, grad f)",
          suites=("pointwise", "ricci"))
def _ricci4(c):
    F = _fv(c, "random")
    h, om = c.h, c.om
    D3 = F.d3[:h, :h, :h]
    Rg = R_grad(c, F.g)
    Ag = c.A @ F.g
    e = np.einsum
    rhs = (-Rg - e("yzx->xyz", Rg) - 2 * e("xy,z->xyz", om, F.vx)
           - 2 * e("yz,x->xyz", om, F.vx) + 2 * e("zx,y->xyz", om, F.vx)
           + 2 * e("zx,y->xyz", om, Ag))
    return rel((D3 - e("zyx->xyz", D3), rhs))


@register(f"{RICCI}/5", "nabla^3 f(xi,X,Y) - nabla^3 f(X,xi,Y) = (nabla_{grad f} A)(Y,X) "
          "- (nabla_Y A)(grad f, X) - nabla^2 f(AX, Y)", suites=("pointwise", "ricci"))
def _ricci5(c):
    F = _fv(c, "random")
    h, z = c.h, c.z
    lhs = F.d3[z, :h, :h] - F.d3[:h, z, :h]  # [x, y]
    D = c.DAh
    rhs = (np.einsum("c,cyx->xy", F.g, D) - np.einsum("ycx,c->xy", D, F.g) - c.A @ F.H)
    return rel((lhs, rhs))


@register(f"{RICCI}/6", "nabla^3 f(X,Y,xi) - nabla^3 f(xi,X,Y) = nabla^2 f(AX,Y) + nabla^2 f(X,AY) "
          "+ (nabla_X A)(Y, grad f) + (nabla_Y A)(X, grad f) - (nabla_{grad f} A)(X,Y)",
          suites=("pointwise", "ricci"))
def _ricci6(c):
    F = _fv(c, "random")
    h, z = c.h, c.z
    lhs = F.d3[:h, :h, z] - F.d3[z, :h, :h]
    D, A = c.DAh, c.A
    DAg = np.einsum("xyc,c->xy", D, F.g)
    rhs = A @ F.H + F.H @ A + DAg + DAg.T - np.einsum("c,cxy->xy", F.g, D)
    return rel((lhs, rhs))


@register("xi1", "g(nabla^2 f, omega) = nabla^2 f(e_a, Je_a) = -2n df(xi)",
          suites=("pointwise", "ricci"))
def _xi1(c):
    F = _fv(c, "random")
    return rel((np.sum(F.H * c.J.T), -2 * c.n * F.xi))


@register("lap", "Delta f = -nabla^2 f(e_a, e_a); field and pointwise routes agree",
          guards=("sphere",))
def _lap(c):
    from .operators import sublaplacian_poly

    F = _fv(c, "random")
    return rel((-np.trace(F.H), sublaplacian_poly(c.poly, c.n)(c.geo.point)))


@register("comp", "Psi = Psi_[1] + Psi_[-1], Upsilon Psi_[+-1] = +-Psi_[+-1], Psi_[1] orthogonal to Psi_[-1]")
def _comp(c):
    from .calculus import TensorValue, decompose_11_m11, upsilon

    F = _fv(c, "random")
    t = TensorValue(F.H, ("horizontal", "horizontal"), c.n)
    p, m = decompose_11_m11(t, c.J)
    P, M = p.components, m.components
    return rel((P + M, F.H), (upsilon(P, c.J), P), (upsilon(M, c.J), -M),
               (np.sum(P * M), 0.0))


@register("bohh", "-1/2 Delta|grad f|^2 = -g(grad Delta f, grad f) + Ric(grad f, grad f) "
          "+ 2A(J grad f, grad f) + |nabla df|^2 + 4 nabla df(xi, J grad f)",
          note="left side sign fixed by the convention Delta = -tr nabla^2")
def _bohh(c):
    F = _fv(c, "random")
    geo, alg, h = c.geo, c.geo.alg, c.h
    d1 = F.lc.jets[1]
    u = sum(alg.mul(d1[a], d1[a]) for a in range(h))
    lhs = -0.5 * float(geo.sublaplacian(u)[0])
    dlap = c.v(geo.E(F.lc.lap_jet))[:h]
    rhs = (-dlap @ F.g + F.g @ c.Ric[:h, :h] @ F.g + 2 * F.Jg @ c.A @ F.g
           + np.sum(F.H ** 2) + 4 * F.vx @ F.Jg)
    return rel((lhs, rhs))


@register("e:vertical-Bochner", "-Delta (xi f)^2 = 2|grad(xi f)|^2 - 2 df(xi) xi(Delta f) "
          "+ 4 df(xi) g(A, nabla^2 f) - 4 df(xi) (nabla^* A)(grad f)")
def _vbochner(c):
    F = _fv(c, "random")
    geo, alg, h, z = c.geo, c.geo.alg, c.h, c.z
    u = F.xi_jet()
    lhs = -float(geo.sublaplacian(alg.mul(u, u))[0])
    gu = c.v(geo.E(u))[:h]
    xlap = float(c.v(geo.E(F.lc.lap_jet))[z])
    rhs = (2 * gu @ gu - 2 * F.xi * xlap + 4 * F.xi * np.sum(c.A * F.H)
           - 4 * F.xi * c.divA @ F.g)
    return rel((lhs, rhs))


@register("boh1", "-1/2 Delta|grad f|^2 = nabla^3 f(e_a,e_a,e_b) df(e_b) + |nabla^2 f|^2")
def _boh1(c):
    F = _fv(c, "random")
    geo, alg, h = c.geo, c.geo.alg, c.h
    d1 = F.lc.jets[1]
    u = sum(alg.mul(d1[a], d1[a]) for a in range(h))
    lhs = -0.5 * float(geo.sublaplacian(u)[0])
    t = np.einsum("aab->b", F.d3[:h, :h, :h]) @ F.g
    return rel((lhs, t + np.sum(F.H ** 2)))


@register("boh3", "nabla^3 f(e_a,e_a,e_b) df(e_b) = -g(grad Delta f, grad f) + Ric(grad f, grad f) "
          "+ 2A(J grad f, grad f) + 4 nabla^2 f(xi, J grad f)")
def _boh3(c):
    F = _fv(c, "random")
    h = c.h
    lhs = np.einsum("aab->b", F.d3[:h, :h, :h]) @ F.g
    dlap = c.v(c.geo.E(F.lc.lap_jet))[:h]
    rhs = (-dlap @ F.g + F.g @ c.Ric[:h, :h] @ F.g + 2 * F.Jg @ c.A @ F.g
           + 4 * F.vx @ F.Jg)
    return rel((lhs, rhs))


@register("par", "(nabla_X T)(Y,Z) = 0", source="geometry")
def _par(c):
    h = c.h
    DT = c.v(c.geo.covariant(c.geo.torsion))
    return zero(DT[:h, :h, :h, :])


@register("e:Ricci-for-P", "nabla^3 f(e_a,e_a,X) = nabla^3 f(X,e_a,e_a) + Ric(X, grad f) "
          "+ 4 nabla^2 f(xi, JX) + 2A(JX, grad f); nabla^3 f(e_a,Je_a,JX) = nabla^3 f(JX,Je_a,e_a) "
          "- 2 rho(JX, grad f) + Ric(JX, J grad f) - 4n nabla^2 f(xi, JX) - 2A(JX, grad f)",
          note="last term of the first line read as 2A(JX, grad f)")
def _ricci_for_P(c):
    F = _fv(c, "random")
    h, n, J = c.h, c.n, c.J
    D3 = F.d3[:h, :h, :h]
    Ric, rho = c.Ric[:h, :h], c.rho[:h, :h]
    vJ = J.T @ F.vx  # nabla^2 f(xi, JX)
    AJg = J.T @ c.A @ F.g  # A(JX, grad f)
    first = (np.einsum("aax->x", D3), np.einsum("xaa->x", D3) + Ric @ F.g + 4 * vJ + 2 * AJg)
    lhs2 = np.einsum("acd,ca,dx->x", D3, J, J)
    t = J.T @ np.einsum("yca,ca->y", D3, J)  # nabla^3 f(JX, J e_a, e_a)
    rhs2 = t - 2 * J.T @ rho @ F.g + J.T @ Ric @ F.Jg - 4 * n * vJ - 2 * AJg
    return rel(first, (lhs2, rhs2))


@register("e:divB", "2 (nabla_{e_a} B)(e_a, X) = nabla^3 f(X,e_a,e_a) - nabla^3 f(JX,e_a,Je_a) "
          "+ 2(n-1)/n nabla^3 f(JX,e_a,Je_a) + 4(n-1) A(X, J grad f)")
def _divB(c):
    F = _fv(c, "random")
    h, n, J = c.h, c.n, c.J
    DB = c.v(c.geo.covariant(F.lc.B_jet))
    lhs = 2 * np.einsum("aaX->X", DB[:h, :h, :h])
    D3 = F.d3[:h, :h, :h]
    s = J.T @ np.einsum("yab,ba->y", D3, J)  # nabla^3 f(JX, e_a, J e_a)
    rhs = np.einsum("xaa->x", D3) - s + 2 * (n - 1) / n * s + 4 * (n - 1) * c.A @ F.Jg
    return rel((lhs, rhs))


@register("e:divtrB", "nabla_{e_a}(1/2n nabla^2 f(e_c,e_c) g - df(xi) omega)(e_a, X) "
          "= 1/2n nabla^3 f(X,e_c,e_c) + nabla^2 f(JX, xi) "
          "= 1/2n nabla^3 f(X,e_a,e_a) - 1/2n nabla^3 f(JX,e_a,Je_a)")
def _divtrB(c):
    F = _fv(c, "random")
    geo, h, n, J, N = c.geo, c.h, c.n, c.J, c.N
    lc = F.lc
    M = np.zeros((N, N, lc.lap_jet.shape[-1]))
    g = np.eye(h)
    u = geo.alg.truncate(F.xi_jet(), geo.alg.order_of(lc.lap_jet))
    M[:h, :h] = ((-lc.lap_jet / (2 * n))[None, None, :] * g[..., None]
                 - c.om[..., None] * u[None, None, :])
    DM = c.v(geo.covariant(M))
    lhs = np.einsum("aaX->X", DM[:h, :h, :h])
    D3 = F.d3[:h, :h, :h]
    mid = np.einsum("xcc->x", D3) / (2 * n) + J.T @ F.xv
    s = J.T @ np.einsum("yab,ba->y", D3, J)
    right = np.einsum("xaa->x", D3) / (2 * n) - s / (2 * n)
    return rel((lhs, mid), (mid, right))


@register("e:currrr1", "R(X,Y,Z,grad f) - R(JX,JY,Z,grad f) = -2g(X,Z)A(Y,J grad f) "
          "- 2g(Y,grad f)A(X,JZ) + 2g(Y,Z)A(X,J grad f) + 2g(X,grad f)A(Y,JZ) "
          "- 2 omega(X,Z)A(Y,grad f) - 2 omega(Y,grad f)A(X,Z) + 2 omega(Y,Z)A(X,grad f) "
          "+ 2 omega(X,grad f)A(Y,Z)")
def _currrr1(c):
    F = _fv(c, "random")
    h, J, A, g = c.h, c.J, c.A, c.g
    R = c.R[:h, :h, :h, :h]
    lhs = R_grad(c, F.g) - np.einsum("cdzv,cx,dy,v->xyz", R, J, J, F.g)
    e = np.einsum
    AJ = A @ J
    omg = c.om @ F.g  # omega(X, grad f)
    rhs = 2 * (-e("xz,y->xyz", g, A @ F.Jg) - e("y,xz->xyz", F.g, AJ)
               + e("yz,x->xyz", g, A @ F.Jg) + e("x,yz->xyz", F.g, AJ)
               - e("xz,y->xyz", c.om, A @ F.g) - e("y,xz->xyz", omg, A)
               + e("yz,x->xyz", c.om, A @ F.g) + e("x,yz->xyz", omg, A))
    return rel((lhs, rhs))


@register("obsa", "-Delta^h f = -Delta f + xi^2 f")
def _obsa(c):
    F = _fv(c, "random")
    lc = F.lc
    return rel((-lc.riemannian_laplacian, -lc.lap + F.xi2))


@register("coshy3", "|(nabla^2 f)_[1]|^2 >= 1/(2n)(Delta f)^2 + 1/(2n) g(nabla^2 f, omega)^2, "
          "equality iff B_0 = 0", kind="inequality")
def _coshy3(c):
    F = _fv(c, "random")
    n, lc = c.n, F.lc
    B = lc.tensor("B").components
    B0 = lc.tensor("B0").components
    tr_om = np.sum(F.H * c.J.T)
    lhs = np.sum(B * B)
    bound = (lc.lap ** 2 + tr_om ** 2) / (2 * n)
    scale = max(1.0, abs(lhs), abs(bound))
    gap = lhs - bound
    violation = max(0.0, -gap) / scale
    # the gap is the squared distance to the span of g and omega
    return max(violation, abs(gap - np.sum(B0 * B0)) / scale)


@register("e:Bdef", "B = (nabla^2 f)_[1] = 1/2[nabla^2 f(X,Y) + nabla^2 f(JX,JY)], "
          "B(JX,JY) = B(X,Y)")
def _bdef(c):
    F = _fv(c, "random")
    B = F.lc.tensor("B").components
    J = c.J
    return rel((B, 0.5 * (F.H + J.T @ F.H @ J)), (J.T @ B @ J, B))


@register("e:B0def", "B_0 = B + (Delta f / 2n) g - (1/2n) g(nabla^2 f, omega) omega, "
          "tr_g B_0 = tr_omega B_0 = 0")
def _b0def(c):
    F = _fv(c, "random")
    B0 = F.lc.tensor("B0").components
    return rel((np.trace(B0), 0.0), (np.sum(B0 * c.J.T), 0.0),
               (c.J.T @ B0 @ c.J, B0))


@register("e:Pdef", "P(X) = nabla^3 f(X,e_b,e_b) + nabla^3 f(JX,e_b,Je_b) + 4n A(X, J grad f) "
          "= -d(Delta f)(X) - 2n d(xi f)(JX) + 4n A(X, J grad f)")
def _pdef(c):
    F = _fv(c, "random")
    geo, h, n, J = c.geo, c.h, c.n, c.J
    dlap = c.v(geo.E(F.lc.lap_jet))[:h]
    dxi = c.v(geo.E(F.xi_jet()))[:h]
    rhs = -dlap - 2 * n * (J.T @ dxi) + 4 * n * c.A @ F.Jg
    return rel((F.lc.P, rhs))


@register("e:Cdef", "Cf = (nabla_{e_a} P)(e_a) = nabla^4 f(e_a,e_a,e_b,e_b) "
          "+ nabla^4 f(e_a,Je_a,e_b,Je_b) - 4n nabla^*A(J grad f) - 4n g(nabla^2 f, JA)")
def _cdef(c):
    lc = _fv(c, "random").lc
    return rel((lc.C, lc.C_expanded))


@register("l:GrLee", "(nabla_{e_a} B_0)(e_a, X) = (n-1)/(2n) P(X)")
def _grlee(c):
    lc = _fv(c, "random").lc
    h, n = c.h, c.n
    DB0 = c.v(c.geo.covariant(lc.B0_jet))
    return rel((np.einsum("aaX->X", DB0[:h, :h, :h]), (n - 1) / (2 * n) * lc.P))


@register("gr3", "nabla^2 f(xi, Z) = 1/(2n) nabla^3 f(Z, Je_a, e_a) - A(Z, grad f)")
def _gr3(c):
    F = _fv(c, "random")
    h, n, J = c.h, c.n, c.J
    t = np.einsum("zca,ca->z", F.d3[:h, :h, :h], J)
    return rel((F.vx, t / (2 * n) - c.A @ F.g))


@register("vert2", "-nabla^* D_2 = g(nabla^2 f, omega) df(xi) - nabla^2 f(xi, J grad f) "
          "- A(J grad f, grad f), D_2(X) = df(JX) df(xi)",
          note="overall sign fixed by the convention nabla^* = -tr nabla")
def _vert2(c):
    F = _fv(c, "random")
    geo, alg, h, J = c.geo, c.geo.alg, c.h, c.J
    d1 = F.lc.jets[1]
    u = F.xi_jet()
    dJ = np.einsum("ca,cp->ap", J, d1[:h])  # df(J e_a)
    D2 = np.zeros((c.N, alg.size(alg.order_of(u))))
    for a in range(h):
        D2[a] = alg.mul(dJ[a], u)
    DD = c.v(geo.covariant(D2))
    lhs = np.trace(DD[:h, :h])  # -nabla^* D_2
    rhs = np.sum(F.H * J.T) * F.xi - F.vx @ F.Jg - F.Jg @ c.A @ F.g
    return rel((lhs, rhs))


# ===================================================================================
# extremal eigenfunction identities (sphere, f in the first eigenspace)
# ===================================================================================

EXT = ("extremal",)


def _E(c) -> FieldView:
    return _fv(c, "extremal")


@register("eq7", "nabla^2 f(X,Y) = -k_0/(2(n+1)) f g(X,Y) - df(xi) omega(X,Y)",
          source="extremal", suites=EXT, guards=("extremal",))
def _eq7(c):
    F = _E(c)
    k0 = float(np.linalg.eigvalsh(c.k0_matrix)[0])
    return rel((F.H, -k0 / (2 * (c.n + 1)) * F.f * c.g - F.xi * c.om))


@register("e:hessian", "nabla^2 f(X,Y) = -f g(X,Y) - df(xi) omega(X,Y)",
          source="extremal", suites=EXT, guards=("extremal",))
def _ehess(c):
    F = _E(c)
    return rel((F.H, -F.f * c.g - F.xi * c.om))


@register("equality-hessian", "(nabla^2 f)_[1] = -1/(2n)(Delta f) g + 1/(2n) g(nabla^2 f, omega) omega",
          source="extremal", suites=EXT, guards=("extremal",),
          note="sign of the Delta f term taken from the traceless part B_0")
def _eqhess(c):
    F = _E(c)
    n = c.n
    B = F.lc.tensor("B").components
    tr_om = np.sum(F.H * c.J.T)
    return rel((B, -F.lc.lap / (2 * n) * c.g + tr_om / (2 * n) * c.om))


@register("eq14", "Ric(grad f, grad f) + 4A(J grad f, grad f) = k_0 |grad f|^2",
          source="extremal", suites=EXT, guards=("extremal",))
def _eq14(c):
    F = _E(c)
    h = c.h
    k0 = 2 * (c.n + 1)
    return rel((F.g @ c.Ric[:h, :h] @ F.g + 4 * F.Jg @ c.A @ F.g, k0 * F.g @ F.g))


@register("eqc1", "R(Z,X,Y,grad f) = df(Z)g(X,Y) - df(X)g(Z,Y) + nabla df(xi,Z) omega(X,Y) "
          "- nabla df(xi,X) omega(Z,Y) - 2 nabla df(xi,Y) omega(Z,X) + A(Z,grad f) omega(X,Y) "
          "- A(X,grad f) omega(Z,Y)", source="extremal", suites=EXT, guards=("extremal",),
          note=COLLAPSE)
def _eqc1(c):
    F = _E(c)
    e, g, om = np.einsum, c.g, c.om
    Ag = c.A @ F.g
    lhs = R_grad(c, F.g)  # [z, x, y]
    rhs = (e("z,xy->zxy", F.g, g) - e("x,zy->zxy", F.g, g) + e("z,xy->zxy", F.vx, om)
           - e("x,zy->zxy", F.vx, om) - 2 * e("y,zx->zxy", F.vx, om)
           + e("z,xy->zxy", Ag, om) - e("x,zy->zxy", Ag, om))
    return rel((lhs, rhs))


@register("eqc02", "Ric(Z, grad f) = (2n-1) df(Z) - A(JZ, grad f) - 3 nabla df(xi, JZ); "
          "Ric(JZ, J grad f) = R(JZ, Je_a, e_a, grad f) = df(Z) - (2n-1) A(JZ, grad f) "
          "- (2n+1) nabla df(xi, JZ)", source="extremal", suites=EXT, guards=("extremal",),
          note=COLLAPSE)
def _eqc02(c):
    F = _E(c)
    h, n, J = c.h, c.n, c.J
    Ric = c.Ric[:h, :h]
    AJZ = J.T @ c.A @ F.g  # A(JZ, grad f)
    vJ = J.T @ F.vx  # nabla df(xi, JZ)
    first = (Ric @ F.g, (2 * n - 1) * F.g - AJZ - 3 * vJ)
    RicJ = J.T @ Ric @ F.Jg  # Ric(JZ, J grad f)
    mid = np.einsum("cdav,cz,da,v->z", c.R[:h, :h, :h, :h], J, J, F.g)
    second = (RicJ, F.g - (2 * n - 1) * AJZ - (2 * n + 1) * vJ)
    return rel(first, second, (RicJ, mid))


@register("eqc01", "nabla df(xi, JZ) = -df(Z) + A(JZ, grad f)", source="extremal", suites=EXT,
          guards=("extremal", "n>=2"), note=COLLAPSE)
def _eqc01(c):
    F = _E(c)
    J = c.J
    return rel((J.T @ F.vx, -F.g + J.T @ c.A @ F.g))


@register("e:eqc1", "R(X,Y,Z,grad f) = df(X)g(Y,Z) - df(Y)g(X,Z) + df(JX)omega(Y,Z) "
          "- df(JY)omega(X,Z) - 2df(JZ)omega(X,Y) - 2 omega(X,Y)A(Z,grad f) "
          "+ 2A(X,grad f)omega(Y,Z) - 2A(Y,grad f)omega(X,Z)", source="extremal", suites=EXT,
          guards=("extremal",), note=COLLAPSE)
def _e_eqc1(c):
    F = _E(c)
    e, g, om = np.einsum, c.g, c.om
    Ag = c.A @ F.g
    rhs = (e("x,yz->xyz", F.g, g) - e("y,xz->xyz", F.g, g) + e("x,yz->xyz", F.dfJ, om)
           - e("y,xz->xyz", F.dfJ, om) - 2 * e("z,xy->xyz", F.dfJ, om)
           - 2 * e("xy,z->xyz", om, Ag) + 2 * e("x,yz->xyz", Ag, om)
           - 2 * e("y,xz->xyz", Ag, om))
    return rel((R_grad(c, F.g), rhs))


@register("e:currrr", "R(X,Y,Z,grad f) - R(JX,JY,Z,grad f) = 2 omega(Y,Z)A(X,grad f) "
          "- 2 omega(X,Z)A(Y,grad f) + 2g(Y,Z)A(JX,grad f) - 2g(X,Z)A(JY,grad f)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _e_currrr(c):
    F = _E(c)
    h, J, g, om = c.h, c.J, c.g, c.om
    R = c.R[:h, :h, :h, :h]
    lhs = R_grad(c, F.g) - np.einsum("cdzv,cx,dy,v->xyz", R, J, J, F.g)
    Ag = c.A @ F.g
    AJg = J.T @ Ag  # A(JX, grad f)
    e = np.einsum
    rhs = 2 * (e("yz,x->xyz", om, Ag) - e("xz,y->xyz", om, Ag) + e("yz,x->xyz", g, AJg)
               - e("xz,y->xyz", g, AJg))
    return rel((lhs, rhs))


@register("e:R1-part-1", "0 = -2df(Y)A(X,JZ) + 2df(X)A(Y,JZ) - 2df(JY)A(X,Z) + 2df(JX)A(Y,Z)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _r1part(c):
    F = _E(c)
    e = np.einsum
    AJ = c.A @ c.J
    return zero(-2 * e("y,xz->xyz", F.g, AJ) + 2 * e("x,yz->xyz", F.g, AJ)
                - 2 * e("y,xz->xyz", F.dfJ, c.A) + 2 * e("x,yz->xyz", F.dfJ, c.A))


@register("e:vhessian", "nabla^2 f(xi, Y) = df(JY) + A(Y, grad f), "
          "nabla^2 f(Y, xi) = df(JY) + 2A(Y, grad f)", source="extremal", suites=EXT,
          guards=("extremal",), note=COLLAPSE)
def _vhess(c):
    F = _E(c)
    Ag = c.A @ F.g
    return rel((F.vx, F.dfJ + Ag), (F.xv, F.dfJ + 2 * Ag))


@register("e:vhessianc", "nabla^2 f(xi, Y) = nabla^2 f(Y, xi) = df(JY), xi^2 f = -f",
          source="extremal", suites=EXT, guards=("extremal", "A=0"))
def _vhessc(c):
    F = _E(c)
    return rel((F.vx, F.dfJ), (F.xv, F.dfJ), (F.xi2, -F.f))


@register("e:norms-dfA-vs-Adf", "|grad f|^2 |A|^2 = 2 |A grad f|^2", source="extremal",
          suites=EXT, guards=("extremal",), note=COLLAPSE)
def _norms(c):
    F = _E(c)
    Ag = c.A @ F.g
    return rel((F.g @ F.g * np.sum(c.A ** 2), 2 * Ag @ Ag))


def _DAg(c, F):
    return np.einsum("xyc,c->xy", c.DAh, F.g)  # (nabla_X A)(Y, grad f)


@register("e:D3f-extremal-bis", "nabla^3 f(X,Y,xi) = -df(xi) g - (xi^2 f) omega - 2f A "
          "+ (nabla_X A)(Y, grad f) + (nabla_Y A)(X, grad f) - (nabla_{grad f} A)(X,Y)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _d3bis(c):
    F = _E(c)
    h, z = c.h, c.z
    DAg = _DAg(c, F)
    rhs = (-F.xi * c.g - F.xi2 * c.om - 2 * F.f * c.A + DAg + DAg.T
           - np.einsum("c,cxy->xy", F.g, c.DAh))
    return rel((F.d3[:h, :h, z], rhs))


@register("e:D3f-extremal", "nabla^3 f(X,Y,xi) = -df(xi) g + f omega - 2f A - 2 df(xi) A(JX,Y) "
          "+ 2 (nabla_X A)(Y, grad f)", source="extremal", suites=EXT, guards=("extremal",),
          note=COLLAPSE)
def _d3(c):
    F = _E(c)
    h, z, J = c.h, c.z, c.J
    rhs = (-F.xi * c.g + F.f * c.om - 2 * F.f * c.A - 2 * F.xi * J.T @ c.A
           + 2 * _DAg(c, F))
    return rel((F.d3[:h, :h, z], rhs))


@register("e:xi2f", "nabla^2 f(xi,xi) = xi^2 f = -f - 1/n (nabla_{e_a} A)(e_a, J grad f)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _xi2f(c):
    F = _E(c)
    t = np.einsum("aac,c->", c.DAh, F.Jg)
    return rel((F.xi2, -F.f - t / c.n))


@register("ntor1", "xi^2 f = -f, (nabla_X A)(Y, grad f) = f A(X,Y) + df(xi) A(X,JY)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _ntor1(c):
    F = _E(c)
    return rel((F.xi2, -F.f), (_DAg(c, F), F.f * c.A + F.xi * c.A @ c.J))


@register("ntor2", "(nabla_X A)(Y, grad f) = f A(X,Y) + df(xi) A(X,JY) "
          "- 1/2[nabla^2 f(xi,xi) + f] omega(X,Y)", source="extremal", suites=EXT,
          guards=("extremal",), note=COLLAPSE)
def _ntor2(c):
    F = _E(c)
    rhs = F.f * c.A + F.xi * c.A @ c.J - 0.5 * (F.xi2 + F.f) * c.om
    return rel((_DAg(c, F), rhs))


@register("ntor3", "(nabla_X A)(JY, grad f) = (nabla_X A)(Y, J grad f) = f A(X,JY) "
          "- df(xi) A(X,Y) - 1/2[nabla^2 f(xi,xi) + f] g(X,Y)", source="extremal",
          suites=EXT, guards=("extremal",), note=COLLAPSE)
def _ntor3(c):
    F = _E(c)
    J = c.J
    D = c.DAh
    a = np.einsum("xcd,cy,d->xy", D, J, F.g)  # (nabla_X A)(J e_y, grad f)
    b = np.einsum("xyd,d->xy", D, F.Jg)
    rhs = F.f * c.A @ J - F.xi * c.A - 0.5 * (F.xi2 + F.f) * c.g
    return rel((a, b), (b, rhs))


@register("ntor4", "(nabla_X A)(Y, grad(xi f)) = (xi f) A(X,Y) + (xi^2 f) A(X,JY)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _ntor4(c):
    F = _E(c)
    gu = c.v(c.geo.E(F.xi_jet()))[: c.h]
    lhs = np.einsum("xyc,c->xy", c.DAh, gu)
    return rel((lhs, F.xi * c.A + F.xi2 * c.A @ c.J))


@register("ntor7", "2(nabla_X A)(Y, A grad f) = (nabla_X A)(JY, grad f) + df(xi) A(X,Y) "
          "- f A(X,JY) = 0", source="extremal", suites=EXT, guards=("extremal",),
          note=COLLAPSE)
def _ntor7(c):
    F = _E(c)
    J, D = c.J, c.DAh
    Ag = c.A @ F.g
    lhs = 2 * np.einsum("xyc,c->xy", D, Ag)
    mid = np.einsum("xcd,cy,d->xy", D, J, F.g) + F.xi * c.A - F.f * c.A @ J
    return rel((lhs, mid), (mid, 0 * mid))


@register("ntor8", "0 = (nabla_X A)(grad f, A grad f) = f A(X, A grad f) + df(xi) A(JX, A grad f)",
          source="extremal", suites=EXT, guards=("extremal",), note=COLLAPSE)
def _ntor8(c):
    F = _E(c)
    Ag = c.A @ F.g
    lhs = np.einsum("xcd,c,d->x", c.DAh, F.g, Ag)
    rhs = F.f * c.A @ Ag + F.xi * c.J.T @ c.A @ Ag
    return rel((lhs, rhs), (lhs, 0 * lhs))


@register("ntor9", "0 = f A(JX, A grad f) - df(xi) A(X, A grad f)", source="extremal",
          suites=EXT, guards=("extremal",), note=COLLAPSE)
def _ntor9(c):
    F = _E(c)
    Ag = c.A @ F.g
    return zero(F.f * c.J.T @ c.A @ Ag - F.xi * c.A @ Ag)


@register("ntor10", "A(X, A grad f) = 0", source="extremal", suites=EXT, guards=("extremal",),
          note=COLLAPSE)
def _ntor10(c):
    F = _E(c)
    return zero(c.A @ c.A @ F.g)


@register("tordf", "A grad f = 0", source="extremal", suites=EXT, guards=("extremal",),
          note=COLLAPSE)
def _tordf(c):
    F = _E(c)
    return zero(c.A @ F.g)


@register("xii1", "Delta(xi f) = 2n (xi f)", source="extremal", suites=EXT, guards=("extremal",))
def _xii1(c):
    F = _E(c)
    return rel((float(c.geo.sublaplacian(F.xi_jet())[0]), 2 * c.n * F.xi))


@register("xii4", "nabla^2(xi f)(X,Y) = nabla^3 f(X,Y,xi) = -df(xi) g(X,Y) - (xi^2 f) omega(X,Y)",
          source="extremal", suites=EXT, guards=("extremal",))
def _xii4(c):
    F = _E(c)
    h, z = c.h, c.z
    Hu = c.v(c.geo.derivatives(F.xi_jet(), 2)[2])[:h, :h]
    rhs = -F.xi * c.g - F.xi2 * c.om
    return rel((Hu, F.d3[:h, :h, z]), (Hu, rhs))


@register("e:riem-eigen-fn", "Delta^h f = (2n+1) f", source="extremal", suites=EXT,
          guards=("extremal",))
def _riem_eig(c):
    F = _E(c)
    return rel((F.lc.riemannian_laplacian, (2 * c.n + 1) * F.f))


@register("clasob", "D^2 f = -f h", source="extremal", suites=EXT, guards=("extremal",))
def _clasob(c):
    F = _E(c)
    D2 = c.geo.riemannian_hessian(F.lc.jets[1])
    return rel((D2, -F.f * np.eye(c.N)))


# -- three dimensional extremal identities ------------------------------------------

EXT3 = ("extremal", "3d")
G3 = ("extremal", "n=1")


def _gu(c, F):
    return c.v(c.geo.E(F.xi_jet()))[: c.h]


@register("n11", "Ric(grad f, grad f) = S/2 |grad f|^2 = 4|grad f|^2 - 4A(J grad f, grad f)",
          source="extremal", suites=EXT3, guards=G3, note=COLLAPSE)
def _n11(c):
    F = _E(c)
    ric = F.g @ c.Ric[:2, :2] @ F.g
    gg = F.g @ F.g
    return rel((ric, c.S / 2 * gg), (ric, 4 * gg - 4 * F.Jg @ c.A @ F.g))


@register("n12", "nabla^2 f(xi, J grad f) = -|grad f|^2 + A(J grad f, grad f) "
          "= -1/4 Ric(grad f, grad f) = -S/8 |grad f|^2", source="extremal", suites=EXT3,
          guards=G3, note=COLLAPSE)
def _n12(c):
    F = _E(c)
    gg = F.g @ F.g
    lhs = F.vx @ F.Jg
    return rel((lhs, -gg + F.Jg @ c.A @ F.g), (lhs, -0.25 * F.g @ c.Ric[:2, :2] @ F.g),
               (lhs, -c.S / 8 * gg))


@register("n13", "nabla^2 f(xi, grad f) = -1/3 A(grad f, grad f), "
          "nabla^2 f(grad f, xi) = 2/3 A(grad f, grad f)", source="extremal", suites=EXT3,
          guards=G3, note=COLLAPSE)
def _n13(c):
    F = _E(c)
    Agg = F.g @ c.A @ F.g
    return rel((F.vx @ F.g, -Agg / 3), (F.xv @ F.g, 2 * Agg / 3))


@register("e:xi2f-3D", "6 xi^2 f = -(S-2) f + 1/2 g(grad f, grad S)", source="extremal",
          suites=EXT3, guards=G3)
def _xi2f3(c):
    F = _E(c)
    return rel((6 * F.xi2, -(c.S - 2) * F.f + 0.5 * c.dS[:2] @ F.g))


@register("e:riem-eqn-in-3D", "Delta^h f = (2 + (S-2)/6) f - 1/12 g(grad f, grad S)",
          source="extremal", suites=EXT3, guards=G3)
def _riem3(c):
    F = _E(c)
    rhs = (2 + (c.S - 2) / 6) * F.f - c.dS[:2] @ F.g / 12
    return rel((F.lc.riemannian_laplacian, rhs))


@register("n=11xi", "Ric(grad(xi f), grad(xi f)) = 4|grad(xi f)|^2 - 4A(grad(xi f), J grad(xi f))",
          source="extremal", suites=EXT3, guards=G3, note=COLLAPSE)
def _n11xi(c):
    F = _E(c)
    gu = _gu(c, F)
    return rel((gu @ c.Ric[:2, :2] @ gu, 4 * gu @ gu - 4 * gu @ c.A @ (c.J @ gu)))


@register("xi2", "|grad f|^4 |grad(xi f)|^2 = [nabla^2 f(grad f, xi)^2 "
          "+ nabla^2 f(J grad f, xi)^2] |grad f|^2", source="extremal", suites=EXT3,
          guards=G3)
def _xi2(c):
    F = _E(c)
    gu = _gu(c, F)
    gg = F.g @ F.g
    a, b = F.xv @ F.g, F.xv @ F.Jg
    return rel((gg ** 2 * gu @ gu, (a * a + b * b) * gg))


@register("xi3", "|grad f|^4 Ric(grad(xi f), grad(xi f)) = [nabla^2 f(grad f, xi)^2 "
          "+ nabla^2 f(J grad f, xi)^2] Ric(grad f, grad f)", source="extremal", suites=EXT3,
          guards=G3)
def _xi3(c):
    F = _E(c)
    gu = _gu(c, F)
    Ric = c.Ric[:2, :2]
    gg = F.g @ F.g
    a, b = F.xv @ F.g, F.xv @ F.Jg
    return rel((gg ** 2 * gu @ Ric @ gu, (a * a + b * b) * F.g @ Ric @ F.g))


@register("xi4", "|grad f|^4 A(grad(xi f), J grad(xi f)) = [nabla^2 f(grad f, xi)^2 "
          "- nabla^2 f(J grad f, xi)^2] A(grad f, J grad f) - 2 nabla^2 f(grad f, xi) "
          "nabla^2 f(J grad f, xi) A(grad f, grad f)", source="extremal", suites=EXT3,
          guards=G3, note=COLLAPSE)
def _xi4(c):
    F = _E(c)
    gu = _gu(c, F)
    A = c.A
    gg = F.g @ F.g
    a, b = F.xv @ F.g, F.xv @ F.Jg
    rhs = (a * a - b * b) * F.g @ A @ F.Jg - 2 * a * b * F.g @ A @ F.g
    return rel((gg ** 2 * gu @ A @ (c.J @ gu), rhs))


@register("xi5", "|grad f|^4 {nabla^2 f(J grad f, xi)^2 A(grad f, J grad f) "
          "+ nabla^2 f(grad f, xi) nabla^2 f(J grad f, xi) A(grad f, grad f)} = 0",
          source="extremal", suites=EXT3, guards=G3, note=COLLAPSE)
def _xi5(c):
    F = _E(c)
    gg = F.g @ F.g
    a, b = F.xv @ F.g, F.xv @ F.Jg
    return zero(gg ** 2 * (b * b * F.g @ c.A @ F.Jg + a * b * F.g @ c.A @ F.g))


@register("n=11x", "A(J grad f, grad f) = (1 - S/8) |grad f|^2 <= 0", source="extremal",
          suites=EXT3, guards=G3, note=COLLAPSE)
def _n11x(c):
    F = _E(c)
    gg = F.g @ F.g
    lhs = F.Jg @ c.A @ F.g
    return max(rel((lhs, (1 - c.S / 8) * gg)), max(0.0, lhs) / max(1.0, gg))


@register("n=12x", "nabla^2 f(J grad f, xi) = nabla^2 f(xi, J grad f) + A(J grad f, grad f) "
          "= A(J grad f, grad f) - S/8 |grad f|^2 <= 0", source="extremal", suites=EXT3,
          guards=G3, note=COLLAPSE)
def _n12x(c):
    F = _E(c)
    gg = F.g @ F.g
    lhs = F.xv @ F.Jg
    AJ = F.Jg @ c.A @ F.g
    return max(rel((lhs, F.vx @ F.Jg + AJ), (lhs, AJ - c.S / 8 * gg)),
               max(0.0, lhs) / max(1.0, gg))


@register("xi6", "nabla^2 f(J grad f, xi) A(grad f, J grad f) + 2/3 A(grad f, grad f)^2 = 0",
          source="extremal", suites=EXT3, guards=G3, note=COLLAPSE)
def _xi6(c):
    F = _E(c)
    return zero((F.xv @ F.Jg) * (F.g @ c.A @ F.Jg) + 2 / 3 * (F.g @ c.A @ F.g) ** 2)


@register("hes3", "nabla^2 f(xi, Z) = nabla^2 f(Z, xi) = (S-2)/6 df(JZ)", source="extremal",
          suites=EXT3, guards=G3 + ("A=0",))
def _hes3(c):
    F = _E(c)
    rhs = (c.S - 2) / 6 * F.dfJ
    return rel((F.vx, rhs), (F.xv, rhs))


@register("hes31", "nabla^3 f(Y,Z,xi) = 1/6[dS(Y) df(JZ) + (S-2) f omega(Y,Z) "
          "- (S-2) df(xi) g(Y,Z)]", source="extremal", suites=EXT3, guards=G3 + ("A=0",))
def _hes31(c):
    F = _E(c)
    S = c.S
    rhs = (np.outer(c.dS[:2], F.dfJ) + (S - 2) * F.f * c.om - (S - 2) * F.xi * c.g) / 6
    return rel((F.d3[:2, :2, 2], rhs))


@register("hes32", "nabla^3 f(Y,Z,xi) = -df(xi) g(Y,Z) - (xi^2 f) omega(Y,Z)", source="extremal",
          suites=EXT3, guards=G3 + ("A=0",))
def _hes32(c):
    F = _E(c)
    return rel((F.d3[:2, :2, 2], -F.xi * c.g - F.xi2 * c.om))


@register("hes33", "(S-8)/6 df(xi) g(Y,Z) - (xi^2 f + (S-2) f/6) omega(Y,Z) "
          "- 1/6 dS(Y) df(JZ) = 0", source="extremal", suites=EXT3, guards=G3 + ("A=0",),
          note="f factor in the omega coefficient restored")
def _hes33(c):
    F = _E(c)
    S = c.S
    t = ((S - 8) / 6 * F.xi * c.g - (F.xi2 + (S - 2) * F.f / 6) * c.om
         - np.outer(c.dS[:2], F.dfJ) / 6)
    return zero(t)


@register("hes34", "(xi^2 f + (S-2) f/6) omega(Y,Z) = 0", source="extremal", suites=EXT3,
          guards=G3 + ("A=0",), note="f factor in the omega coefficient restored")
def _hes34(c):
    F = _E(c)
    return zero((F.xi2 + (c.S - 2) * F.f / 6) * c.om)


# ===================================================================================
# integral identities (sphere, cubature exact to the integrand degree)
# ===================================================================================


class IntegralContext:
    """Random polynomial fields and low eigenfunctions evaluated on a cubature rule.

    Every integrand below is a polynomial of degree at most ``2d + 8`` in the
    ambient coordinates, so the product rule integrates it exactly up to rounding.
    """

    def __init__(self, model: Model, seed: int, count: int, degree: int):
        from .operators import MonomialTable, SphereAmbient
        from .polynomial import Polynomial
        from .quadrature import sphere_cubature

        self.model = model
        self.n = model.n
        self.degree = degree
        self.cub = sphere_cubature(model.n, 2 * max(degree, 2) + 8)
        table = MonomialTable(self.cub.points, max(degree, 2))
        m = model.nvars
        self.polys = [Polynomial.random(m, degree, np.random.default_rng([seed, 10 ** 6 + k]))
                      for k in range(count)]
        self.fields = [SphereAmbient(model, F, self.cub.points, table) for F in self.polys]
        x = [Polynomial.variable(m, i) for i in range(2)]
        one = Polynomial.constant(m, 1)
        n = model.n
        # (lambda, f): x_1, Re z_1^2 and |z_1|^2 - 1/(n+1)
        self.eigen = [
            (2 * n, x[0]),
            (4 * n, x[0] * x[0] - x[1] * x[1]),
            (4 * (n + 1), x[0] * x[0] + x[1] * x[1] - one * Fraction(1, n + 1)),
        ]
        self.eigen_fields = [(lam, SphereAmbient(model, F, self.cub.points, table))
                             for lam, F in self.eigen]

    @cached_property
    def ric(self) -> float:
        """Webster Ricci constant ``Ric = r g`` measured from the connection."""
        from .models import sample_points

        geo = PointGeometry(self.model, sample_points(self.model, 1, 0)[0], order=3)
        Ric = geo.alg.value(geo.Ric)[: geo.h, : geo.h]
        r = float(Ric[0, 0])
        if np.max(np.abs(Ric - r * np.eye(geo.h))) > 1e-10:
            raise ValueError("Webster Ricci tensor is not a constant multiple of g")
        return r

    def I(self, values) -> float:
        return self.cub.integrate(values)


INT = ("integral",)
SPH = ("sphere",)


def _int_register(id, anchor, **kw):
    kw.setdefault("suites", INT)
    kw.setdefault("guards", SPH)
    return register(id, anchor, kind=kw.pop("kind", "integral"), source="integral", **kw)


def _each(ic: IntegralContext, fn) -> float:
    return max(fn(S) for S in ic.fields)


@_int_register("div1", "int nabla^* sigma Vol = 0 for horizontal sigma", note="exact rational integral")
def _div1(ic):
    from .operators import hdiv_poly, hgrad_poly
    from .quadrature import integrate_sphere_polynomial

    worst = 0.0
    for k, F in enumerate(ic.polys[:3]):
        G = ic.polys[(k + 1) % len(ic.polys)]
        V = [comp * G for comp in hgrad_poly(F, ic.n)]
        val = integrate_sphere_polynomial(hdiv_poly(V, ic.n))
        worst = max(worst, abs(float(val)))
    return worst


@_int_register("vert1", "4n^2 int (xi f)^2 = -2n int g(nabla^2 f, omega) df(xi)")
def _vert1(ic):
    n = ic.n
    return _each(ic, lambda S: rel((4 * n * n * ic.I(S.xi ** 2),
                                    -2 * n * ic.I(S.omega_trace * S.xi))))


@_int_register("gr2", "int nabla^2 f(xi, J grad f) = -int [1/(2n) g(nabla^2 f, omega)^2 "
               "+ A(J grad f, grad f)]", note=COLLAPSE)
def _gr2(ic):
    n = ic.n
    return _each(ic, lambda S: rel((ic.I(S.vert_hess_Jgrad),
                                    -ic.I(S.omega_trace ** 2) / (2 * n))))


@_int_register("gr3/integral", "int nabla^2 f(xi, J grad f) = int [-1/(2n)(Delta f)^2 "
               "+ A(J grad f, grad f) - 1/(2n) P(grad f)]", note=COLLAPSE)
def _gr3_int(ic):
    n = ic.n
    return _each(ic, lambda S: rel((ic.I(S.vert_hess_Jgrad),
                                    ic.I(-S.lap ** 2 - S.P_of_grad) / (2 * n))))


@_int_register("e:Afrom2lemmas", "2 int A(J grad f, grad f) = int [-1/(2n) g(nabla^2 f, omega)^2 "
               "+ 1/(2n)(Delta f)^2 + 1/(2n) P(grad f)]", note=COLLAPSE)
def _afrom2(ic):
    n = ic.n

    def one(S):
        a = ic.I(S.omega_trace ** 2) / (2 * n)
        b = ic.I(S.lap ** 2 + S.P_of_grad) / (2 * n)
        return rel((a, b))

    return _each(ic, one)


@_int_register("l:GrLee/integral", "int |B_0|^2 = -(n-1)/(2n) int P(grad f)")
def _grlee_int(ic):
    n = ic.n
    return _each(ic, lambda S: rel((ic.I(S.norm2(S.B0)),
                                    -(n - 1) / (2 * n) * ic.I(S.P_of_grad))))


def _bohin_terms(ic, S):
    return (ic.I(-S.lap ** 2 + S.norm2(S.B) + S.norm2(S.B_minus) + ic.ric * S.grad_norm2),
            ic.I(S.vert_hess_Jgrad))


@_int_register("bohin", "0 = int [-(Delta f)^2 + |(nabla^2 f)_[1]|^2 + |(nabla^2 f)_[-1]|^2 "
               "+ Ric(grad f, grad f) + 2A(J grad f, grad f) + 4 nabla^2 f(xi, J grad f)]",
               note=COLLAPSE)
def _bohin(ic):
    def one(S):
        a, v = _bohin_terms(ic, S)
        return rel((a, -4 * v))

    return _each(ic, one)


@_int_register("e:bohin", "0 = int [-(Delta f)^2 + |(nabla^2 f)_[1]|^2 + |(nabla^2 f)_[-1]|^2 "
               "+ Ric(grad f, grad f) + 6A(J grad f, grad f) - 2/n (Delta f)^2 - 2/n P(grad f)]",
               note=COLLAPSE)
def _e_bohin(ic):
    n = ic.n

    def one(S):
        a, _ = _bohin_terms(ic, S)
        return rel((a, ic.I(S.lap ** 2 + S.P_of_grad) * 2 / n))

    return _each(ic, one)


def _bohin1_first(ic, S, k0):
    n = ic.n
    return ic.I(-S.lap ** 2 + S.norm2(S.B) + S.norm2(S.B_minus) + k0 * S.grad_norm2
                - S.omega_trace ** 2 / (2 * n) - 3 / (2 * n) * S.lap ** 2
                - 3 / (2 * n) * S.P_of_grad)


@_int_register("e:bohin1", "0 >= int [-(Delta f)^2 + |(nabla^2 f)_[1]|^2 + |(nabla^2 f)_[-1]|^2 "
               "+ k_0 |grad f|^2 - 1/(2n) g(nabla^2 f, omega)^2 - 3/(2n)(Delta f)^2 "
               "- 3/(2n) P(grad f)] = int [(-(n+1)/n lambda + k_0)|grad f|^2 "
               "+ |(nabla^2 f)_[1]|^2 - 1/(2n)(Delta f)^2 - 1/(2n) g(nabla^2 f, omega)^2 "
               "+ |(nabla^2 f)_[-1]|^2 - 3/(2n) P(grad f)]", kind="inequality", note=COLLAPSE)
def _bohin1(ic):
    n, k0 = ic.n, ic.ric
    worst = 0.0
    for S in ic.fields:
        v = _bohin1_first(ic, S, k0)
        worst = max(worst, max(0.0, v) / max(1.0, ic.I(S.lap ** 2)))
    for lam, S in ic.eigen_fields:
        first = _bohin1_first(ic, S, k0)
        second = ic.I((-(n + 1) / n * lam + k0) * S.grad_norm2 + S.norm2(S.B)
                      - S.lap ** 2 / (2 * n) - S.omega_trace ** 2 / (2 * n)
                      + S.norm2(S.B_minus) - 3 / (2 * n) * S.P_of_grad)
        worst = max(worst, rel((first, second)), max(0.0, first))
    return worst


@_int_register("e:obata-ineq", "0 >= int [(-(n+1)/n lambda + k_0)|grad f|^2 "
               "+ |(nabla^2 f)_[-1]|^2 - 3/(2n) P(grad f)], equality for lambda = n k_0/(n+1)",
               kind="inequality", note=COLLAPSE)
def _obata_ineq(ic):
    n, k0 = ic.n, ic.ric
    worst = 0.0
    for lam, S in ic.eigen_fields:
        v = ic.I((-(n + 1) / n * lam + k0) * S.grad_norm2 + S.norm2(S.B_minus)
                 - 3 / (2 * n) * S.P_of_grad)
        worst = max(worst, max(0.0, v))
        if lam == 2 * n:
            worst = max(worst, abs(v))
    return worst


@_int_register("e:nonnegativeP", "-int P(grad f) >= 0", kind="inequality")
def _nonneg_P(ic):
    return _each(ic, lambda S: max(0.0, ic.I(S.P_of_grad)) / max(1.0, ic.I(S.lap ** 2)))


def _hgrad_inner(U, V, n):
    """``<grad_H U, grad_H V>`` on the sphere as an exact ambient polynomial."""
    from .operators import xi_poly

    out = U.euler() * V.euler() * -1 - xi_poly(U, n) * xi_poly(V, n)
    for a, b in zip(U.gradient(), V.gradient()):
        out = out + a * b
    return out


def _hgrad_J_inner(G, F, n):
    """``<grad_H G, J grad_H F>`` as an exact ambient polynomial."""
    from .models import ambient_complex_structure
    from .operators import xi_poly

    Ja = ambient_complex_structure(n)
    dG, dF = G.gradient(), F.gradient()
    out = G.euler() * xi_poly(F, n) - xi_poly(G, n) * F.euler()
    for i in range(len(dG)):
        for j in range(len(dF)):
            if Ja[i, j]:
                out = out + dG[i] * dF[j] * int(Ja[i, j])
    return out


def exact_P_of_grad(F, n):
    """``P(grad f) = -<grad Delta f, grad f> - 2n <grad xi f, J grad f>`` (torsion free)."""
    from .operators import sublaplacian_poly, xi_poly

    return (_hgrad_inner(sublaplacian_poly(F, n), F, n) * -1
            - _hgrad_J_inner(xi_poly(F, n), F, n) * (2 * n))


@_int_register("e:Cdef/parts", "int f Cf = -int P(grad f)",
               note="exact rational integrals, checked against cubature")
def _cdef_parts(ic):
    from .operators import paneitz_C_poly
    from .quadrature import integrate_sphere_polynomial

    n = ic.n
    worst = 0.0
    for F, S in list(zip(ic.polys, ic.fields))[:5]:
        fcf = integrate_sphere_polynomial(F * paneitz_C_poly(F, n))
        pg = integrate_sphere_polynomial(exact_P_of_grad(F, n))
        lhs, rhs = fcf.coefficient, -pg.coefficient
        worst = max(worst, float(abs(lhs - rhs)) / max(1.0, float(abs(lhs))))
        worst = max(worst, rel((float(pg), ic.I(S.P_of_grad))))
    return worst


# ===================================================================================
# spectral checks (sphere Galerkin matrices)
# ===================================================================================


class SpectralContext:
    def __init__(self, model: Model, degree: int, seed: int):
        self.model = model
        self.n = model.n
        self.degree = degree
        self.seed = seed

    def matrix(self, op: str, N: int | None = None):
        from .spectral import assemble

        return assemble(self.model, op, self.degree if N is None else N)


SPEC = ("spectral",)


def _spec_register(id, anchor, **kw):
    kw.setdefault("suites", SPEC)
    kw.setdefault("guards", SPH)
    return register(id, anchor, kind="spectral", source="spectral", **kw)


def _first(sc, op, value, mult):
    from .spectral import first_eigenvalue

    lam, fns = first_eigenvalue(sc.matrix(op))
    if len(fns) != mult:
        return float("inf")
    return abs(lam - value)


@_spec_register("eig", "Delta f = lambda f; lambda_1 = 2n with the linear functions as eigenspace")
def _eig(sc):
    return _first(sc, "sublaplacian", 2 * sc.n, 2 * (sc.n + 1))


@_spec_register("e:riem-eigen-fn/spectral", "first eigenvalue of Delta^h is 2n+1 on the linear functions")
def _riem_spec(sc):
    return _first(sc, "riemannian_laplacian", 2 * sc.n + 1, 2 * (sc.n + 1))


@_spec_register("spectrum/lambda-pq", "Galerkin spectrum = {lambda_pq, dim H_pq : p+q <= N}",
                note="bigraded eigenvalue formula is an implementer-derived oracle")
def _lambda_pq(sc):
    from .spectral import SPECTRAL_OPERATORS, predicted_spectrum

    worst = 0.0
    for op in SPECTRAL_OPERATORS:
        got = [(c["value"], c["multiplicity"]) for c in sc.matrix(op).clusters()]
        want = predicted_spectrum(op, sc.n, sc.degree)
        if [m for _, m in got] != [m for _, m in want]:
            return float("inf")
        worst = max(worst, max(abs(a - b) for (a, _), (b, _) in zip(got, want)))
    return worst


@_spec_register("spectrum/fit-oracle", "Galerkin eigenvalues = eigenvalues of the operator fitted "
                "from pointwise applications")
def _fit(sc):
    from .spectral import fit_oracle

    N = min(sc.degree, 3 if sc.n == 1 else 2)
    worst = 0.0
    for op in ("sublaplacian", "riemannian_laplacian"):
        fo = fit_oracle(sc.model, op, N, seed=sc.seed)
        ev = sc.matrix(op, N).eigenvalues
        worst = max(worst, fo.fit_residual, float(np.max(np.abs(np.sort(ev) - fo.eigenvalues))))
    return worst


@_spec_register("paneitz-psd", "-int P_f(grad f) >= 0: the Paneitz matrix is symmetric and "
                "positive semidefinite")
def _psd(sc):
    sm = sc.matrix("paneitz_C")
    return max(sm.symmetry_error, max(0.0, -float(sm.eigenvalues[0])))


@_spec_register("main1", "lambda_1 >= n/(n+1) k_0 with Ric(X,X) + 4A(X,JX) >= k_0 g(X,X); "
                "equality on the sphere", suites=SPEC + ("extremal",))
def _main1(sc):
    from .verify import lichnerowicz_certificate

    cert = lichnerowicz_certificate(sc.model, sc.degree, seed=sc.seed)
    return max(cert["violation"], cert["gap"])


# ===================================================================================
# geometry-only checks on the group and sphere models
# ===================================================================================

TOR = ("torsion",)


@register("rigidity-constants", "S = 8 in dimension three; Ric = 2(n+1) g, S = 4n(n+1) on the sphere",
          source="geometry", guards=SPH, suites=("pointwise", "extremal"), tol="structure")
def _rigidity(c):
    h, n = c.h, c.n
    return rel((c.Ric[:h, :h], 2 * (n + 1) * c.g), (c.S, 4 * n * (n + 1)))


@register("torsion/parallel", "(nabla_X A)(Y,Z) = 0", source="geometry", suites=TOR,
          guards=("group",))
def _parallel(c):
    return zero(c.DAh)


@register("vcurv2", "(nabla_{e_a} A)(e_a, X) = 0", source="geometry", suites=TOR,
          guards=("group",))
def _vcurv2(c):
    return zero(c.divA)


@register("vcurv1", "R(xi,X,Y,Z) = 0 iff (nabla_Y A)(Z,X) = (nabla_Z A)(Y,X)", source="geometry",
          suites=TOR, guards=("group",))
def _vcurv1(c):
    h = c.h
    vert = float(np.linalg.norm(c.R[c.z, :h, :h, :h]))
    D = c.DAh
    codazzi = float(np.linalg.norm(np.einsum("ywx->xyw", D) - np.einsum("wyx->xyw", D)))
    return abs(vert - codazzi)


@register("torsion/constant-norm", "d|A|^2 = 0", source="geometry", suites=TOR, guards=("group",))
def _const_norm(c):
    alg = c.geo.alg
    A = c.geo.A
    h = c.h
    sq = sum(alg.mul(A[i, j], A[i, j]) for i in range(h) for j in range(h))
    return zero(c.v(c.geo.E(sq)))

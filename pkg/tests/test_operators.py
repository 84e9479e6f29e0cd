import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import model
from crlab import PointGeometry, sample_points
from crlab.calculus import ScalarField
from crlab.models import ModelError
from crlab.operators import (B0, LocalCalculus, hdiv, hgrad, paneitz_C, paneitz_P,
                             riemannian_laplacian, sublaplacian)
from crlab.polynomial import Polynomial
from crlab.quadrature import integrate_sphere_polynomial

seeds = st.integers(0, 2 ** 20)


def _x(n):
    return [Polynomial.variable(2 * n + 2, i) for i in range(2 * n + 2)]


def _field(label, poly):
    return ScalarField.polynomial(model(label), poly)


def test_sublaplacian_examples():
    x = _x(1)
    f = _field("sphere(1)", x[0])
    assert sublaplacian(f).poly == x[0] * 2
    assert sublaplacian(_field("sphere(1)", Polynomial.constant(4, 5))).poly.is_zero()
    re_z2 = x[0] * x[0] - x[1] * x[1]
    assert sublaplacian(_field("sphere(1)", re_z2)).poly == re_z2 * 4
    for p in sample_points(model("sphere(1)"), 5, 0):
        assert sublaplacian(f, p) == pytest.approx(2 * p[0], abs=1e-12)


def test_riemannian_laplacian_examples():
    for n in (1, 2):
        x = _x(n)
        f = _field(f"sphere({n})", x[0])
        assert riemannian_laplacian(f).poly == x[0] * (2 * n + 1)
        p = sample_points(model(f"sphere({n})"), 1, 3)[0]
        assert riemannian_laplacian(f, p) == pytest.approx((2 * n + 1) * p[0], abs=1e-12)


def test_linear_functions_are_pluriharmonic():
    x = _x(1)
    f = _field("sphere(1)", x[0])
    assert paneitz_C(f).poly.is_zero()
    for p in sample_points(model("sphere(1)"), 5, 1):
        assert B0(f, p).norm() <= 1e-12
        assert paneitz_P(f, p).norm() <= 1e-10
        assert abs(paneitz_C(f, p)) <= 1e-10
    c = _field("sphere(1)", Polynomial.constant(4, 2))
    p = sample_points(model("sphere(1)"), 1, 2)[0]
    assert B0(c, p).norm() == 0.0 and paneitz_P(c, p).norm() == 0.0


@pytest.mark.parametrize("which", ["x1x2", "x1x3+x4^2"])
def test_B0_against_finite_differences(which):
    # fd oracle: horizontal Hessian of the ambient polynomial plus the
    # Tanaka-Webster correction, evaluated by central differences along frame lines
    m = model("sphere(2)")
    x = _x(2)
    F = x[0] * x[1] if which == "x1x2" else x[0] * x[2] + x[3] * x[3]
    f = _field("sphere(2)", F)
    p = sample_points(m, 1, 5)[0]
    geo = PointGeometry(m, p)
    lc = LocalCalculus.at(f, p, geo)
    E = geo.frame.values()
    G = geo.alg.value(geo.gamma)
    step = 1e-4

    def dfE(q, j):
        fr = PointGeometry(m, q / np.linalg.norm(q), order=2).frame.values()
        grad = np.array([g(q) if not g.is_zero() else 0.0 for g in f.poly.gradient()])
        return grad @ fr[j]

    def on_sphere(v, t):
        q = p + t * v
        return q / np.linalg.norm(q)

    # E_i(E_j f) by differences along the great circle through p in direction E_i
    h = geo.h
    hess = np.zeros((h, h))
    for i in range(h):
        for j in range(h):
            d = (dfE(on_sphere(E[i], step), j) - dfE(on_sphere(E[i], -step), j)) / (2 * step)
            hess[i, j] = d - G[i, j] @ np.array([dfE(p, k) for k in range(geo.N)])
    assert np.allclose(hess, lc.hess[:h, :h], atol=1e-6)
    J = geo.J
    Bm = 0.5 * (hess + J.T @ hess @ J)
    om = J.T
    lap = -np.trace(hess)
    omtr = np.sum(hess * om)
    B0fd = Bm + lap / h * np.eye(h) - omtr / h * om
    assert np.linalg.norm(B0fd) == pytest.approx(B0(f, p).norm(), abs=1e-7)
    if which != "x1x2":
        assert B0(f, p).norm() > 0.1


@given(seeds)
def test_hdiv_of_hgrad_is_minus_laplacian(seed):
    m = model("sphere(1)")
    F = Polynomial.random(4, 3, np.random.default_rng(seed))
    f = ScalarField.polynomial(m, F)
    lhs = hdiv(m, hgrad(f)).poly
    rhs = sublaplacian(f).poly * -1
    diff = lhs - rhs
    # equal as functions on the sphere: the difference integrates to zero against everything
    assert integrate_sphere_polynomial(diff * diff).coefficient == 0


@given(seeds)
def test_field_and_pointwise_routes_agree(seed):
    m = model("sphere(1)")
    rng = np.random.default_rng(seed)
    f = ScalarField.random(m, rng, degree=3)
    p = sample_points(m, 1, seed)[0]
    geo = PointGeometry(m, p)
    lap_field = sublaplacian(f).poly(p)
    C_field = paneitz_C(f).poly(p)
    assert sublaplacian(f, geo=geo, p=p) == pytest.approx(lap_field, abs=1e-9 * (1 + abs(lap_field)))
    assert paneitz_C(f, p, geo) == pytest.approx(C_field, abs=1e-8 * (1 + abs(C_field)))


def test_cf_integrates_by_parts():
    from crlab.identities import REGISTRY, IntegralContext

    ic = IntegralContext(model("sphere(1)"), seed=3, count=4, degree=4)
    assert REGISTRY["e:Cdef/parts"].fn(ic) <= 1e-12


def test_group_fields_need_points():
    g = model("group3d(2,1)")
    f = ScalarField.random(g, np.random.default_rng(0))
    with pytest.raises(ModelError):
        sublaplacian(f)
    assert np.isfinite(paneitz_C(f, np.zeros(3)))

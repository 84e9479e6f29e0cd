import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import model
from crlab import PointGeometry, sample_points
from crlab.calculus import ScalarField, TensorValue, decompose_11_m11, derive
from crlab.jets import JetOrderError, jet_algebra
from crlab.models import ModelError
from crlab.polynomial import Polynomial

seeds = st.integers(0, 2 ** 20)


def _poly_jet(alg, rng, k):
    a = alg.zeros((), alg.order)
    a[: alg.size(k)] = rng.uniform(-1, 1, alg.size(k))
    return a


@given(seeds)
def test_jet_product_commutes_and_associates(seed):
    alg = jet_algebra(3, 4)
    rng = np.random.default_rng(seed)
    a, b, c = (_poly_jet(alg, rng, 4) for _ in range(3))
    assert np.allclose(alg.mul(a, b), alg.mul(b, a), atol=1e-14)
    assert np.allclose(alg.mul(alg.mul(a, b), c), alg.mul(a, alg.mul(b, c)), atol=1e-13)


@given(seeds, st.integers(0, 2))
def test_jet_leibniz(seed, mu):
    alg = jet_algebra(3, 4)
    rng = np.random.default_rng(seed)
    a, b = _poly_jet(alg, rng, 4), _poly_jet(alg, rng, 4)
    lhs = alg.partial(alg.mul(a, b), mu)
    da, db = alg.partial(a, mu), alg.partial(b, mu)
    rhs = alg.mul(da, alg.truncate(b, 3)) + alg.mul(alg.truncate(a, 3), db)
    assert np.allclose(lhs, rhs, atol=1e-13)


@given(seeds)
def test_jet_reciprocal_and_sqrt(seed):
    alg = jet_algebra(2, 5)
    rng = np.random.default_rng(seed)
    a = _poly_jet(alg, rng, 5)
    a[0] = 2.0 + abs(a[0])
    one = alg.constant(1.0, 5)
    assert np.allclose(alg.mul(a, alg.reciprocal(a)), one, atol=1e-12)
    r = alg.sqrt(a)
    assert np.allclose(alg.mul(r, r), a, atol=1e-12)


def test_derive_examples():
    s3 = model("sphere(1)")
    x = [Polynomial.variable(4, i) for i in range(4)]
    f = ScalarField.polynomial(s3, x[0])
    p = np.array([0.0, 1.0, 0.0, 0.0])
    assert derive(f, [1.0, 0, 0, 0], p) == pytest.approx(1.0)
    const = ScalarField.polynomial(s3, Polynomial.constant(4, 3))
    assert derive(const, 0, p) == 0.0
    g = ScalarField.polynomial(s3, x[0] * x[1])
    q = np.array([1.0, 0, 0, 0])
    v = np.array([0, 0, 1.0, 0])
    fd = (g.poly(q + 1e-5 * v) - g.poly(q - 1e-5 * v)) / 2e-5
    assert derive(g, v, q) == pytest.approx(fd, abs=1e-8)
    with pytest.raises(ModelError):
        derive(f, [1.0, 0, 0, 0], [1.0, 0, 0, 0])
    with pytest.raises(ModelError):
        derive(f, 7, p)


def test_jet_field_budget():
    h1 = model("heisenberg(1)")
    f = ScalarField.random(h1, np.random.default_rng(0))
    with pytest.raises(JetOrderError):
        f.jet_at(np.zeros(3), order=h1.jet_order + 1)
    with pytest.raises(ModelError):
        f.jet_at(np.ones(3))


def test_field_representation_rules():
    with pytest.raises(ModelError):
        ScalarField.polynomial(model("heisenberg(1)"), Polynomial.constant(3, 1))
    with pytest.raises(ModelError):
        ScalarField(model("sphere(1)"))


@given(seeds)
def test_sphere_derivative_matches_finite_differences(seed):
    s3 = model("sphere(1)")
    rng = np.random.default_rng(seed)
    f = ScalarField.random(s3, rng, degree=4)
    (p,) = sample_points(s3, 1, seed)
    frame = PointGeometry(s3, p, order=2).frame.values()
    for k, v in enumerate(frame):
        fd = (f.poly(p + 1e-5 * v) - f.poly(p - 1e-5 * v)) / 2e-5
        assert derive(f, k, p) == pytest.approx(fd, abs=1e-7)


@given(seeds)
def test_group_derivative_matches_jet_contraction(seed):
    g = model("group3d(2,1)")
    rng = np.random.default_rng(seed)
    f = ScalarField.random(g, rng)
    base = np.zeros(3)
    # exponential coordinates: the frame at the identity is the coordinate basis
    lin = f.coeffs[1:4]
    for k in range(3):
        assert derive(f, k, base) == pytest.approx(lin[k], abs=1e-14)


matrices = arrays(np.float64, (4, 4), elements=st.floats(-10, 10))


@given(matrices, matrices, st.floats(-3, 3))
def test_decomposition_properties(a, b, s):
    J = model("sphere(2)").J
    t = TensorValue(a, ("horizontal", "horizontal"), 2)
    plus, minus = decompose_11_m11(t, J)
    assert np.allclose(plus.components + minus.components, a, atol=1e-12)
    assert plus.symmetry_residual("J-invariant", J) <= 1e-12
    assert minus.symmetry_residual("J-anti-invariant", J) <= 1e-12
    assert abs(np.sum(plus.components * minus.components)) <= 1e-10 * (1 + t.norm() ** 2)
    assert t.norm() ** 2 == pytest.approx(plus.norm() ** 2 + minus.norm() ** 2, abs=1e-12 * (1 + t.norm() ** 2))
    pp, pm = decompose_11_m11(plus, J)
    assert np.allclose(pp.components, plus.components) and np.allclose(pm.components, 0)
    u = TensorValue(b, t.slots, 2)
    lin = decompose_11_m11(TensorValue(a + s * b, t.slots, 2), J)[0].components
    assert np.allclose(lin, plus.components + s * decompose_11_m11(u, J)[0].components, atol=1e-10)


def test_decomposition_examples():
    J = model("sphere(1)").J
    g = TensorValue(np.eye(2), ("horizontal", "horizontal"), 1)
    om = TensorValue(J.T, g.slots, 1)
    for t in (g, om):
        plus, minus = decompose_11_m11(t, J)
        assert np.allclose(plus.components, t.components) and np.allclose(minus.components, 0)
    g21 = model("group3d(2,1)")
    geo = PointGeometry(g21, np.zeros(3), order=2)
    A = TensorValue(geo.curvature().A[:2, :2], g.slots, 1)
    assert A.norm() > 0.1
    plus, minus = decompose_11_m11(A, J)
    assert plus.norm() <= 1e-12 and np.allclose(minus.components, A.components)


def test_tensor_value_validation():
    with pytest.raises(ValueError):
        TensorValue(np.zeros((3, 3)), ("horizontal", "horizontal"), 1)
    with pytest.raises(ValueError):
        TensorValue(np.zeros(3), ("full", "full"), 1)
    with pytest.raises(ValueError):
        decompose_11_m11(TensorValue(np.zeros((3, 3)), ("full", "full"), 1), np.eye(2))
    t = TensorValue(np.zeros((3, 3)), ("full", "full"), 1)
    assert t.horizontal().components.shape == (2, 2)

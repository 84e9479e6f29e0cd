from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SPECS, model
from crlab import ModelError, ModelSpec, build_model, frame_at, group3d, sample_points
from crlab.calculus import ScalarField
from crlab.models import frame_residuals, integrate_polynomial, vol_theta_ratio
from crlab.polynomial import Polynomial
from crlab.quadrature import SphereIntegral, sphere_area


def test_heisenberg_brackets():
    m = model("heisenberg(1)")
    c = frame_at(m, np.zeros(3)).structure_functions()[..., 0]
    expected = np.zeros((3, 3, 3))
    expected[0, 1, 2], expected[1, 0, 2] = 2.0, -2.0
    assert np.allclose(c, expected, atol=1e-14)


def test_heisenberg_frame_at_origin():
    # exponential coordinates: the frame value is the coordinate basis and the
    # left-invariant frame is parallel for the horizontal symbols
    from crlab import solve_tanaka_webster

    m = model("heisenberg(1)")
    frame = frame_at(m, np.zeros(3))
    assert np.allclose(frame.values(), np.eye(3), atol=1e-15)
    gamma = solve_tanaka_webster(m, frame=frame).gamma
    assert np.max(np.abs(gamma[:2, :2, :2])) <= 1e-14


def test_sphere_reeb_field():
    m = model("sphere(1)")
    xi = frame_at(m, [1.0, 0, 0, 0]).values()[-1]
    assert np.allclose(xi, [0, 1, 0, 0], atol=1e-14)
    for p in sample_points(m, 50, 1):
        assert frame_residuals(frame_at(m, p))["theta(xi)=1"] <= 1e-12


def test_group3d_bracket_coefficient():
    m = model("group3d(2,1)")
    c = frame_at(m, np.zeros(3)).structure_functions()
    # [xi, e1] = c1 e2
    assert c[2, 0, 1, 0] == pytest.approx(2.0, abs=1e-13)
    assert np.allclose(c[2, 0, 1, 1:], 0.0, atol=1e-12)
    # [e2, xi] = c2 e1
    assert c[1, 2, 0, 0] == pytest.approx(1.0, abs=1e-13)


def test_rejects_bad_specs():
    with pytest.raises(ModelError):
        ModelSpec("sphere", 0)
    with pytest.raises(ModelError):
        ModelSpec("torus", 1)
    with pytest.raises(ModelError):
        ModelSpec("group3d", 2, 1, 1)
    with pytest.raises(ModelError):
        group3d("x", 1)


def test_degenerate_bracket_flag():
    assert "degenerate bracket" in build_model(group3d(0, 1)).flags
    assert build_model(group3d(2, 1)).flags == ()


def test_off_sphere_point_rejected():
    with pytest.raises(ModelError):
        frame_at(model("sphere(1)"), [1.0, 1e-6, 0, 0.1])


def test_sample_points():
    pts = sample_points(model("sphere(1)"), 3, 7)
    assert len(pts) == 3
    assert all(abs(np.linalg.norm(p) - 1) <= 1e-14 for p in pts)
    (q,) = sample_points(model("heisenberg(2)"), 1, 0)
    assert q.shape == (5,) and np.all(np.abs(q) <= 1.0)
    again = sample_points(model("sphere(1)"), 3, 7)
    assert all(np.array_equal(a, b) for a, b in zip(pts, again))
    with pytest.raises(ModelError):
        sample_points(model("sphere(1)"), 0, 0)


@pytest.mark.parametrize("label", list(SPECS))
def test_frame_invariants_at_100_points(label):
    m = model(label)
    worst = max(max(frame_residuals(frame_at(m, p)).values()) for p in sample_points(m, 100, 11))
    assert worst <= 1e-10


def test_integrate_polynomial_examples():
    m = model("sphere(1)")
    x = [Polynomial.variable(4, i) for i in range(4)]
    one = Polynomial.constant(4, 1)
    assert integrate_polynomial(m, one) == SphereIntegral(Fraction(2), 2)
    assert float(integrate_polynomial(m, one)) == pytest.approx(2 * np.pi ** 2, rel=1e-15)
    assert float(integrate_polynomial(m, x[0])) == 0.0
    assert float(integrate_polynomial(m, x[0] * x[0])) == pytest.approx(np.pi ** 2 / 2, rel=1e-15)
    assert integrate_polynomial(m, ScalarField.polynomial(m, x[0] * x[0])).coefficient == Fraction(1, 2)
    assert sphere_area(2) == SphereIntegral(Fraction(1), 3)
    assert vol_theta_ratio(model("sphere(2)")) == 2


def test_integrate_polynomial_errors():
    with pytest.raises(ModelError):
        integrate_polynomial(model("heisenberg(1)"), Polynomial.constant(3, 1))
    with pytest.raises(ModelError):
        integrate_polynomial(model("sphere(1)"), Polynomial.constant(6, 1))
    with pytest.raises(ModelError):
        integrate_polynomial(model("sphere(1)"), 1.0)


exponents4 = st.tuples(*[st.integers(0, 4)] * 4)


@given(exponents4)
def test_odd_monomials_integrate_to_zero(e):
    p = Polynomial(4, {e: 1})
    total = integrate_polynomial(model("sphere(1)"), p).coefficient
    if any(a % 2 for a in e):
        assert total == 0
    else:
        assert total > 0


@given(st.integers(0, 2 ** 16), st.integers(-5, 5), st.integers(-5, 5))
def test_integration_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    m = model("sphere(1)")
    f, g = Polynomial.random(4, 3, rng), Polynomial.random(4, 3, rng)
    lhs = integrate_polynomial(m, f * a + g * b).coefficient
    rhs = a * integrate_polynomial(m, f).coefficient + b * integrate_polynomial(m, g).coefficient
    assert lhs == rhs


@given(st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=8))
def test_equal_parameters_give_sasakian_groups(c):
    from crlab.verify import torsion_norm

    assert torsion_norm(build_model(group3d(c, c)), seed=0) <= 1e-12

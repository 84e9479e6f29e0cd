from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import model
from crlab import assemble, first_eigenvalue, lichnerowicz_certificate
from crlab.operators import sublaplacian_poly
from crlab.quadrature import (integrate_sphere_polynomial, sphere_cubature,
                              sphere_monomial_integral)
from crlab.polynomial import Polynomial
from crlab.spectral import (SpectralError, bigraded_eigenvalue, canonical_operator, fit_oracle,
                            harmonic_dimension, predicted_spectrum)


def _spectrum(sm):
    return [(round(c["value"], 8), c["multiplicity"]) for c in sm.clusters()]


def test_first_slices():
    s3 = model("sphere(1)")
    assert _spectrum(assemble(s3, "sublaplacian", 1)) == [(0, 1), (2, 4)]
    assert _spectrum(assemble(s3, "riemannian_laplacian", 1)) == [(0, 1), (3, 4)]
    assert [v for v, _ in _spectrum(assemble(s3, "sublaplacian", 2))] == [0, 2, 4, 8]


@pytest.mark.parametrize("n,N", [(1, 4), (2, 3)])
def test_first_eigenvalue(n, N):
    lam, fns = first_eigenvalue(assemble(model(f"sphere({n})"), "sublaplacian", N))
    assert lam == pytest.approx(2 * n, abs=1e-9)
    assert len(fns) == 2 * (n + 1)
    for f in fns:
        residual = sublaplacian_poly(f, n) - f * (2 * n)
        assert max([abs(float(c)) for c in residual.terms.values()] + [0.0]) <= 1e-9


def test_paneitz_is_positive_semidefinite():
    sm = assemble(model("sphere(1)"), "paneitz", 3)
    assert sm.symmetry_error <= 1e-9
    assert sm.eigenvalues[0] >= -1e-9


@pytest.mark.parametrize("op", ["sublaplacian", "riemannian_laplacian", "paneitz"])
@pytest.mark.parametrize("n,N", [(1, 3), (2, 2)])
def test_galerkin_matches_bigraded_formula(op, n, N):
    got = _spectrum(assemble(model(f"sphere({n})"), op, N))
    assert got == [(float(v), m) for v, m in predicted_spectrum(op, n, N)]


@pytest.mark.parametrize("op", ["sublaplacian", "riemannian_laplacian"])
def test_fit_oracle_independent_of_formula(op):
    s3 = model("sphere(1)")
    fitted = np.sort(fit_oracle(s3, op, 2, seed=5).eigenvalues)
    expected = []
    for v, m in predicted_spectrum(op, 1, 2):
        expected += [v] * m
    assert np.allclose(fitted, expected, atol=1e-8)


def test_fit_oracle_refuses_fourth_order():
    with pytest.raises(SpectralError):
        fit_oracle(model("sphere(1)"), "paneitz", 1)


@given(st.integers(1, 3), st.integers(0, 4), st.integers(0, 4))
def test_harmonic_dimensions_add_up(n, p, q):
    # polynomials of bidegree (p, q) = H_pq + |z|^2 (bidegree (p-1, q-1))
    from math import comb

    m = n + 1
    total = comb(p + m - 1, p) * comb(q + m - 1, q)
    acc = sum(harmonic_dimension(n, p - k, q - k) for k in range(min(p, q) + 1))
    assert acc == total
    assert bigraded_eigenvalue("sublaplacian", n, p, q) == bigraded_eigenvalue("sublaplacian", n, q, p)


def test_operator_names():
    assert canonical_operator("paneitz") == canonical_operator("paneitz_C")
    with pytest.raises(SpectralError):
        canonical_operator("wave")


def test_certificate_on_spheres_and_groups():
    c = lichnerowicz_certificate(model("sphere(1)"), 3)
    assert c["status"] == "pass"
    assert c["k0"] == pytest.approx(4.0, abs=1e-9) and c["bound"] == pytest.approx(2.0, abs=1e-9)
    c = lichnerowicz_certificate(model("sphere(2)"), 3)
    assert c["k0"] == pytest.approx(6.0, abs=1e-9) and c["lambda1"] == pytest.approx(4.0, abs=1e-9)
    assert lichnerowicz_certificate(model("heisenberg(1)"))["status"] == "skipped"


def test_quadrature_closed_forms():
    assert sphere_monomial_integral((0, 0, 0, 0)) == 2
    assert sphere_monomial_integral((2, 0, 0, 0)) == Fraction(1, 2)
    assert sphere_monomial_integral((2, 2, 0, 0)) == Fraction(1, 12)
    with pytest.raises(ValueError):
        sphere_monomial_integral((0, 0, 0))


@given(st.integers(1, 2), st.integers(0, 6), st.integers(0, 2 ** 20))
def test_cubature_is_exact(n, degree, seed):
    F = Polynomial.random(2 * n + 2, degree, np.random.default_rng(seed))
    cub = sphere_cubature(n, max(degree, 1))
    exact = float(integrate_sphere_polynomial(F))
    approx = cub.integrate(F(cub.points))
    assert approx == pytest.approx(exact, abs=1e-12 * (1 + abs(exact)))

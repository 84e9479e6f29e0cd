import numpy as np
import pytest

from conftest import SPECS, model
from crlab import PointGeometry, sample_points, solve_tanaka_webster
from crlab.connection import axiom_system, levi_civita_compare


@pytest.mark.parametrize("label", list(SPECS))
def test_axiom_matrix_has_full_column_rank(label):
    system = axiom_system(model(label))
    assert system.rank == system.unknowns
    assert system.min_singular > 1e-8


def test_heisenberg_horizontal_symbols_vanish():
    for label in ("heisenberg(1)", "heisenberg(2)"):
        m = model(label)
        co = solve_tanaka_webster(m, np.zeros(m.nvars))
        h = 2 * m.n
        assert np.max(np.abs(co.value()[:h, :h, :h])) <= 1e-14
        assert np.max(np.abs(co.A)) <= 1e-14


@pytest.mark.parametrize("label,sasakian", [("sphere(1)", True), ("sphere(2)", True),
                                            ("heisenberg(2)", True), ("group3d(2,2)", True),
                                            ("group3d(2,1)", False)])
def test_torsion(label, sasakian):
    m = model(label)
    for p in sample_points(m, 5, 2):
        A = PointGeometry(m, p, order=2).curvature().A
        assert (np.max(np.abs(A)) <= 1e-12) == sasakian


def test_parallel_torsion_group():
    m = model("group3d(2,1)")
    norms = []
    for p in sample_points(m, 5, 4):
        pack = PointGeometry(m, p, order=3).curvature()
        norms.append(np.linalg.norm(pack.A))
        # parallel along horizontal directions; nabla_xi A rotates A
        assert np.max(np.abs(pack.DA[:2, :2, :2])) <= 1e-10
        assert np.max(np.abs(pack.DA[2])) > 0.1
    assert np.ptp(norms) <= 1e-12 and norms[0] > 0.5


def test_curvature_examples():
    flat = PointGeometry(model("heisenberg(1)"), np.zeros(3), order=2).curvature()
    assert np.max(np.abs(flat.R)) <= 1e-14 and flat.S == 0.0
    s3 = PointGeometry(model("sphere(1)"), [0.6, 0, 0, 0.8], order=2).curvature()
    assert s3.S == pytest.approx(8.0, abs=1e-10)
    geo = PointGeometry(model("sphere(2)"), sample_points(model("sphere(2)"), 1, 9)[0], order=2)
    pack = geo.curvature()
    assert np.allclose(pack.Ric[:4, :4], 6 * np.eye(4), atol=1e-10)
    assert pack.S == pytest.approx(24.0, abs=1e-10)


@pytest.mark.parametrize("label", ["sphere(1)", "heisenberg(1)"])
def test_levi_civita_relations(label):
    m = model(label)
    for p in sample_points(m, 50 if m.is_sphere else 5, 5):
        res = levi_civita_compare(PointGeometry(m, p, order=2))
        assert res["lcbi"] <= 1e-12
        assert res["wh"] <= 1e-10


def test_riemannian_hessian_of_linear_function():
    from crlab.calculus import ScalarField
    from crlab.polynomial import Polynomial

    m = model("sphere(1)")
    f = ScalarField.polynomial(m, Polynomial.variable(4, 0))
    for p in sample_points(m, 10, 1):
        geo = PointGeometry(m, p)
        df = geo.derivatives(f.jet_at(p), 1)[1]
        D2 = geo.riemannian_hessian(df)
        assert np.allclose(D2, -p[0] * np.eye(3), atol=1e-12)

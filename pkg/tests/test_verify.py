import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import model
from crlab import Tolerances, extremal_diagnostics, run_suite, torsion_model_suite
from crlab.identities import REGISTRY
from crlab.polynomial import Polynomial
from crlab.verify import (AUXILIARY, PAPER_TAGS, SUITES, VerifyError, coverage, k0_estimate,
                          select_checks)


def test_every_tag_maps_to_checks_or_a_reason():
    for tag, target in PAPER_TAGS.items():
        if isinstance(target, str):
            assert target.strip(), tag
        else:
            assert target, tag
            assert all(cid in REGISTRY for cid in target), tag


def test_every_check_is_referenced():
    used = {cid for v in PAPER_TAGS.values() if not isinstance(v, str) for cid in v}
    assert set(REGISTRY) == used | set(AUXILIARY)
    assert set(AUXILIARY) <= set(REGISTRY)


def test_coverage_partition():
    cov = coverage()
    assert set(cov["checks"]) | set(cov["out_of_scope"]) == set(PAPER_TAGS)
    assert not set(cov["checks"]) & set(cov["out_of_scope"])


def test_registry_metadata():
    for cid, c in REGISTRY.items():
        assert c.id == cid and " " not in cid
        assert c.anchor
        assert set(c.suites) <= set(SUITES)
        assert c.tol in ("pointwise", "extremal", "integral", "spectral", "structure")


def test_selection_errors():
    with pytest.raises(VerifyError):
        select_checks(("everything",))
    with pytest.raises(VerifyError):
        select_checks(ids=["no-such-check"])
    with pytest.raises(VerifyError):
        run_suite(model("sphere(1)"), points=0)


def test_sphere_full_run():
    rep = run_suite(model("sphere(1)"), ("all",), seed=42, points=3)
    assert rep.ok
    # only dimension guards may skip on S^3
    for c in rep.checks:
        if c["status"] == "skipped":
            assert "n>=2" in REGISTRY[c["id"]].guards or "group" in REGISTRY[c["id"]].guards
    doc = json.loads(rep.to_json())
    assert doc["summary"]["counts"] == rep.counts()
    assert {"id", "paper_anchor", "status", "residual", "tolerance", "points", "note"} <= set(doc["checks"][0])


def test_group_pointwise_skips_extremal():
    rep = run_suite(model("group3d(2,1)"), ("pointwise",), seed=0, points=2)
    assert rep.ok
    for cid in ("currr", "currrr", "torric", "div"):
        assert rep.status_of(cid) == "pass"
    assert rep.status_of("e:hessian") == "skipped"
    assert rep.status_of("wh") == "skipped"
    assert rep.summary["torsion_norm"] > 0.1


def test_heisenberg_ricci_suite():
    rep = run_suite(model("heisenberg(2)"), ("ricci",), seed=0, points=5)
    ids = {c["id"] for c in rep.checks}
    assert {f"e:ricci-identities/{k}" for k in range(1, 7)} <= ids
    assert all(c["status"] == "pass" for c in rep.checks)


def test_impossible_tolerance_fails():
    rep = run_suite(model("sphere(1)"), ("ricci",), seed=0, points=2,
                    tolerances=Tolerances.uniform(1e-30))
    assert not rep.ok


def test_wrong_extremal_function_fails_the_chain():
    x = [Polynomial.variable(4, i) for i in range(4)]
    bad = x[0] * x[0]
    rep = run_suite(model("sphere(1)"), ("extremal",), seed=0, points=2, extremal=bad,
                    ids=["e:hessian", "e:riem-eigen-fn"])
    assert rep.status_of("e:hessian") == "fail"


def test_extremal_diagnostics():
    x = [Polynomial.variable(4, i) for i in range(4)]
    rep = extremal_diagnostics(model("sphere(1)"), x[0] + x[2], points=3)
    assert rep.ok and rep.counts()["pass"] > 40
    with pytest.raises(VerifyError):
        extremal_diagnostics(model("sphere(1)"), x[0] * x[1])
    with pytest.raises(VerifyError):
        extremal_diagnostics(model("heisenberg(1)"), x[0])
    y = [Polynomial.variable(6, i) for i in range(6)]
    rep = extremal_diagnostics(model("sphere(2)"), y[0], points=2)
    assert rep.status_of("e:norms-dfA-vs-Adf") == "pass"


@pytest.mark.parametrize("c1,c2", [(2, 1), (3, 1)])
def test_torsion_suite_parallel_models(c1, c2):
    from crlab import build_model, group3d

    rep = torsion_model_suite(build_model(group3d(c1, c2)), points=3)
    s = rep.summary
    assert rep.ok and s["parallel_torsion"] and s["divergence_free"] and not s["sasakian"]
    assert s["A_norm"] == pytest.approx(abs(c1 - c2) / np.sqrt(2), rel=1e-10)


def test_torsion_suite_sasakian_and_errors():
    rep = torsion_model_suite(model("group3d(2,2)"))
    assert rep.summary["sasakian"] and rep.summary["A_norm"] <= 1e-12
    with pytest.raises(VerifyError):
        torsion_model_suite(model("sphere(1)"))


def test_k0_on_spheres():
    for n in (1, 2):
        k = k0_estimate(model(f"sphere({n})"), directions=200)
        assert k["k0"] == pytest.approx(2 * (n + 1), abs=1e-10)


@given(st.integers(0, 10 ** 6))
def test_seeded_runs_are_reproducible(seed):
    a = run_suite(model("heisenberg(1)"), ("ricci",), seed=seed, points=1).to_json()
    b = run_suite(model("heisenberg(1)"), ("ricci",), seed=seed, points=1).to_json()
    assert a == b


@given(st.integers(0, 10 ** 6), st.sampled_from(["heisenberg(1)", "group3d(2,1)", "sphere(1)"]))
def test_unconditional_identities_hold_for_random_fields(seed, label):
    ids = ["bohh", "e:vertical-Bochner", "xi1", "coshy3", "e:Ricci-for-P", "l:GrLee"]
    rep = run_suite(model(label), ("pointwise",), seed=seed, points=1, ids=ids)
    assert rep.ok, rep.failures

"""End-to-end acceptance criteria. Each test records one PASS/FAIL line."""

import numpy as np

from conftest import model
from crlab import (PointGeometry, assemble, build_model, first_eigenvalue, group3d,
                   lichnerowicz_certificate, run_suite, sample_points, torsion_model_suite)
from crlab.cli import main
from crlab.identities import REGISTRY
from crlab.spectral import fit_oracle
from crlab.verify import torsion_norm

UNCONDITIONAL = [
    "torha", "tortrace", "currrr", "currr", "torric", "rho", "rid", "div",
    *(f"e:ricci-identities/{k}" for k in range(1, 7)),
    "xi1", "bohh", "e:vertical-Bochner", "lcbi", "coshy3",
]
ALL_MODELS = ["heisenberg(1)", "heisenberg(2)", "sphere(1)", "sphere(2)",
              "group3d(2,1)", "group3d(2,2)"]


def test_criterion_1_sphere_first_eigenvalue(acceptance):
    rows = []
    for n, N in ((1, 4), (2, 3)):
        lam, fns = first_eigenvalue(assemble(model(f"sphere({n})"), "sublaplacian", N))
        rows.append((n, lam, len(fns)))
    ok = all(abs(lam - 2 * n) <= 1e-8 and mult == 2 * (n + 1) for n, lam, mult in rows)
    detail = "; ".join(f"n={n}: lambda1={lam:.12g} x{m}" for n, lam, m in rows)
    acceptance(1, "sphere first eigenvalue 2n with the linear eigenspace", ok, detail)
    assert ok


def test_criterion_2_lichnerowicz_equality(acceptance):
    certs = [lichnerowicz_certificate(model(f"sphere({n})"), 3, seed=0) for n in (1, 2)]
    ok = True
    for n, c in zip((1, 2), certs):
        ok &= abs(c["k0"] - 2 * (n + 1)) <= 1e-8 and abs(c["k0_eigen"] - 2 * (n + 1)) <= 1e-8
        ok &= abs(c["lambda1"] - n / (n + 1) * c["k0"]) <= 1e-8 and c["gap"] <= 1e-8
    detail = "; ".join(f"n={n}: k0={c['k0']:.12g} lambda1={c['lambda1']:.12g} gap={c['gap']:.1e}"
                       for n, c in zip((1, 2), certs))
    acceptance(2, "lambda1 = n k0/(n+1) on S^3 and S^5", ok, detail)
    assert ok


def test_criterion_3_rigidity_constants(acceptance):
    s3 = model("sphere(1)")
    s5 = model("sphere(2)")
    dS = max(abs(PointGeometry(s3, p, order=2).curvature().S - 8.0)
             for p in sample_points(s3, 20, 3))
    dRic = 0.0
    for p in sample_points(s5, 20, 3):
        geo = PointGeometry(s5, p, order=2)
        Ric = geo.curvature().Ric[: geo.h, : geo.h]
        dRic = max(dRic, float(np.max(np.abs(Ric - 6.0 * np.eye(geo.h)))))
    ok = dS <= 1e-10 and dRic <= 1e-10
    acceptance(3, "S = 8 on S^3 and Ric = 6g on S^5", ok, f"|S-8|={dS:.1e}, |Ric-6g|={dRic:.1e}")
    assert ok


def test_criterion_4_unconditional_identities(acceptance):
    bad = []
    worst = 0.0
    for label in ALL_MODELS:
        rep = run_suite(model(label), ("pointwise",), seed=0, points=100, ids=UNCONDITIONAL)
        for c in rep.checks:
            if c["status"] != "pass" or c["tolerance"] > 1e-8 or c["points"] != 100:
                bad.append(f"{label}:{c['id']}={c['status']}")
            elif c["residual"] is not None:
                worst = max(worst, c["residual"])
        assert {c["id"] for c in rep.checks} == set(UNCONDITIONAL)
    ok = not bad
    acceptance(4, "unconditional identities on six models at 100 points", ok,
               f"worst residual {worst:.1e}" + (f"; {', '.join(bad)}" if bad else ""))
    assert ok, bad


def test_criterion_5_extremal_chain(acceptance):
    required = {
        1: ["e:hessian", "eq7", "ntor1", "e:vhessianc", "e:riem-eigen-fn", "xii1", "clasob",
            "n11", "n12", "n13", "e:xi2f-3D"],
        2: ["e:hessian", "eq7", "ntor1", "e:vhessianc", "e:riem-eigen-fn", "xii1", "clasob",
            "eqc01", "e:norms-dfA-vs-Adf"],
    }
    bad, worst, counted = [], 0.0, 0
    for n in (1, 2):
        rep = run_suite(model(f"sphere({n})"), ("extremal",), seed=0, points=100)
        for c in rep.checks:
            if c["status"] == "fail":
                bad.append(f"n={n}:{c['id']}")
            if c["status"] == "pass" and c["tolerance"] == 1e-9:
                worst = max(worst, c["residual"])
                counted += 1
            # only the dimension guards may skip on a sphere
            allowed = {1: "n>=2", 2: "n=1"}[n]
            if c["status"] == "skipped" and allowed not in REGISTRY[c["id"]].guards:
                bad.append(f"n={n} skipped {c['id']}: {c['note']}")
        for cid in required[n]:
            if rep.status_of(cid) != "pass":
                bad.append(f"n={n}:{cid} not passed")
    ok = not bad
    acceptance(5, "extremal chain for f = x1 on S^3 and S^5 at 100 points", ok,
               f"{counted} extremal passes, worst residual {worst:.1e}"
               + (f"; {', '.join(bad)}" if bad else ""))
    assert ok, bad


def test_criterion_6_paneitz(acceptance):
    notes, ok = [], True
    for n in (1, 2):
        for N in range(1, 5):
            sm = assemble(model(f"sphere({n})"), "paneitz", N)
            good = sm.symmetry_error <= 1e-9 and sm.eigenvalues[0] >= -1e-9
            ok &= good
            if N == 4:
                notes.append(f"n={n} N=4 sym={sm.symmetry_error:.1e} min={sm.eigenvalues[0]:.1e}")
    ids = {1: ["gr2", "gr3/integral"], 2: ["gr2", "gr3/integral", "l:GrLee/integral"]}
    for n, want in ids.items():
        rep = run_suite(model(f"sphere({n})"), ("integral",), seed=0, ids=want)
        for c in rep.checks:
            ok &= c["status"] == "pass" and c["tolerance"] <= 1e-8
            notes.append(f"n={n} {c['id']}={c['residual']:.1e}")
    acceptance(6, "Paneitz matrix PSD and the integral identities", ok, "; ".join(notes))
    assert ok


def test_criterion_7_torsion_models(acceptance):
    ok, notes = True, []
    for c in (1, 2, 3):
        rep = torsion_model_suite(build_model(group3d(c, c)), seed=0, points=10)
        ok &= rep.summary["A_norm"] <= 1e-12 and rep.summary["sasakian"]
        notes.append(f"({c},{c}) |A|={rep.summary['A_norm']:.1e}")
    g21 = model("group3d(2,1)")
    rep = torsion_model_suite(g21, seed=0, points=100)
    norms = [torsion_norm(g21, seed=s) for s in range(10)]
    spread = max(norms) - min(norms)
    ok &= rep.summary["A_norm"] > 1e-3 and spread <= 1e-10
    ok &= rep.summary["parallel_torsion"] and rep.summary["divergence_free"]
    ok &= not rep.summary["sasakian"]
    for cid in ("currr", "currrr", "torsion/constant-norm", "vcurv1"):
        ok &= rep.status_of(cid) == "pass"
    notes.append(f"(2,1) |A|={rep.summary['A_norm']:.6g} spread={spread:.1e}")
    acceptance(7, "Sasakian and parallel-torsion group models", ok, "; ".join(notes))
    assert ok


def test_criterion_8_fit_oracle(acceptance):
    s3 = model("sphere(1)")
    galerkin = assemble(s3, "sublaplacian", 3).eigenvalues
    fitted = np.sort(fit_oracle(s3, "sublaplacian", 3, seed=0).eigenvalues)
    diff = float(np.max(np.abs(galerkin - fitted))) if len(galerkin) == len(fitted) else np.inf
    ok = diff <= 1e-8
    acceptance(8, "Galerkin spectrum matches the pointwise fit oracle on the degree 3 slice",
               ok, f"{len(galerkin)} eigenvalues, max difference {diff:.1e}")
    assert ok


def test_criterion_9_determinism(acceptance, tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    codes = [main(["verify", "--model", "sphere", "--n", "1", "--suite", "all", "--seed", "42",
                   "--out", str(p)]) for p in paths]
    capsys.readouterr()
    same = paths[0].read_bytes() == paths[1].read_bytes()
    ok = same and codes == [0, 0]
    with capsys.disabled():
        acceptance(9, "byte-identical reports for verify --suite all --seed 42", ok,
                   f"exit codes {codes}, {len(paths[0].read_bytes())} bytes")
    assert ok

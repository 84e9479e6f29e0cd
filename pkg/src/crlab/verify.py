"""Run the identity catalog on a model and collect a deterministic report."""

from __future__ import annotations

import json
import os
import platform
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .calculus import ScalarField
from .connection import PointGeometry
from .defaults import DEFAULTS
from .identities import (COLLAPSE, REGISTRY, IdentityCheck, IntegralContext, PointContext,
                         SpectralContext)
from .models import Model, build_model, sample_points
from .polynomial import Polynomial

SUITES = ("pointwise", "ricci", "extremal", "3d", "integral", "spectral", "torsion")

# every label of the source document: check ids, or the reason it is not a check
PAPER_TAGS: dict[str, tuple[str, ...] | str] = {
    "clasob": ("clasob",),
    "conj1": "conjecture, no computable content",
    "main2": "global rigidity theorem; its local consequences are the extremal checks",
    "condm": ("condm", "main1"),
    "main11": "global rigidity theorem; its hypothesis is checked as e:hessian",
    "e:hessian": ("e:hessian",),
    "conven": "notational convention",
    "comp": ("comp",),
    "torha": ("torha",),
    "lap": ("lap",),
    "eig": ("eig",),
    "tortrace": ("tortrace",),
    "currrr": ("currrr",),
    "currr": ("currr",),
    "torric": ("torric",),
    "rho": ("rho",),
    "div": ("div",),
    "rid": ("rid",),
    "e:ricci identities": tuple(f"e:ricci-identities/{k}" for k in range(1, 7)),
    "xi1": ("xi1",),
    "div1": ("div1",),
    "l:hessian in extremal case": ("eq7",),
    "eq7": ("eq7",),
    "eq14": ("eq14",),
    "l:D3f bis": ("e:D3f-extremal-bis",),
    "e:D3f extremal bis": ("e:D3f-extremal-bis",),
    "c:xi f": ("xii1", "xii4"),
    "xii1": ("xii1",),
    "xii4": ("xii4",),
    "remn=1": ("e:vertical-Bochner",),
    "e:vertical Bochner": ("e:vertical-Bochner",),
    "eqc1": ("eqc1",),
    "eqc02": ("eqc02",),
    "eqc01": ("eqc01",),
    "e:vhessian": ("e:vhessian",),
    "l:R1 part": ("e:norms-dfA-vs-Adf",),
    "e:norms dfA vs Adf": ("e:norms-dfA-vs-Adf",),
    "e:eqc1": ("e:eqc1",),
    "e:currrr": ("e:currrr",),
    "e:currrr1": ("e:currrr1",),
    "e:R1 part 1": ("e:R1-part-1",),
    "l:D3f": ("e:D3f-extremal",),
    "e:D3f extremal": ("e:D3f-extremal",),
    "l:xi2f": ("e:xi2f",),
    "e:xi2f": ("e:xi2f",),
    "l:ntor1": ("ntor1", "ntor2", "ntor3"),
    "ntor1": ("ntor1",),
    "ntor2": ("ntor2",),
    "ntor3": ("ntor3",),
    "c:riem-eigen-fn": ("e:riem-eigen-fn", "e:riem-eigen-fn/spectral"),
    "e:riem extension": ("obsa", "clasob"),
    "e:riem-eigen-fn": ("e:riem-eigen-fn",),
    "lcbi": ("lcbi",),
    "obsa": ("obsa",),
    "l:ntor01": ("tordf",),
    "tordf": ("tordf",),
    "ntor4": ("ntor4",),
    "ntor7": ("ntor7",),
    "ntor8": ("ntor8",),
    "ntor9": ("ntor9",),
    "ntor10": ("ntor10",),
    "t:A vansihes if div": "global theorem; its chain ends in tordf",
    "s:3d case": "section label",
    "l:riem-eqn in 3D": ("e:riem-eqn-in-3D",),
    "e:riem-eqn in 3D": ("e:riem-eqn-in-3D",),
    "e:riem extension2": ("e:riem-eqn-in-3D",),
    "e:xi2f 3D": ("e:xi2f-3D",),
    "ss:3D": "section label",
    "t:A vansihes if div 3D": ("rigidity-constants",),
    "n11": ("n11",),
    "n12": ("n12",),
    "n13": ("n13",),
    "n=11xi": ("n=11xi",),
    "xi2": ("xi2",),
    "xi3": ("xi3",),
    "xi4": ("xi4",),
    "xi5": ("xi5",),
    "n=11x": ("n=11x",),
    "n=12x": ("n=12x",),
    "xi6": ("xi6",),
    "e:vhessianc": ("e:vhessianc",),
    "hes3": ("hes3",),
    "hes31": ("hes31",),
    "hes32": ("hes32",),
    "hes33": ("hes33",),
    "hes34": ("hes34",),
    "wh": ("wh",),
    "t:A vansihes if vert": ("vcurv1",),
    "vcurv2": ("vcurv2",),
    "vcurv1": ("vcurv1",),
    "d:BPC def": ("e:Bdef", "e:B0def", "e:Pdef", "e:Cdef"),
    "e:Bdef": ("e:Bdef",),
    "e:B0def": ("e:B0def",),
    "e:Pdef": ("e:Pdef",),
    "e:Cdef": ("e:Cdef", "e:Cdef/parts"),
    "r:non-negative paneitz": "remark on quaternionic contact geometry",
    "l:GrLee": ("l:GrLee", "l:GrLee/integral"),
    "e:Ricci for P": ("e:Ricci-for-P",),
    "e:divB": ("e:divB",),
    "e:divtrB": ("e:divtrB",),
    "bohh": ("bohh",),
    "boh1": ("boh1",),
    "par": ("par",),
    "boh3": ("boh3",),
    "gr2": ("gr2",),
    "2": ("gr2",),
    "vert1": ("vert1",),
    "vert2": ("vert2",),
    "gr3": ("gr3", "gr3/integral"),
    "main1": ("main1",),
    "condm-app": ("main1",),
    "e:nonnegativeP": ("e:nonnegativeP", "paneitz-psd"),
    "bohin": ("bohin",),
    "e:bohin": ("e:bohin",),
    "e:Afrom2lemmas": ("e:Afrom2lemmas",),
    "e:bohin1": ("e:bohin1",),
    "coshy3": ("coshy3",),
    "equality hessian": ("equality-hessian",),
    "e:obata ineq": ("e:obata-ineq",),
}

# sign conventions that fix the orientation of omega; (xi1) holds with these
ORIENTATION = {
    "omega": "omega(X,Y) = g(JX,Y)",
    "omega_trace": "g(nabla^2 f, omega) = nabla^2 f(e_a, J e_a) = -2n df(xi)",
    "laplacian": "Delta f = -nabla^2 f(e_a, e_a)",
}

# checks that are not tied to a single label
AUXILIARY = ("frame", "curv-sym", "rigidity-constants", "spectrum/lambda-pq",
             "spectrum/fit-oracle", "torsion/parallel", "torsion/constant-norm")


class VerifyError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    pointwise: float = DEFAULTS.tol_pointwise
    extremal: float = DEFAULTS.tol_extremal
    integral: float = DEFAULTS.tol_integral
    spectral: float = DEFAULTS.tol_spectral
    structure: float = DEFAULTS.tol_structure

    @classmethod
    def uniform(cls, tol: float) -> "Tolerances":
        return cls(tol, tol, tol, tol, tol)

    def of(self, check: IdentityCheck) -> float:
        return getattr(self, check.tol)


# -- report --------------------------------------------------------------------------


def toolchain() -> dict:
    import scipy

    from . import __version__

    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "crlab": __version__}


@dataclass
class Report:
    model: dict
    seed: int
    suite: list[str]
    checks: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def failures(self) -> list[dict]:
        return [c for c in self.checks if c["status"] == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def status_of(self, check_id: str) -> str:
        for c in self.checks:
            if c["id"] == check_id:
                return c["status"]
        raise KeyError(check_id)

    def entry(self, check_id: str) -> dict:
        for c in self.checks:
            if c["id"] == check_id:
                return c
        raise KeyError(check_id)

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            out[c["status"]] += 1
        return out

    def to_dict(self) -> dict:
        return {"model": self.model, "seed": self.seed, "suite": list(self.suite),
                "checks": self.checks, "summary": {"counts": self.counts(), **self.summary},
                "toolchain": toolchain()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def write(self, path: str) -> None:
        atomic_write(path, self.to_json())


def atomic_write(path: str, text: str) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".crlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x: float) -> float | str:
    if x is None:
        return None
    if not np.isfinite(x):
        return "inf" if x > 0 else "nan"
    return float(x)


# -- guards --------------------------------------------------------------------------


def torsion_norm(model: Model, seed: int = 0, count: int = 5) -> float:
    """Largest ``|A|`` over a few sample points (one suffices on the groups)."""
    pts = sample_points(model, 1 if model.is_group else count, seed)
    worst = 0.0
    for p in pts:
        geo = PointGeometry(model, p, order=2)
        worst = max(worst, float(np.linalg.norm(geo.alg.value(geo.A))))
    return worst


def _guard_failures(check: IdentityCheck, model: Model, facts: dict) -> list[str]:
    out = []
    for gname in check.guards:
        if gname == "sphere" and not model.is_sphere:
            out.append("needs a sphere model")
        elif gname == "group" and not model.is_group:
            out.append("needs a group3d or heisenberg model")
        elif gname == "extremal" and not model.is_sphere:
            out.append("no extremal eigenfunction on this model")
        elif gname == "A=0" and facts["torsion_norm"] > DEFAULTS.tol_structure:
            out.append("needs vanishing torsion")
        elif gname == "n>=2" and model.n < 2:
            out.append("needs n >= 2")
        elif gname == "n=1" and model.n != 1:
            out.append("needs dimension three")
    return out


# -- selection -----------------------------------------------------------------------


def select_checks(suites=("all",), ids=None) -> list[IdentityCheck]:
    suites = tuple(suites)
    for s in suites:
        if s != "all" and s not in SUITES:
            raise VerifyError(f"unknown suite {s!r}; choose from all, {', '.join(SUITES)}")
    if ids is not None:
        unknown = [i for i in ids if i not in REGISTRY]
        if unknown:
            raise VerifyError(f"unknown check id(s): {', '.join(unknown)}")
        return [REGISTRY[i] for i in ids]
    if "all" in suites:
        return list(REGISTRY.values())
    return [c for c in REGISTRY.values() if _in_suites(c, suites)]


def _in_suites(c: IdentityCheck, suites) -> bool:
    # "pointwise" means every check evaluated at sample points
    if "pointwise" in suites and c.source in ("random", "extremal", "geometry") \
            and c.suites != ("torsion",):
        return True
    return bool(set(c.suites) & set(suites))


# -- pointwise evaluation ------------------------------------------------------------


def default_extremal(model: Model) -> Polynomial:
    return Polynomial.variable(model.nvars, 0)


def _point_residuals(model: Model, ids: list[str], seed: int, indices, npoints: int,
                     extremal: Polynomial | None) -> dict[str, tuple[float, str]]:
    pts = sample_points(model, npoints, seed)
    out: dict[str, tuple[float, str]] = {}
    for i in indices:
        p = pts[i]
        geo = PointGeometry(model, p)
        order = geo.alg.order
        f = ScalarField.random(model, np.random.default_rng([seed, i]), base=p)
        ejet = None
        if extremal is not None:
            ejet = ScalarField.polynomial(model, extremal).jet_at(geo.point, order)
        ctx = PointContext(geo, f.jet_at(geo.point, order), ejet, f.poly)
        for cid in ids:
            try:
                r = float(REGISTRY[cid].fn(ctx))
                note = ""
            except Exception as exc:  # a crashing check is a failed check
                r, note = float("inf"), f"error: {type(exc).__name__}: {exc}"
            if not np.isfinite(r) or cid not in out or r > out[cid][0]:
                if cid in out and not np.isfinite(out[cid][0]):
                    continue
                out[cid] = (r, note)
    return out


def _worker(args):
    spec, jet_order, ids, seed, indices, npoints, extremal = args
    model = build_model(spec, jet_order=jet_order, check_points=1)
    return _point_residuals(model, ids, seed, indices, npoints, extremal)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(DEFAULTS.workers_env, "1")))
    except ValueError:
        return 1


def _merge(parts: list[dict]) -> dict:
    out: dict[str, tuple[float, str]] = {}
    for part in parts:
        for cid, (r, note) in part.items():
            if cid not in out:
                out[cid] = (r, note)
                continue
            cur = out[cid][0]
            if not np.isfinite(cur):
                continue
            if not np.isfinite(r) or r > cur:
                out[cid] = (r, note)
    return out


def _pointwise(model, ids, seed, npoints, extremal):
    if not ids:
        return {}
    w = min(_workers(), npoints)
    if w <= 1:
        return _point_residuals(model, ids, seed, range(npoints), npoints, extremal)
    chunks = [list(range(npoints))[k::w] for k in range(w)]
    args = [(model.spec, model.jet_order, ids, seed, ch, npoints, extremal) for ch in chunks]
    with ProcessPoolExecutor(max_workers=w) as ex:
        parts = list(ex.map(_worker, args))
    return _merge(parts)


# -- the suite runner ----------------------------------------------------------------


def run_suite(model: Model, suites=("all",), seed: int = DEFAULTS.seed,
              tolerances: Tolerances | None = None, points: int | None = None,
              ids=None, extremal: Polynomial | None = None,
              spectral_degree: int | None = None) -> Report:
    """Execute the selected checks; guarded checks whose hypotheses fail are skipped."""
    tol = tolerances or Tolerances()
    npoints = DEFAULTS.points if points is None else int(points)
    if npoints < 1:
        raise VerifyError("points must be >= 1")
    checks = select_checks(suites, ids)
    facts = {"torsion_norm": torsion_norm(model, seed)}
    if extremal is None and model.is_sphere:
        extremal = default_extremal(model)

    runnable, skipped = [], {}
    for c in checks:
        why = _guard_failures(c, model, facts)
        if why:
            skipped[c.id] = "; ".join(why)
        else:
            runnable.append(c)

    point_ids = [c.id for c in runnable if c.source in ("random", "extremal", "geometry")]
    results = _pointwise(model, point_ids, seed, npoints, extremal)
    used = {cid: npoints for cid in point_ids}

    integral = [c for c in runnable if c.source == "integral"]
    if integral:
        ic = IntegralContext(model, seed, DEFAULTS.integral_fields, DEFAULTS.integral_field_degree)
        for c in integral:
            results[c.id] = _safe(c.fn, ic)
            used[c.id] = len(ic.cub.weights)
    spectral = [c for c in runnable if c.source == "spectral"]
    if spectral:
        N = spectral_degree or DEFAULTS.spectral_degree
        sc = SpectralContext(model, N, seed)
        for c in spectral:
            results[c.id] = _safe(c.fn, sc)
            used[c.id] = 0

    report = Report(model.spec.to_json(), seed, list(suites))
    for c in checks:
        entry = {"id": c.id, "paper_anchor": c.anchor, "status": "skipped", "residual": None,
                 "tolerance": tol.of(c), "points": 0, "note": c.note}
        if c.id in skipped:
            entry["note"] = skipped[c.id]
        else:
            r, err = results[c.id]
            entry["residual"] = _num(r)
            entry["points"] = used[c.id]
            entry["status"] = "pass" if (np.isfinite(r) and r <= tol.of(c)) else "fail"
            if err:
                entry["note"] = err
        report.checks.append(entry)
    report.summary = {"torsion_norm": _num(facts["torsion_norm"]), "points": npoints,
                      "orientation": ORIENTATION}
    return report


def _safe(fn, ctx) -> tuple[float, str]:
    try:
        return float(fn(ctx)), ""
    except Exception as exc:
        return float("inf"), f"error: {type(exc).__name__}: {exc}"


# -- certificates and diagnostics ----------------------------------------------------


def k0_estimate(model: Model, seed: int = 0, directions: int | None = None) -> dict:
    """Minimise ``Ric(X,X) + 4A(X,JX)`` over sampled unit horizontal vectors."""
    total = DEFAULTS.k0_directions if directions is None else directions
    npts = 10
    per = max(1, total // npts)
    rng = np.random.default_rng([seed, 7])
    sampled, exact = np.inf, np.inf
    for p in sample_points(model, npts, seed):
        geo = PointGeometry(model, p, order=2)
        ctx = PointContext(geo)
        Q = ctx.k0_matrix
        X = rng.standard_normal((per, geo.h))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        sampled = min(sampled, float(np.min(np.einsum("ki,ij,kj->k", X, Q, X))))
        exact = min(exact, float(np.linalg.eigvalsh(Q)[0]))
    return {"k0": sampled, "k0_eigen": exact, "directions": per * npts}


def lichnerowicz_certificate(model: Model, N: int | None = None, seed: int = 0) -> dict:
    """Compare ``lambda_1`` with ``n k_0/(n+1)``; on spheres equality is required."""
    from .spectral import assemble, first_eigenvalue

    N = DEFAULTS.spectral_degree if N is None else N
    if not model.compact:
        return {"model": model.spec.label, "status": "skipped",
                "note": "non-compact model: no discrete spectrum"}
    if N < 2:
        raise VerifyError("the certificate needs N >= 2")
    k = k0_estimate(model, seed)
    lam, fns = first_eigenvalue(assemble(model, "sublaplacian", N))
    n = model.n
    bound = n / (n + 1) * k["k0"]
    gap = lam - bound
    out = {"model": model.spec.label, "N": N, "k0": k["k0"], "k0_eigen": k["k0_eigen"],
           "directions": k["directions"], "lambda1": lam, "multiplicity": len(fns),
           "bound": bound, "gap": abs(gap), "violation": max(0.0, -gap)}
    ok = out["violation"] <= DEFAULTS.tol_pointwise
    if model.is_sphere:
        ok = ok and out["gap"] <= DEFAULTS.tol_pointwise
    out["status"] = "pass" if ok else "fail"
    return out


def extremal_diagnostics(model: Model, f: ScalarField | Polynomial, seed: int = 0,
                         points: int | None = None, tolerances: Tolerances | None = None) -> Report:
    """Extremal-chain checks for a first eigenfunction; refuses other functions."""
    from .operators import sublaplacian_poly

    if not model.is_sphere:
        raise VerifyError("extremal diagnostics need a sphere model")
    poly = f.poly if isinstance(f, ScalarField) else f
    lam = 2 * model.n
    defect = sublaplacian_poly(poly, model.n) - poly * lam
    scale = max([1.0] + [abs(float(c)) for c in poly.terms.values()])
    if any(abs(float(c)) > DEFAULTS.tol_extremal * scale for c in defect.terms.values()):
        raise VerifyError("f is not an eigenfunction for the first eigenvalue 2n")
    return run_suite(model, ("extremal",), seed, tolerances, points, extremal=poly)


def torsion_model_suite(model: Model, seed: int = 0, points: int = 1,
                        tolerances: Tolerances | None = None) -> Report:
    """Parallel torsion, Codazzi equivalence and the structural summary of a group model."""
    if not model.is_group:
        raise VerifyError("the torsion suite runs on group models")
    ids = ["torha", "tortrace", "currr", "currrr", "torric", "div", "condm"]
    ids += [c.id for c in REGISTRY.values() if "torsion" in c.suites]
    report = run_suite(model, ("torsion",), seed, tolerances, points, ids=ids)
    geo = PointGeometry(model, sample_points(model, 1, seed)[0], order=3)
    ctx = PointContext(geo)
    h = geo.h
    normA = float(np.linalg.norm(ctx.A))
    ric = np.linalg.eigvalsh(0.5 * (ctx.Ric[:h, :h] + ctx.Ric[:h, :h].T))
    report.summary.update({
        "A_norm": normA,
        "scalar_curvature": ctx.S,
        "ricci_eigenvalues": [float(v) for v in ric],
        "k0": float(np.linalg.eigvalsh(ctx.k0_matrix)[0]),
        "sasakian": normA <= DEFAULTS.tol_structure,
        "parallel_torsion": report.status_of("torsion/parallel") == "pass",
        "divergence_free": report.status_of("vcurv2") == "pass",
    })
    return report


def coverage() -> dict:
    """Which labels map to checks and which are declared out of scope."""
    mapped = {k: v for k, v in PAPER_TAGS.items() if not isinstance(v, str)}
    return {"checks": mapped, "out_of_scope": {k: v for k, v in PAPER_TAGS.items()
                                                if isinstance(v, str)}}


__all__ = [
    "COLLAPSE", "PAPER_TAGS", "REGISTRY", "Report", "SUITES", "Tolerances", "VerifyError",
    "coverage", "extremal_diagnostics", "k0_estimate", "lichnerowicz_certificate", "run_suite",
    "select_checks", "torsion_model_suite", "torsion_norm",
]

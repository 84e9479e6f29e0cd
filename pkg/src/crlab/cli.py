"""Command line: ``crlab models | verify | spectrum``.

Exit codes: 0 success, 1 at least one failed check, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields
from fractions import Fraction

from .defaults import DEFAULTS
from .models import KINDS, ModelError, ModelSpec, build_model
from .spectral import SpectralError, assemble, canonical_operator, first_eigenvalue
from .verify import (SUITES, Tolerances, VerifyError, atomic_write, lichnerowicz_certificate,
                     run_suite)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

MODEL_TABLE = [
    {"kind": "heisenberg", "parameters": "n >= 1", "dimension": "2n+1", "compact": False,
     "quadrature": False, "spectra": False},
    {"kind": "sphere", "parameters": "n >= 1", "dimension": "2n+1", "compact": True,
     "quadrature": True, "spectra": True},
    {"kind": "group3d", "parameters": "c1, c2 rational", "dimension": "3", "compact": False,
     "quadrature": False, "spectra": False},
]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on; unknown keys in a config file are rejected."""

    command: str = "verify"
    model: str | None = None
    n: int = 1
    c1: str = "0"
    c2: str = "0"
    jet_order: int = DEFAULTS.jet_order
    suite: list[str] = field(default_factory=lambda: ["all"])
    seed: int = DEFAULTS.seed
    points: int = DEFAULTS.points
    tol: float | None = None
    degree: int = DEFAULTS.spectral_degree
    operator: str = "sublaplacian"
    out: str | None = None
    format: str | None = None

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)} - {"command"}

    def spec(self) -> ModelSpec:
        if self.model is None:
            raise ConfigError("--model is required")
        if self.model not in KINDS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(KINDS)}")
        try:
            c1, c2 = Fraction(self.c1), Fraction(self.c2)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ConfigError("--c1/--c2 must be rational numbers such as 2 or 1/2") from None
        if self.model == "group3d":
            return ModelSpec("group3d", 1, c1, c2)
        return ModelSpec(self.model, self.n)


def _suites(values) -> list[str]:
    out = []
    for v in values:
        out += [s.strip() for s in str(v).split(",") if s.strip()]
    return out or ["all"]


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - RunConfig.keys())
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return data


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("models", help="list the model families")
    m.add_argument("--json", action="store_true", help="machine readable output")

    def common(sp):
        sp.add_argument("--config", help="JSON file with run settings; flags override it")
        sp.add_argument("--model", choices=KINDS)
        sp.add_argument("--n", type=int)
        sp.add_argument("--c1")
        sp.add_argument("--c2")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output file (written atomically)")
        sp.add_argument("--format", choices=("json", "csv"))

    v = sub.add_parser("verify", help="run the identity suites")
    common(v)
    v.add_argument("--suite", action="append",
                   help=f"all or any of {', '.join(SUITES)} (repeat or comma separate)")
    v.add_argument("--points", type=int)
    v.add_argument("--tol", type=float, help="one tolerance for every check class")
    v.add_argument("--degree", type=int, help="Galerkin degree for the spectral suite")

    s = sub.add_parser("spectrum", help="Galerkin spectrum on a sphere")
    common(s)
    s.add_argument("--degree", type=int)
    s.add_argument("--operator")
    return p


def resolve(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        for k, v in load_config(args.config).items():
            setattr(cfg, k, v)
    for k in RunConfig.keys():
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    cfg.suite = _suites(cfg.suite if isinstance(cfg.suite, list) else [cfg.suite])
    if cfg.format not in (None, "json", "csv"):
        raise ConfigError("format must be json or csv")
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def cmd_models(args) -> int:
    if args.json:
        sys.stdout.write(json.dumps(MODEL_TABLE, indent=2) + "\n")
        return EXIT_OK
    cols = ("kind", "parameters", "dimension", "compact", "quadrature", "spectra")
    rows = [[str(r[c]) for c in cols] for r in MODEL_TABLE]
    width = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
    line = "  ".join(c.ljust(w) for c, w in zip(cols, width))
    sys.stdout.write(line.rstrip() + "\n")
    for r in rows:
        sys.stdout.write("  ".join(x.ljust(w) for x, w in zip(r, width)).rstrip() + "\n")
    return EXIT_OK


def _checks_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "status", "residual", "tolerance", "points", "note"])
    for c in report.checks:
        w.writerow([c["id"], c["status"], c["residual"], c["tolerance"], c["points"], c["note"]])
    return buf.getvalue()


def cmd_verify(cfg: RunConfig) -> int:
    model = build_model(cfg.spec(), jet_order=cfg.jet_order)
    tol = Tolerances.uniform(cfg.tol) if cfg.tol is not None else Tolerances()
    report = run_suite(model, cfg.suite, cfg.seed, tol, cfg.points, spectral_degree=cfg.degree)
    fmt = cfg.format or "json"
    if cfg.out:
        if fmt == "json":
            report.write(cfg.out)
        else:
            _emit(_checks_csv(report), cfg.out)
        counts = report.counts()
        sys.stdout.write(f"{model.spec.label}: {counts['pass']} pass, {counts['fail']} fail, "
                         f"{counts['skipped']} skipped -> {cfg.out}\n")
        for c in report.failures:
            sys.stdout.write(f"  FAIL {c['id']} residual={c['residual']} tol={c['tolerance']}\n")
    else:
        _emit(report.to_json() if fmt == "json" else _checks_csv(report), None)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_spectrum(cfg: RunConfig) -> int:
    model = build_model(cfg.spec(), jet_order=cfg.jet_order)
    if not model.is_sphere:
        raise ConfigError("spectra are computed on sphere models only")
    if not 1 <= cfg.degree <= DEFAULTS.max_degree:
        raise ConfigError(f"--degree must lie in 1..{DEFAULTS.max_degree}")
    op = canonical_operator(cfg.operator)
    sm = assemble(model, op, cfg.degree)
    clusters = sm.clusters()
    lam, fns = first_eigenvalue(sm)
    cert = (lichnerowicz_certificate(model, max(cfg.degree, 2), cfg.seed)
            if op == "sublaplacian" else None)
    fmt = cfg.format or "csv"
    if fmt == "json":
        doc = {"model": model.spec.to_json(), "operator": op, "N": cfg.degree,
               "eigenvalues": clusters, "lambda1": {"value": lam, "multiplicity": len(fns)},
               "min_eigenvalue": float(sm.eigenvalues[0]),
               "symmetry_error": sm.symmetry_error, "certificate": cert}
        text = json.dumps(doc, indent=2, default=list) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["operator", "N", "value", "multiplicity", "bidegrees"])
        for c in clusters:
            bd = " ".join(f"({p},{q})" for p, q in c["bidegrees"])
            value = 0.0 if abs(c["value"]) < 1e-12 else c["value"]
            w.writerow([op, cfg.degree, f"{value:.12g}", c["multiplicity"], bd])
        buf.write(f"# lambda1 = {lam:.12g} multiplicity {len(fns)}; "
                  f"min eigenvalue {float(sm.eigenvalues[0]):.3e}\n")
        if cert is not None:
            buf.write(f"# certificate: k0 = {cert['k0']:.12g}, bound n k0/(n+1) = "
                      f"{cert['bound']:.12g}, gap = {cert['gap']:.3e}, {cert['status']}\n")
        text = buf.getvalue()
    _emit(text, cfg.out)
    if cert is not None and cert["status"] == "fail":
        return EXIT_FAIL
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    if args.command == "models":
        return cmd_models(args)
    try:
        cfg = resolve(args)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        return cmd_spectrum(cfg)
    except (ConfigError, ModelError, VerifyError, SpectralError) as exc:
        sys.stderr.write(f"crlab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

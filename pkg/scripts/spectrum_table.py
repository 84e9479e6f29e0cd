#!/usr/bin/env python3
"""Galerkin spectra next to the bigraded closed form and the pointwise fit oracle."""

import argparse

import numpy as np

from crlab import assemble, build_model, sphere
from crlab.spectral import fit_oracle, predicted_spectrum


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--operator", default="sublaplacian")
    args = ap.parse_args()
    model = build_model(sphere(args.n))
    sm = assemble(model, args.operator, args.degree)
    predicted = dict(predicted_spectrum(args.operator, args.n, args.degree))
    print(f"{'value':>12}{'mult':>6}{'formula':>9}  bidegrees")
    ok = True
    for c in sm.clusters():
        key = round(c["value"])
        want = predicted.get(key, 0)
        ok &= abs(c["value"] - key) < 1e-8 and want == c["multiplicity"]
        bd = " ".join(f"({p},{q})" for p, q in c["bidegrees"])
        print(f"{c['value']:>12.8f}{c['multiplicity']:>6}{want:>9}  {bd}")
    if sm.operator != "paneitz_C":
        fit = np.sort(fit_oracle(model, args.operator, args.degree).eigenvalues)
        diff = float(np.max(np.abs(fit - sm.eigenvalues)))
        ok &= diff <= 1e-8
        print(f"fit oracle: max difference {diff:.2e}")
    print(f"symmetry error {sm.symmetry_error:.2e}, min eigenvalue {sm.eigenvalues[0]:.2e}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())

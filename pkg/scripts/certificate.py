#!/usr/bin/env python3
"""Lichnerowicz bound lambda_1 >= n k_0/(n+1) on spheres, with the torsion-model summaries."""

import argparse

from crlab import build_model, group3d, lichnerowicz_certificate, sphere, torsion_model_suite


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=3)
    args = ap.parse_args()
    ok = True
    for n in (1, 2):
        c = lichnerowicz_certificate(build_model(sphere(n)), args.degree)
        ok &= c["status"] == "pass"
        print(f"{c['model']}: k0={c['k0']:.12g} lambda1={c['lambda1']:.12g} "
              f"bound={c['bound']:.12g} gap={c['gap']:.1e} {c['status']}")
    for c1, c2 in ((2, 2), (2, 1), (3, 1)):
        s = torsion_model_suite(build_model(group3d(c1, c2))).summary
        print(f"group3d({c1},{c2}): |A|={s['A_norm']:.6g} S={s['scalar_curvature']:.6g} "
              f"k0={s['k0']:.6g} sasakian={s['sasakian']} parallel={s['parallel_torsion']} "
              f"div-free={s['divergence_free']}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())

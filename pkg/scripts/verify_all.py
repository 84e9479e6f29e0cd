#!/usr/bin/env python3
"""Run the full catalog on the six reference models and write one report per model."""

import argparse
import os
import time

from crlab import build_model, group3d, heisenberg, run_suite, sphere

MODELS = [heisenberg(1), heisenberg(2), sphere(1), sphere(2), group3d(2, 1), group3d(2, 2)]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", default="reports")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    ok = True
    print(f"{'model':<16}{'pass':>6}{'fail':>6}{'skip':>6}{'seconds':>10}")
    for spec in MODELS:
        t0 = time.perf_counter()
        rep = run_suite(build_model(spec), ("all",), seed=args.seed, points=args.points)
        name = spec.label.replace("(", "_").replace(")", "").replace(",", "_")
        rep.write(os.path.join(args.out, f"{name}.json"))
        c = rep.counts()
        print(f"{spec.label:<16}{c['pass']:>6}{c['fail']:>6}{c['skipped']:>6}"
              f"{time.perf_counter() - t0:>10.1f}")
        for f in rep.failures:
            print(f"    FAIL {f['id']}: residual {f['residual']} > {f['tolerance']}")
        ok &= rep.ok
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())

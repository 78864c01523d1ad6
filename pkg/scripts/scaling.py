#!/usr/bin/env python3
"""Time FSPN-Infer on random models of increasing size and fit a log-log slope.

    python3 scripts/scaling.py --sizes 100 300 1000 3000 10000 --out scaling.csv
"""
import argparse
import csv

from fspn.evalharness import scaling_benchmark


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 1000, 3000, 10_000])
    ap.add_argument("--events", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="scaling.csv")
    args = ap.parse_args(argv)

    res = scaling_benchmark(args.sizes, events_per_size=args.events, seed=args.seed)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n_nodes", "median_seconds"])
        for n, t in res.rows():
            w.writerow([n, f"{t:.6g}"])
            print(f"{n:>7d} nodes  {t * 1e3:9.3f} ms")
    print(f"slope {res.slope:.3f}  R^2 {res.r2:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Learn an FSPN on the NLTCS benchmark and report the average test log-likelihood.

Expects ``nltcs.ts.data``, ``nltcs.valid.data`` and ``nltcs.test.data`` (the usual
comma-separated binary files) in --dir.

    python3 scripts/nltcs.py --dir /data/nltcs --save nltcs.fspn.json
"""
import argparse
import time

from fspn.data_io import load_benchmark
from fspn.inference import log_likelihood
from fspn.learning import LearnConfig, learn_fspn
from fspn.model import save, stats


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dir", required=True)
    ap.add_argument("--name", default="nltcs")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--save")
    args = ap.parse_args(argv)

    train, valid, test = load_benchmark(args.dir, args.name)
    t0 = time.perf_counter()
    model = learn_fspn(train, LearnConfig(seed=args.seed))
    learn_s = time.perf_counter() - t0
    if args.save:
        save(model, args.save)
    s = stats(model)
    print(f"learned {s.n_nodes} nodes in {learn_s:.1f}s")
    for label, part in (("valid", valid), ("test", test)):
        print(f"{label} avg log-likelihood {log_likelihood(model, part)[1]:.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

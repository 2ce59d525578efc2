"""Accuracy and code sparsity against gamma on a synthetic set."""

import argparse

from sscl.data import gen_synthetic
from sscl.harness import dumps_sweep_csv, sweep
from sscl.trainer import Hyperparams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", default="two-gauss", choices=("two-gauss", "xor-ring"))
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--sep", type=float, default=4.0)
    ap.add_argument("--data-seed", type=int, default=42)
    ap.add_argument("--values", default="0.01,0.1,1,10")
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    data = gen_synthetic(args.kind, args.n, args.d, args.data_seed, args.sep)
    values = [float(v) for v in args.values.split(",")]
    points = sweep(data, "sscl", Hyperparams(), "gamma", values, args.folds, args.seed, args.jobs)
    text = dumps_sweep_csv(points)
    if args.out == "-":
        print(text, end="")
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()

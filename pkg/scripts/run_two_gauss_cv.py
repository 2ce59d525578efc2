"""Paired 10-fold comparison of SSCL and the baselines on the two-gauss set."""

import argparse
import time

from sscl.data import gen_synthetic
from sscl.harness import kfold_split, run_cv
from sscl.trainer import Hyperparams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--sep", type=float, default=4.0)
    ap.add_argument("--data-seed", type=int, default=42)
    ap.add_argument("--seed", type=int, default=42, help="fold seed")
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    data = gen_synthetic("two-gauss", args.n, args.d, args.data_seed, args.sep)
    h = Hyperparams(alpha=args.alpha, beta=args.beta, gamma=args.gamma, k=args.k)
    assignment = kfold_split(data.n, args.folds, args.seed)
    print(f"{'method':<10}{'mean':>8}{'std':>8}{'seconds':>10}")
    for method in ("sscl", "knn", "srbc", "majority"):
        t0 = time.perf_counter()
        r = run_cv(data, method, h, jobs=args.jobs, assignment=assignment)
        print(f"{method:<10}{r.mean:>8.4f}{r.std:>8.4f}{time.perf_counter() - t0:>10.1f}")


if __name__ == "__main__":
    main()

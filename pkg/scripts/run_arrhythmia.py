"""10-fold one-vs-rest run on the UCI arrhythmia file.

Without the real file, ``--stand-in`` writes a random file of the same shape
(452 x 279, labels 1..16 in the last column, a few '?' cells) so the
pipeline and its wall-clock cost can still be checked. Accuracies on the
stand-in mean nothing.
"""

import argparse
import os
import tempfile
import time

import numpy as np

from sscl.data import load_arrhythmia
from sscl.harness import kfold_split, run_cv
from sscl.trainer import Hyperparams

# class sizes of the real file, classes 11-13 are empty
COUNTS = {1: 245, 2: 44, 3: 15, 4: 15, 5: 13, 6: 25, 7: 3, 8: 2, 9: 9, 10: 50, 14: 4, 15: 5, 16: 22}


def write_stand_in(path, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.repeat(list(COUNTS), list(COUNTS.values()))
    rng.shuffle(labels)
    centers = rng.normal(scale=0.5, size=(17, 279))
    X = centers[labels] + rng.normal(size=(labels.size, 279))
    cells = X.astype(object)
    cells[rng.random(X.shape) < 0.003] = "?"
    with open(path, "w") as fh:
        for row, y in zip(cells, labels):
            fh.write(",".join(v if v == "?" else f"{v:.6g}" for v in row) + f",{y}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data", default=os.environ.get("SSCL_ARRHYTHMIA", "data/arrhythmia.data"))
    ap.add_argument("--stand-in", action="store_true", help="use a random file of the same shape")
    ap.add_argument("--methods", default="sscl,majority,knn,srbc")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    path = args.data
    if args.stand_in:
        path = os.path.join(tempfile.mkdtemp(), "stand_in.data")
        write_stand_in(path)
    data = load_arrhythmia(path)
    print(f"n={data.n} d={data.d} classes={len(data.class_names)} missing={0 if data.missing is None else int(data.missing.sum())}")
    h = Hyperparams()
    assignment = kfold_split(data.n, 10, args.seed)
    for method in args.methods.split(","):
        t0 = time.perf_counter()
        r = run_cv(data, method, h, jobs=args.jobs, assignment=assignment)
        print(f"{method:<10} mean {r.mean:.4f} std {r.std:.4f} failed folds {len(r.failed)} "
              f"{time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()

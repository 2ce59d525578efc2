"""k-fold cross validation, baseline comparison and hyperparameter sweeps.

Everything fitted from data (imputation means, standardizer, context index,
classifiers) sees only the training rows of a fold.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from sscl._io import atomic_write_text, fmt
from sscl.data import Dataset, apply_standardizer, fit_standardizer, impute_from
from sscl.predict import knn_predict_many, predict_many, srbc_predict_many
from sscl.trainer import ConfigError, Hyperparams, train_ovr

log = logging.getLogger(__name__)

__all__ = [
    "CVResult",
    "SweepPoint",
    "METHODS",
    "kfold_split",
    "fold_datasets",
    "fit_fold",
    "run_cv",
    "sweep",
    "dumps_cv_csv",
    "parse_cv_csv",
    "dumps_sweep_csv",
    "parse_sweep_csv",
]

SWEEP_PARAMS = ("alpha", "beta", "gamma", "k")


def kfold_split(n: int, folds: int, seed: int) -> np.ndarray:
    """Fold id of every point: seeded shuffle, then contiguous near-equal chunks."""
    if not 2 <= folds <= n:
        raise ValueError(f"folds must be in [2, n={n}], got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    assign = np.empty(n, dtype=np.int64)
    for f, chunk in enumerate(np.array_split(perm, folds)):
        assign[chunk] = f
    return assign


def fold_datasets(data: Dataset, assignment: np.ndarray, fold: int) -> tuple[Dataset, Dataset]:
    """Training and held-out splits, imputed from the training rows only."""
    test = assignment == fold
    return tuple(impute_from(data.subset(~test), data.subset(test)))


def _standardized(train: Dataset, test: Dataset):
    s = fit_standardizer(train)
    return apply_standardizer(s, train), s.transform(test.features)


def _sscl(train, test, h):
    model = train_ovr(train, h)
    labels, _ = predict_many(model, test.features)
    zeros = [b.codes.sparsity() for b in model.binaries if b is not None]
    return labels, {"sparsity": float(np.mean(zeros)), "model": model}


def _knn(train, test, h):
    tr, te = _standardized(train, test)
    return knn_predict_many(tr, te, h.k), {}


def _srbc(train, test, h):
    tr, te = _standardized(train, test)
    return srbc_predict_many(tr, te, h.beta, h.gamma), {}


def _majority(train, test, h):
    counts = np.bincount(train.labels, minlength=len(train.class_names))
    return np.full(test.n, int(np.argmax(counts)), dtype=np.int64), {}


# name -> fn(train, test, hyper) -> (predicted ids, info); train/test already imputed
METHODS = {"sscl": _sscl, "knn": _knn, "srbc": _srbc, "majority": _majority}


def fit_fold(data: Dataset, assignment, fold: int, h: Hyperparams):
    """Train the SSCL model of one fold (exposed for leakage checks)."""
    train, _ = fold_datasets(data, assignment, fold)
    return train_ovr(train, h)


@dataclass(eq=False)
class CVResult:
    method: str
    accuracies: np.ndarray
    confusions: list
    seconds: np.ndarray
    seed: int
    hyper: Hyperparams
    errors: dict = field(default_factory=dict)
    sparsity: np.ndarray | None = None

    @property
    def failed(self) -> list:
        return sorted(self.errors)

    @property
    def ok(self) -> np.ndarray:
        return np.array([f for f in range(len(self.accuracies)) if f not in self.errors], dtype=int)

    @property
    def mean(self) -> float:
        a = self.accuracies[self.ok]
        return float(a.mean()) if a.size else math.nan

    @property
    def std(self) -> float:
        a = self.accuracies[self.ok]
        return float(a.std(ddof=1)) if a.size > 1 else 0.0

    @property
    def mean_sparsity(self) -> float:
        if self.sparsity is None:
            return math.nan
        s = self.sparsity[self.ok]
        return float(s.mean()) if s.size else math.nan


def _run_fold(data, assignment, fold, method, h):
    fn = METHODS[method] if isinstance(method, str) else method
    t0 = time.perf_counter()
    train, test = fold_datasets(data, assignment, fold)
    try:
        pred, info = fn(train, test, h)
    except Exception as exc:  # recorded per fold; the run continues
        log.error("fold %d failed: %s", fold, exc)
        return fold, None, None, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}", math.nan
    C = len(data.class_names)
    conf = np.zeros((C, C), dtype=np.int64)
    np.add.at(conf, (test.labels, pred), 1)
    acc = float(np.trace(conf) / test.n)
    return fold, acc, conf, time.perf_counter() - t0, None, info.get("sparsity", math.nan)


def run_cv(data: Dataset, method, h: Hyperparams, folds: int = 10, seed: int = 42,
           jobs: int = 1, assignment=None) -> CVResult:
    """Cross-validated accuracy of ``method`` ("sscl", "knn", "srbc", "majority" or a
    callable with the same signature as the entries of ``METHODS``)."""
    h.validate()
    name = method if isinstance(method, str) else getattr(method, "__name__", "custom")
    if isinstance(method, str) and method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    if assignment is None:
        assignment = kfold_split(data.n, folds, seed)
    folds = int(assignment.max()) + 1
    args = [(data, assignment, f, method, h) for f in range(folds)]
    if jobs > 1 and isinstance(method, str):
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_run_fold, *zip(*args)))
    else:
        outs = [_run_fold(*a) for a in args]
    outs.sort(key=lambda o: o[0])
    acc = np.array([math.nan if o[1] is None else o[1] for o in outs])
    conf = [o[2] for o in outs]
    secs = np.array([o[3] for o in outs])
    errors = {o[0]: o[4] for o in outs if o[4] is not None}
    sparsity = np.array([o[5] for o in outs])
    return CVResult(name, acc, conf, secs, seed, h, errors,
                    sparsity if np.isfinite(sparsity).any() else None)


@dataclass(eq=False)
class SweepPoint:
    param: str
    value: float
    result: CVResult | None
    skipped: str = ""


def sweep(data: Dataset, method, base_h: Hyperparams, param: str, values, folds: int = 10,
          seed: int = 42, jobs: int = 1) -> list[SweepPoint]:
    """One CV run per value of ``param``, all on the same fold assignment.

    Values that break a hyperparameter rule (e.g. the convexity guard) are
    reported as skipped instead of aborting the sweep.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"param must be one of {SWEEP_PARAMS}, got {param!r}")
    values = list(values)
    if not values:
        raise ValueError("empty value list")
    assignment = kfold_split(data.n, folds, seed)
    points = []
    for v in values:
        v = int(v) if param == "k" else float(v)
        h = base_h.with_(**{param: v})
        try:
            h.validate()
        except ConfigError as exc:
            reason = "convexity guard" if "convexity" in str(exc) else str(exc)
            points.append(SweepPoint(param, v, None, f"skipped: {reason}"))
            continue
        points.append(SweepPoint(param, v, run_cv(data, method, h, folds, seed, jobs, assignment)))
    return points


def dumps_cv_csv(results, timings: bool = False, preamble: str = "") -> str:
    """``method,fold,accuracy,seconds``; seconds is left empty unless ``timings``
    (wall-clock would break byte-identical reruns). Failed folds have an empty accuracy."""
    lines = [preamble] if preamble else []
    lines.append("method,fold,accuracy,seconds")
    for r in results:
        for f, a in enumerate(r.accuracies):
            acc = "" if f in r.errors else fmt(a)
            sec = fmt(round(float(r.seconds[f]), 6)) if timings else ""
            lines.append(f"{r.method},{f},{acc},{sec}")
    return "\n".join(lines) + "\n"


def _rows(text):
    return list(csv.DictReader(line for line in text.splitlines() if not line.startswith("#")))


def parse_cv_csv(text: str) -> dict:
    """method -> per-fold accuracies (NaN for failed folds)."""
    out: dict = {}
    for row in _rows(text):
        acc = float(row["accuracy"]) if row["accuracy"] else math.nan
        out.setdefault(row["method"], []).append((int(row["fold"]), acc))
    return {m: np.array([a for _, a in sorted(v)]) for m, v in out.items()}


def dumps_sweep_csv(points, preamble: str = "") -> str:
    """``param,value,mean_acc,std_acc,skipped,mean_sparsity``."""
    lines = [preamble] if preamble else []
    lines.append("param,value,mean_acc,std_acc,skipped,mean_sparsity")
    for p in points:
        value = str(p.value) if p.param == "k" else fmt(p.value)
        if p.result is None:
            lines.append(f"{p.param},{value},,,{p.skipped},")
        else:
            r = p.result
            sp = "" if math.isnan(r.mean_sparsity) else fmt(r.mean_sparsity)
            lines.append(f"{p.param},{value},{fmt(r.mean)},{fmt(r.std)},,{sp}")
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> list[dict]:
    rows = []
    for row in _rows(text):
        num = lambda s: float(s) if s else math.nan  # noqa: E731
        rows.append({"param": row["param"], "value": float(row["value"]),
                     "mean_acc": num(row["mean_acc"]), "std_acc": num(row["std_acc"]),
                     "skipped": row["skipped"], "mean_sparsity": num(row["mean_sparsity"])})
    return rows


def write(path, text: str) -> None:
    atomic_write_text(path, text)

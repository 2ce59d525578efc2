"""Prediction for unseen points, and the KNN / SRBC baselines."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from sscl._io import atomic_write_text, fmt
from sscl.context import nearest, query_context, sq_distances
from sscl.data import MISSING, DataError, Dataset
from sscl.sparse import feature_sign_search, ridge_for, code_point
from sscl.trainer import UNTRAINED, Model

__all__ = [
    "Prediction",
    "predict",
    "predict_many",
    "knn_classify",
    "knn_predict_many",
    "srbc_classify",
    "srbc_predict_many",
    "read_points_csv",
    "predict_csv",
]


@dataclass(frozen=True, eq=False)
class Prediction:
    label: int
    scores: np.ndarray
    code: np.ndarray
    neighbor_ids: np.ndarray


def _decide(scores) -> int:
    # argmax returns the first maximum: ties go to the lowest class id
    return int(np.argmax(scores))


def predict(model: Model, x) -> Prediction:
    """Classify one raw (unstandardized) point.

    The point is standardized with the model's training statistics, coded
    over its k nearest training points with the label-free coding problem,
    and scored by every one-vs-rest classifier.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.standardizer.d,):
        raise ValueError(f"point has shape {x.shape}, model expects ({model.standardizer.d},)")
    if not np.isfinite(x).all():
        raise ValueError("point has non-finite entries")
    xs = model.standardizer.transform(x)
    h = model.hyper
    X, ids = query_context(model.train_features, xs, h.k)
    v = code_point(xs, X, h.beta, h.gamma)
    scores = model.weights @ (X @ v)
    scores[model.status == UNTRAINED] = -np.inf
    return Prediction(_decide(scores), scores, v, ids)


def predict_many(model: Model, X) -> tuple[np.ndarray, np.ndarray]:
    """Labels (m,) and scores (m, C) for the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    labels = np.empty(X.shape[0], dtype=np.int64)
    scores = np.empty((X.shape[0], len(model.class_names)))
    for i, x in enumerate(X):
        p = predict(model, x)
        labels[i] = p.label
        scores[i] = p.scores
    return labels, scores


def _check_query(train: Dataset, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (train.d,):
        raise ValueError(f"point has shape {x.shape}, expected ({train.d},)")
    return x


def knn_classify(train: Dataset, x, k: int) -> int:
    """Majority vote of the k nearest training points.

    Distance ties go to the lower training index, vote ties to the lower class id.
    """
    x = _check_query(train, x)
    if not 1 <= k <= train.n:
        raise ValueError(f"k must be in [1, {train.n}], got {k}")
    ids = nearest(sq_distances(train.features, x), k)
    votes = np.bincount(train.labels[ids], minlength=len(train.class_names))
    return int(np.argmax(votes))


def knn_predict_many(train: Dataset, X, k: int) -> np.ndarray:
    return np.array([knn_classify(train, x, k) for x in np.asarray(X, dtype=float)], dtype=np.int64)


class _SRBCDictionary:
    # Hessian of the coding problem over the whole training set, built once
    def __init__(self, train: Dataset, beta: float):
        self.D = train.features.T
        self.labels = train.labels
        self.C = len(train.class_names)
        self.beta = beta
        G = self.D.T @ self.D
        self.H = 2.0 * beta * G
        self.H[np.diag_indices_from(self.H)] += ridge_for(G, beta)

    def classify(self, x, gamma) -> int:
        v = feature_sign_search(self.H, -2.0 * self.beta * (self.D.T @ x), gamma)
        res = np.full(self.C, np.inf)
        for c in np.unique(self.labels):
            vc = np.where(self.labels == c, v, 0.0)
            res[c] = np.linalg.norm(x - self.D @ vc)
        return int(np.argmin(res))


def srbc_classify(train: Dataset, x, beta: float, gamma: float) -> int:
    """Sparse-representation classification.

    ``x`` is coded over all training points at once; the class whose
    coefficients alone reconstruct ``x`` best wins (ties to the lowest id).
    """
    if len(np.unique(train.labels)) < 2:
        raise ValueError("at least two classes required")
    return _SRBCDictionary(train, beta).classify(_check_query(train, x), gamma)


def srbc_predict_many(train: Dataset, X, beta: float, gamma: float) -> np.ndarray:
    if len(np.unique(train.labels)) < 2:
        raise ValueError("at least two classes required")
    dic = _SRBCDictionary(train, beta)
    return np.array([dic.classify(_check_query(train, x), gamma) for x in np.asarray(X, dtype=float)],
                    dtype=np.int64)


def read_points_csv(path, has_header=False, has_label=True, label_column=0):
    """Rows of a data CSV as (features with NaN for '?', label strings or None)."""
    labels, rows = [], []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = (row for row in csv.reader(fh) if not (row and row[0].startswith("#")))
        if has_header:
            next(reader, None)
        for lineno, row in enumerate(reader, start=1 + has_header):
            if not row or all(not c.strip() for c in row):
                continue
            cells = [c.strip() for c in row]
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise DataError(f"line {lineno}: expected {width} fields, got {len(cells)}")
            if has_label:
                labels.append(cells.pop(label_column))
            try:
                rows.append([np.nan if c == MISSING else float(c) for c in cells])
            except ValueError as exc:
                raise DataError(f"line {lineno}: {exc}") from None
    if not rows:
        raise DataError("no rows")
    return np.array(rows, dtype=float), (labels if has_label else None)


def predict_csv(model: Model, data_path, out_path, *, has_header=False, has_label=True,
                preamble: str = "") -> np.ndarray:
    """Batch prediction: ``index,true_label,predicted,score_0..score_{C-1}``.

    Missing cells are filled with the model's training column means.
    """
    X, truth = read_points_csv(data_path, has_header, has_label)
    if X.shape[1] != model.standardizer.d:
        raise DataError(f"data has {X.shape[1]} features, model expects {model.standardizer.d}")
    X = np.where(np.isnan(X), model.standardizer.means, X)
    labels, scores = predict_many(model, X)
    C = len(model.class_names)
    lines = [preamble] if preamble else []
    lines.append(",".join(["index", "true_label", "predicted"] + [f"score_{c}" for c in range(C)]))
    for i in range(X.shape[0]):
        t = truth[i] if truth is not None else ""
        lines.append(",".join([str(i), t, model.class_names[labels[i]]] + [fmt(s) for s in scores[i]]))
    atomic_write_text(out_path, "\n".join(lines) + "\n")
    return labels

"""Dataset container, CSV ingestion, imputation, standardization, synthetic data."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sscl._io import atomic_write_text, fmt

MISSING = "?"
ZERO_STD = 1e-12

__all__ = [
    "DataError",
    "Dataset",
    "Standardizer",
    "load_csv",
    "load_arrhythmia",
    "save_csv",
    "dumps_csv",
    "gen_synthetic",
    "impute_from",
    "fit_standardizer",
    "apply_standardizer",
]


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    """n labelled points.

    ``labels`` are dense ids into ``class_names``. ``missing`` marks cells that
    were absent in the source file (their values in ``features`` are imputed);
    it is ``None`` when nothing was missing.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    missing: np.ndarray | None = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
        if X.shape[0] and (y.min() < 0 or y.max() >= len(self.class_names)):
            raise DataError("label id outside class_names")
        if self.missing is not None and np.shape(self.missing) != X.shape:
            raise DataError("missing mask shape mismatch")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "class_names", tuple(str(c) for c in self.class_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        miss = None if self.missing is None else self.missing[idx]
        return Dataset(self.features[idx], self.labels[idx], self.class_names, miss)

    def with_features(self, features) -> "Dataset":
        return Dataset(features, self.labels, self.class_names, self.missing)


def _parse_rows(rows, label_column):
    names: dict[str, int] = {}
    labels, values = [], []
    width = None
    for lineno, row in rows:
        if not row or all(not cell.strip() for cell in row) or row[0].startswith("#"):
            continue
        if width is None:
            width = len(row)
            if width < 2:
                raise DataError(f"line {lineno}: need a label and at least one feature")
        elif len(row) != width:
            raise DataError(f"line {lineno}: expected {width} fields, got {len(row)}")
        cells = [c.strip() for c in row]
        lab = cells.pop(label_column)
        labels.append(names.setdefault(lab, len(names)))
        try:
            values.append([np.nan if c == MISSING else float(c) for c in cells])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
    if not labels:
        raise DataError("no rows")
    return np.array(values, dtype=float), np.array(labels), tuple(names)


def _read(source, has_header, label_column):
    reader = csv.reader(source)
    rows = ((i + 1, row) for i, row in enumerate(reader) if not (row and row[0].startswith("#")))
    if has_header:
        next(rows, None)
    X, y, names = _parse_rows(rows, label_column)
    mask = np.isnan(X)
    if mask.any():
        observed = (~mask).sum(axis=0)
        empty = np.flatnonzero(observed == 0)
        if empty.size:
            raise DataError(f"column(s) {empty.tolist()} have no observed values")
        means = np.nansum(X, axis=0) / observed
        X = np.where(mask, means, X)
    else:
        mask = None
    if not np.isfinite(X).all():
        raise DataError("non-finite feature value")
    return Dataset(X, y, names, mask)


def load_csv(path, has_header: bool = False, label_column: int = 0) -> Dataset:
    """Read a labelled CSV file.

    The label sits in ``label_column`` (0 by default); every other column is
    numeric or ``?``. Lines starting with ``#`` are comments. Missing cells are filled with the column mean of the
    observed entries and remembered in ``Dataset.missing`` so a CV fold can
    re-impute from its own training rows. Class ids follow first appearance.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return _read(fh, has_header, label_column)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def loads_csv(text: str, has_header: bool = False, label_column: int = 0) -> Dataset:
    return _read(io.StringIO(text), has_header, label_column)


def load_arrhythmia(path) -> Dataset:
    """The UCI ``arrhythmia.data`` file: no header, class label in the last column."""
    return load_csv(path, has_header=False, label_column=-1)


def dumps_csv(data: Dataset, header: bool = False, preamble: str = "") -> str:
    out = io.StringIO()
    if preamble:
        out.write(preamble + "\n")
    if header:
        out.write(",".join(["label"] + [f"f{j}" for j in range(data.d)]) + "\n")
    for i in range(data.n):
        cells = [data.class_names[data.labels[i]]]
        for j in range(data.d):
            if data.missing is not None and data.missing[i, j]:
                cells.append(MISSING)
            else:
                cells.append(fmt(data.features[i, j]))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def save_csv(data: Dataset, path, header: bool = False, preamble: str = "") -> None:
    atomic_write_text(path, dumps_csv(data, header, preamble))


def impute_from(train: Dataset, *others: Dataset) -> list[Dataset]:
    """Refill missing cells of ``train`` and ``others`` with training-row column means.

    A column with no observed training value falls back to 0.0.
    """
    if train.missing is None and all(o.missing is None for o in others):
        return [train, *others]
    obs = np.ones_like(train.features, dtype=bool) if train.missing is None else ~train.missing
    counts = obs.sum(axis=0)
    sums = np.where(obs, train.features, 0.0).sum(axis=0)
    means = np.divide(sums, counts, out=np.zeros(train.d), where=counts > 0)
    result = []
    for ds in (train, *others):
        if ds.d != train.d:
            raise DataError(f"dimension mismatch: {ds.d} != {train.d}")
        X = ds.features if ds.missing is None else np.where(ds.missing, means, ds.features)
        result.append(Dataset(X, ds.labels, ds.class_names, ds.missing))
    return result


@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stddevs: np.ndarray

    @property
    def d(self) -> int:
        return self.means.shape[0]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.d:
            raise DataError(f"dimension mismatch: {X.shape[-1]} != {self.d}")
        scale = np.where(self.stddevs < ZERO_STD, 1.0, self.stddevs)
        return (X - self.means) / scale


def fit_standardizer(train: Dataset) -> Standardizer:
    """Column means and population standard deviations of ``train``."""
    X = train.features
    mu = X.mean(axis=0)
    sd = np.sqrt(((X - mu) ** 2).mean(axis=0))
    return Standardizer(mu, sd)


def apply_standardizer(s: Standardizer, data: Dataset) -> Dataset:
    return data.with_features(s.transform(data.features))


def gen_synthetic(kind: str, n: int, d: int, seed: int, separation: float = 4.0) -> Dataset:
    """Seeded toy problems with classes "1" (id 0) and "-1" (id 1), rows ordered by class.

    two-gauss: n/2 unit-covariance Gaussian draws per class centred at
    +separation*e1 (class "1") and -separation*e1 (class "-1").

    xor-ring: four unit-covariance clusters on the circle of radius
    ``separation`` in the first two coordinates at 45, 135, 225 and 315
    degrees; opposite quadrants share a class. Needs d >= 2.
    """
    if n < 4 or n % 2:
        raise DataError(f"n must be even and >= 4, got {n}")
    if d < 1:
        raise DataError(f"d must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    half = n // 2
    if kind == "two-gauss":
        centres = np.zeros((n, d))
        centres[:half, 0] = separation
        centres[half:, 0] = -separation
    elif kind == "xor-ring":
        if d < 2:
            raise DataError("xor-ring needs d >= 2")
        r = separation / np.sqrt(2.0)
        # class "1": quadrants I and III, class "-1": II and IV
        signs = np.array([[1, 1], [-1, -1], [-1, 1], [1, -1]], dtype=float)
        quad = np.concatenate([np.arange(half) % 2, 2 + np.arange(n - half) % 2])
        centres = np.zeros((n, d))
        centres[:, :2] = r * signs[quad]
    else:
        raise DataError(f"unknown generator {kind!r}; expected 'two-gauss' or 'xor-ring'")
    X = centres + rng.standard_normal((n, d))
    y = np.repeat([0, 1], [half, n - half])
    return Dataset(X, y, ("1", "-1"))

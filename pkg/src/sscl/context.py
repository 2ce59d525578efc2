"""Exact k-nearest-neighbour contexts.

Distances are computed directly as sums of squared differences (no
``|a|^2 + |b|^2 - 2ab`` expansion) so exact ties stay exact and the
lowest-index tie rule holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ContextIndex", "build_index", "query_context", "sq_distances", "nearest"]


@dataclass(frozen=True, eq=False)
class ContextIndex:
    neighbor_ids: np.ndarray   # (n, k) int, distance-ascending
    context_mats: np.ndarray   # (n, d, k); column j of [i] is point neighbor_ids[i, j]

    @property
    def k(self) -> int:
        return self.neighbor_ids.shape[1]


def sq_distances(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    diff = points - x
    return np.einsum("ij,ij->i", diff, diff)


def nearest(dist: np.ndarray, k: int, exclude: int | None = None) -> np.ndarray:
    """Indices of the k smallest entries of ``dist``; ties go to the lower index."""
    order = np.argsort(dist, kind="stable")
    if exclude is not None:
        order = order[order != exclude]
    return order[:k]


def _check_k(k, limit):
    if not 1 <= k <= limit:
        raise ValueError(f"k must be in [1, {limit}], got {k}")


def build_index(train, k: int) -> ContextIndex:
    """Context of every training point: its k nearest *other* training points."""
    X = np.asarray(getattr(train, "features", train), dtype=float)
    n = X.shape[0]
    _check_k(k, n - 1)
    ids = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        ids[i] = nearest(sq_distances(X, X[i]), k, exclude=i)
    return ContextIndex(ids, contexts_from_ids(X, ids))


def contexts_from_ids(X: np.ndarray, ids: np.ndarray) -> np.ndarray:
    # (n, k, d) gather -> (n, d, k)
    return np.ascontiguousarray(X[ids].transpose(0, 2, 1))


def query_context(train, x, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k nearest training points to an unseen ``x``; returns (d x k matrix, ids)."""
    X = np.asarray(getattr(train, "features", train), dtype=float)
    x = np.asarray(x, dtype=float)
    if x.shape != (X.shape[1],):
        raise ValueError(f"query has shape {x.shape}, expected ({X.shape[1]},)")
    _check_k(k, X.shape[0])
    ids = nearest(sq_distances(X, x), k)
    return X[ids].T.copy(), ids

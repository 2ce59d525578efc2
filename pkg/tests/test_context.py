import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import knn_sort_oracle
from sscl.context import build_index, query_context, sq_distances


def test_ordered_line():
    idx = build_index(np.array([[0.0], [1.0], [2.0], [10.0]]), k=2)
    assert idx.neighbor_ids[0].tolist() == [1, 2]
    assert idx.neighbor_ids[3].tolist() == [2, 1]


def test_tie_goes_to_lower_index():
    idx = build_index(np.array([[0.0], [-1.0], [1.0]]), k=1)
    assert idx.neighbor_ids[0].tolist() == [1]


def test_matches_sort_oracle(rng):
    X = rng.normal(size=(30, 5))
    idx = build_index(X, k=6)
    for i in range(30):
        assert idx.neighbor_ids[i].tolist() == knn_sort_oracle(X, X[i], 6, exclude=i)
        for j, nb in enumerate(idx.neighbor_ids[i]):
            np.testing.assert_array_equal(idx.context_mats[i][:, j], X[nb])


@pytest.mark.parametrize("k", [0, 4])
def test_k_out_of_range(k):
    with pytest.raises(ValueError):
        build_index(np.zeros((4, 2)), k)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(3, 25), d=st.integers(1, 4), data=st.data())
def test_index_invariants(seed, n, d, data):
    k = data.draw(st.integers(1, n - 1))
    # a coarse grid makes exact ties common
    X = np.random.default_rng(seed).integers(-3, 4, size=(n, d)).astype(float)
    idx = build_index(X, k)
    for i in range(n):
        ids = idx.neighbor_ids[i]
        assert len(set(ids.tolist())) == k and i not in ids
        dist = sq_distances(X, X[i])
        chosen = dist[ids]
        assert np.all(np.diff(chosen) >= 0)
        rest = np.setdiff1d(np.arange(n), np.append(ids, i))
        if rest.size:
            assert chosen.max() <= dist[rest].min()
        assert ids.tolist() == knn_sort_oracle(X, X[i], k, exclude=i)


def test_query_identity():
    X = np.array([[0.0, 0.0], [3.0, 4.0], [1.0, 1.0]])
    M, ids = query_context(X, X[1], 1)
    assert ids.tolist() == [1]
    np.testing.assert_array_equal(M[:, 0], X[1])
    assert sq_distances(X, X[1])[ids[0]] == 0


def test_query_midpoint_tie():
    X = np.array([[5.0], [2.0], [0.0]])
    _, ids = query_context(X, np.array([1.0]), 2)
    assert ids.tolist() == [1, 2]
    _, ids = query_context(X, np.array([1.0]), 1)
    assert ids.tolist() == [1]


def test_query_matches_oracle(rng):
    X = rng.normal(size=(40, 3))
    for q in rng.normal(size=(10, 3)):
        _, ids = query_context(X, q, 5)
        assert ids.tolist() == knn_sort_oracle(X, q, 5)


def test_query_dimension_mismatch():
    with pytest.raises(ValueError):
        query_context(np.zeros((3, 2)), np.zeros(3), 1)

"""Independent reference computations used by the tests.

Nothing here imports the solvers under test.
"""

import itertools
import math

import numpy as np


def l1_enumeration_min(H, c, gamma):
    """Global min of 0.5 v'Hv + c'v + gamma|v|_1 by trying every sign pattern.

    For a fixed pattern s the objective is smooth on the orthant; its
    stationary point restricted to supp(s) is kept only if the signs agree.
    """
    k = len(c)
    best_v, best_f = np.zeros(k), 0.0
    for signs in itertools.product((-1, 0, 1), repeat=k):
        s = np.array(signs, dtype=float)
        A = np.flatnonzero(s)
        if A.size == 0:
            continue
        vA = np.linalg.solve(H[np.ix_(A, A)], -(c[A] + gamma * s[A]))
        if np.any(np.sign(vA) != s[A]):
            continue
        v = np.zeros(k)
        v[A] = vA
        f = 0.5 * v @ H @ v + c @ v + gamma * np.abs(v).sum()
        if f < best_f:
            best_v, best_f = v, f
    return best_v, best_f


def projected_gradient_box_qp(Q, upper, iters=1_000_000):
    """max -0.5 d'Qd + 1'd on [0, upper]^n by projected gradient, step 1/|Q|_2."""
    L = np.linalg.norm(Q, 2)
    d = np.zeros(Q.shape[0])
    if L == 0:
        return np.full(Q.shape[0], upper)
    step = 1.0 / L
    for _ in range(iters):
        d_new = np.clip(d + step * (1.0 - Q @ d), 0.0, upper)
        if np.array_equal(d_new, d):
            break
        d = d_new
    return d


def batched_projected_gradient(Qs, upper, iters=100_000):
    """Accelerated projected gradient (with gradient-based restart) on a batch.

    ``Qs`` is a list of square matrices of possibly different sizes; they are
    zero-padded and the padded coordinates are frozen at 0.
    """
    m = len(Qs)
    n = max(q.shape[0] for q in Qs)
    Q = np.zeros((m, n, n))
    mask = np.zeros((m, n))
    for i, q in enumerate(Qs):
        Q[i, : q.shape[0], : q.shape[0]] = q
        mask[i, : q.shape[0]] = 1.0
    L = np.array([max(np.linalg.norm(q, 2), 1e-300) for q in Qs])[:, None]
    x = np.zeros((m, n))
    yv = x.copy()
    t = np.ones((m, 1))
    for _ in range(iters):
        g = (1.0 - np.einsum("bij,bj->bi", Q, yv)) * mask
        x_new = np.clip(yv + g / L, 0.0, upper) * mask
        # restart momentum where the step went against the gradient
        restart = (np.einsum("bi,bi->b", g, x_new - x) < 0)[:, None]
        t_new = np.where(restart, 1.0, 0.5 * (1 + np.sqrt(1 + 4 * t * t)))
        yv = np.where(restart, x_new, x_new + ((t - 1) / t_new) * (x_new - x))
        if np.abs(x_new - x).max() < 1e-15:
            break
        x, t = x_new, t_new
    return [x[i, : q.shape[0]] for i, q in enumerate(Qs)]


def box_qp_value(Q, d):
    return float(-0.5 * d @ Q @ d + d.sum())


def knn_sort_oracle(X, x, k, exclude=None):
    """k nearest rows of X by sorting (distance, index) pairs in pure Python."""
    pairs = []
    for j, row in enumerate(X):
        if j == exclude:
            continue
        pairs.append((math.fsum((a - b) ** 2 for a, b in zip(row, x)), j))
    pairs.sort()
    return [j for _, j in pairs[:k]]


def primal_loop(X, y, contexts, V, delta, alpha, beta, gamma):
    """Primal objective written out with explicit loops."""
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    for i in range(n):
        w += delta[i] * y[i] * (contexts[i] @ V[:, i])
    total = 0.5 * float(w @ w)
    for i in range(n):
        z = contexts[i] @ V[:, i]
        total += alpha * max(0.0, 1.0 - y[i] * float(w @ z))
        total += beta * float(np.sum((X[i] - z) ** 2))
        total += gamma * float(np.sum(np.abs(V[:, i])))
    return total


def saddle_full(X, y, contexts, V, delta, beta, gamma):
    """Saddle objective with the double sum expanded term by term."""
    n = X.shape[0]
    Z = [contexts[i] @ V[:, i] for i in range(n)]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total -= 0.5 * delta[i] * delta[j] * y[i] * y[j] * float(Z[i] @ Z[j])
    for i in range(n):
        total += beta * float(np.sum((X[i] - Z[i]) ** 2)) + gamma * float(np.abs(V[:, i]).sum())
        total += delta[i]
    return total


def random_pd(rng, k, cond_floor=0.05):
    A = rng.standard_normal((k, k))
    return A @ A.T + cond_floor * np.eye(k)


def random_psd(rng, n):
    r = int(rng.integers(1, n + 1))
    G = rng.standard_normal((n, r))
    return G @ G.T

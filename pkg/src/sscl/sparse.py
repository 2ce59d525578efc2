"""Feature-sign search for L1-regularised quadratics.

Solves

    min_v  0.5 v'Hv + c'v + gamma |v|_1

for symmetric positive definite H. The active-set loop follows the usual
feature-sign scheme: activate the zero coordinate with the largest
gradient violation, solve the smooth problem restricted to the active set
with the guessed signs, then move towards that solution. The move uses an
exact minimisation of the true (piecewise quadratic, convex) objective
along the segment instead of evaluating only the zero-crossing points, so
every step is guaranteed not to increase the objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

RIDGE_SCALE = 1e-8

__all__ = [
    "SolverError",
    "NotPositiveDefiniteError",
    "L1QuadProblem",
    "SparseCodes",
    "feature_sign_search",
    "l1_objective",
    "optimality_residual",
    "ridge_for",
    "code_point",
    "coding_objective",
]


class SolverError(RuntimeError):
    """Iteration cap hit (or final residual too large); carries the best iterate."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NotPositiveDefiniteError(ValueError):
    def __init__(self, message, min_eigenvalue):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True, eq=False)
class L1QuadProblem:
    H: np.ndarray
    c: np.ndarray
    gamma: float

    def solve(self, v0=None, **kw) -> np.ndarray:
        return feature_sign_search(self.H, self.c, self.gamma, v0, **kw)

    def objective(self, v) -> float:
        return l1_objective(self.H, self.c, self.gamma, v)


@dataclass(frozen=True, eq=False)
class SparseCodes:
    """k x n coefficient matrix; column i reconstructs point i from its context."""

    V: np.ndarray

    def zero_fraction(self) -> np.ndarray:
        return (self.V == 0).mean(axis=0)

    def sparsity(self) -> float:
        return float((self.V == 0).mean())


def l1_objective(H, c, gamma, v) -> float:
    return float(0.5 * v @ (H @ v) + c @ v + gamma * np.abs(v).sum())


def optimality_residual(H, c, gamma, v) -> float:
    """Largest violation of the subgradient optimality conditions at ``v``."""
    g = H @ v + c
    nz = v != 0
    r = np.where(nz, np.abs(g + gamma * np.sign(v)), np.maximum(np.abs(g) - gamma, 0.0))
    return float(r.max()) if r.size else 0.0


def check_problem(H, c, gamma):
    if H.ndim != 2 or H.shape[0] != H.shape[1] or c.shape != (H.shape[0],):
        raise ValueError(f"shape mismatch: H {H.shape}, c {c.shape}")
    if gamma < 0 or not np.isfinite(gamma):
        raise ValueError(f"gamma must be finite and >= 0, got {gamma}")
    if not (np.isfinite(H).all() and np.isfinite(c).all()):
        raise ValueError("non-finite entry in H or c")
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    asym = float(np.abs(H - H.T).max(initial=0.0))
    if asym > 1e-9 * scale:
        raise ValueError(f"H is not symmetric (max asymmetry {asym:.3g})")
    try:
        np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        lam = float(np.linalg.eigvalsh(0.5 * (H + H.T))[0])
        raise NotPositiveDefiniteError(
            f"H is not positive definite (min eigenvalue {lam:.6g})", lam
        ) from None


def _segment_min(H, c, gamma, v, step):
    """argmin over t in [0, 1] of the true objective at v + t*step, plus breakpoints."""
    b = float(step @ (H @ step))
    if b <= 0.0:
        return 0.0, None
    a = float(step @ (H @ v + c))
    moving = step != 0
    bp = np.full(v.shape, np.inf)
    bp[moving] = -v[moving] / step[moving]
    knots = np.unique(bp[(bp > 0.0) & (bp < 1.0)])
    lo = 0.0
    for hi in (*knots, 1.0):
        s = np.sign(v + 0.5 * (lo + hi) * step)
        slope = a + gamma * float(s @ step)
        t = -slope / b
        if t <= hi:
            return max(t, lo), bp
        lo = hi
    return 1.0, bp


def feature_sign_search(H, c, gamma, v0=None, *, tol=1e-6, max_iter=None, history=None):
    """Minimise ``0.5 v'Hv + c'v + gamma*|v|_1`` by feature-sign search.

    Args:
        H: symmetric positive definite (k, k) matrix.
        c: (k,) linear term.
        gamma: L1 weight, >= 0.
        v0: optional warm start; its nonzeros seed the active set.
        tol: subgradient optimality tolerance.
        max_iter: cap on feature-sign steps, by default max(1000, 10*k).
        history: if a list, the objective after every step is appended.

    Returns:
        The minimiser as a (k,) array.

    Raises:
        NotPositiveDefiniteError: H fails a Cholesky factorisation.
        SolverError: the iteration cap is exceeded.
    """
    H = np.asarray(H, dtype=float)
    c = np.asarray(c, dtype=float)
    gamma = float(gamma)
    check_problem(H, c, gamma)
    k = c.shape[0]
    v = np.zeros(k) if v0 is None else np.array(v0, dtype=float, copy=True)
    if v.shape != (k,) or not np.isfinite(v).all():
        raise ValueError("warm start must be a finite vector of length k")
    f = l1_objective(H, c, gamma, v)
    if history is not None:
        history.append(f)
    if max_iter is None:
        # every step activates or drops a coordinate, so large dictionaries need more
        max_iter = max(1000, 10 * k)
    stalled = False
    for _ in range(max_iter):
        g = H @ v + c
        active = v != 0
        theta = np.sign(v)
        nz_viol = np.abs(g + gamma * theta)[active].max(initial=0.0)
        activated = -1
        if nz_viol <= tol or stalled:
            viol = np.where(active, -np.inf, np.abs(g) - gamma)
            j = int(np.argmax(viol))  # first index wins ties
            if viol[j] <= tol:
                return _finish(H, c, gamma, v, tol)
            theta[j] = -np.sign(g[j])
            active[j] = True
            activated = j
        A = np.flatnonzero(active)
        target = np.zeros(k)
        target[A] = np.linalg.solve(H[np.ix_(A, A)], -(c[A] + gamma * theta[A]))
        t, bp = _segment_min(H, c, gamma, v, target - v)
        if t == 1.0:
            cand = target
        else:
            cand = v + t * (target - v)
            if bp is not None:
                cand[bp == t] = 0.0
        f_new = l1_objective(H, c, gamma, cand)
        if f_new >= f and activated >= 0:
            # sign guess for the new coordinate did not pay off; fall back to an
            # exact single-coordinate (soft-threshold) move, which must descend
            cand = v.copy()
            gj = g[activated]
            cand[activated] = -(gj - np.sign(gj) * gamma) / H[activated, activated]
            f_new = l1_objective(H, c, gamma, cand)
        stalled = activated < 0 and f_new >= f
        if f_new <= f:
            v, f = cand, f_new
        if history is not None:
            history.append(f)
    raise SolverError(
        f"feature-sign search exceeded {max_iter} iterations",
        best=v,
        residual=optimality_residual(H, c, gamma, v),
    )


def _finish(H, c, gamma, v, tol):
    res = optimality_residual(H, c, gamma, v)
    # allow for round-off in badly scaled problems
    scale = float(np.abs(H).max(initial=0.0) * np.abs(v).max(initial=0.0) + np.abs(c).max(initial=0.0))
    if res > max(tol, 1e-9 * scale):
        raise SolverError(f"optimality residual {res:.3g} above tolerance", best=v, residual=res)
    return v


def ridge_for(gram: np.ndarray, beta: float) -> float:
    """Ridge added to every coding Hessian: 1e-8 * trace(2*beta*X'X) / k."""
    tr = 2.0 * beta * float(np.trace(gram))
    return RIDGE_SCALE * tr / gram.shape[0] if tr > 0 else RIDGE_SCALE


def coding_objective(x, X, beta, gamma, v) -> float:
    r = x - X @ v
    return float(beta * r @ r + gamma * np.abs(v).sum())


def code_point(x, X, beta: float, gamma: float, v0=None, **kw) -> np.ndarray:
    """Sparse code of ``x`` over the columns of ``X``.

    min_v beta*|x - Xv|^2 + gamma*|v|_1, i.e. H = 2*beta*X'X (+ ridge),
    c = -2*beta*X'x.
    """
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or x.shape != (X.shape[0],):
        raise ValueError(f"shape mismatch: x {x.shape}, X {X.shape}")
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    G = X.T @ X
    H = 2.0 * beta * G
    H[np.diag_indices_from(H)] += ridge_for(G, beta)
    return feature_sign_search(H, -2.0 * beta * (X.T @ x), gamma, v0, **kw)

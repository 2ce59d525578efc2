"""Box-constrained concave QP for the dual step.

    max_delta  -0.5 delta'Q delta + 1'delta   s.t.  0 <= delta <= upper

Q is PSD and there is no equality constraint (the classifier has no bias),
so cyclic exact coordinate ascent with clipping is monotone and converges
to the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

__all__ = ["BoxQP", "DualState", "solve_box_qp", "dual_objective", "kkt_violation", "label_gram"]

DEGENERATE_DIAG = 1e-12


@dataclass(frozen=True, eq=False)
class BoxQP:
    Q: np.ndarray
    upper: float

    def validate(self, psd=True, psd_tol=1e-8):
        Q = self.Q
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got {Q.shape}")
        if not np.isfinite(Q).all():
            raise ValueError("NaN or inf in Q")
        scale = max(1.0, float(np.abs(Q).max(initial=0.0)))
        if np.abs(Q - Q.T).max(initial=0.0) > 1e-9 * scale:
            raise ValueError("Q is not symmetric")
        if not self.upper > 0:
            raise ValueError(f"upper bound must be > 0, got {self.upper}")
        if not psd or not Q.size:
            return
        lam = np.linalg.eigvalsh(Q)[0]
        if lam < -psd_tol * scale:
            raise ValueError(f"Q is not PSD (min eigenvalue {lam:.3g})")


@dataclass(frozen=True, eq=False)
class DualState:
    delta: np.ndarray
    upper: float
    sweeps: int = 0
    kkt: float = 0.0

    @property
    def converged(self) -> bool:
        return self.kkt <= 1e-6

    @property
    def slack_multipliers(self) -> np.ndarray:
        # eps_i = upper - delta_i, the eliminated multipliers of xi_i >= 0
        return self.upper - self.delta


def label_gram(Z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Q_ij = y_i y_j z_i'z_j for reconstructions z_i (rows of Z)."""
    S = Z * y[:, None]
    Q = S @ S.T
    return 0.5 * (Q + Q.T)


def dual_objective(Q, delta) -> float:
    return float(-0.5 * delta @ (Q @ delta) + delta.sum())


def kkt_violation(Q, delta, upper) -> float:
    g = 1.0 - Q @ delta
    at_lo = delta <= 0.0
    at_hi = delta >= upper
    r = np.where(at_lo, np.maximum(g, 0.0), np.where(at_hi, np.maximum(-g, 0.0), np.abs(g)))
    return float(r.max(initial=0.0))


@numba.njit(cache=True)
def _sweeps(Q, delta, upper, tol, max_sweeps):
    n = delta.shape[0]
    grad = 1.0 - Q @ delta
    for sweep in range(1, max_sweeps + 1):
        for i in range(n):
            qii = Q[i, i]
            if qii <= DEGENERATE_DIAG:
                new = upper if grad[i] > 0.0 else 0.0
            else:
                new = delta[i] + grad[i] / qii
                if new < 0.0:
                    new = 0.0
                elif new > upper:
                    new = upper
            step = new - delta[i]
            if step != 0.0:
                delta[i] = new
                for j in range(n):
                    grad[j] -= Q[j, i] * step
        # exact gradient each sweep so drift cannot fake convergence
        grad = 1.0 - Q @ delta
        worst = 0.0
        for i in range(n):
            g = grad[i]
            if delta[i] <= 0.0:
                r = g if g > 0.0 else 0.0
            elif delta[i] >= upper:
                r = -g if g < 0.0 else 0.0
            else:
                r = abs(g)
            if r > worst:
                worst = r
        if worst <= tol:
            return sweep, worst
    return max_sweeps, worst


def solve_box_qp(p: BoxQP, delta0=None, *, tol=1e-6, max_sweeps=10_000, check_psd=True) -> DualState:
    """Cyclic coordinate ascent, coordinates 0..n-1 in order each sweep.

    Each update is delta_i <- clip(delta_i + (1 - (Q delta)_i) / Q_ii, 0, upper).
    A coordinate with Q_ii <= 1e-12 has a linear objective and goes to
    whichever bound its gradient favours.
    """
    Q = np.ascontiguousarray(p.Q, dtype=float)
    p.validate(psd=check_psd)
    n = Q.shape[0]
    delta = np.zeros(n) if delta0 is None else np.clip(np.asarray(delta0, dtype=float), 0.0, p.upper)
    delta = np.ascontiguousarray(delta)
    if delta.shape != (n,) or not np.isfinite(delta).all():
        raise ValueError("warm start must be a finite vector of length n")
    if n == 0:
        return DualState(delta, p.upper)
    sweeps, kkt = _sweeps(Q, delta, float(p.upper), float(tol), int(max_sweeps))
    if not np.isfinite(delta).all():
        raise ValueError("NaN encountered in coordinate ascent")
    return DualState(delta, float(p.upper), int(sweeps), float(kkt))

"""Alternating optimisation of sparse context codes and a max-margin classifier.

For fixed dual multipliers delta the codes v_i are updated one point at a
time (Gauss-Seidel, ascending i); the v_i-dependent part of the saddle
objective is

    0.5 v'[(2 beta - delta_i^2) X_i'X_i] v
        + (-2 beta X_i'x_i - delta_i y_i X_i'u_i)'v + gamma |v|_1,

with u_i = sum_{j != i} delta_j y_j X_j v_j. For fixed codes delta solves
the box QP over Q_ij = y_i y_j (X_i v_i)'(X_j v_j), and the classifier is
recovered as w = sum_i delta_i y_i X_i v_i.

The quadratic coefficient 2 beta - delta_i^2 is what makes alpha <= sqrt(2 beta)
necessary: delta_i can reach alpha, and past that the code subproblem is
concave.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from sscl.context import ContextIndex, build_index
from sscl.data import Dataset, Standardizer, apply_standardizer, fit_standardizer
from sscl.qp import BoxQP, DualState, dual_objective, label_gram, solve_box_qp
from sscl.sparse import L1QuadProblem, SolverError, SparseCodes, feature_sign_search, ridge_for

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ConvexityError",
    "Hyperparams",
    "TrainState",
    "BinaryModel",
    "Model",
    "TrainDiagnostics",
    "IterationAudit",
    "assemble_vstep",
    "compute_w",
    "reconstructions",
    "primal_objective",
    "saddle_objective",
    "train_binary",
    "train_ovr",
    "diagnostics",
]

OK, FLAGGED, UNTRAINED = 0, 1, 2


class ConfigError(ValueError):
    pass


class ConvexityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.1
    k: int = 10
    max_outer: int = 30
    tol: float = 1e-5

    def validate(self) -> "Hyperparams":
        for name in ("alpha", "beta", "gamma", "tol"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.max_outer < 1:
            raise ConfigError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        bound = math.sqrt(2.0 * self.beta)
        if self.alpha > bound * (1 + 1e-12):
            raise ConfigError(
                f"convexity guard violated: need alpha <= sqrt(2*beta) "
                f"(alpha={self.alpha:g}, sqrt(2*beta)={bound:.6g}); "
                "larger alpha makes the code subproblem non-convex"
            )
        return self

    def with_(self, **kw) -> "Hyperparams":
        return replace(self, **kw)


@dataclass(eq=False)
class TrainState:
    """Mutable working set of one binary training run."""

    features: np.ndarray        # (n, d)
    labels: np.ndarray          # (n,) in {-1, +1}
    contexts: np.ndarray        # (n, d, k)
    V: np.ndarray               # (k, n)
    delta: np.ndarray           # (n,)
    grams: np.ndarray = None    # (n, k, k) X_i'X_i
    proj: np.ndarray = None     # (n, k) X_i'x_i

    def __post_init__(self):
        if self.grams is None:
            self.grams = np.einsum("idk,idl->ikl", self.contexts, self.contexts)
        if self.proj is None:
            self.proj = np.einsum("idk,id->ik", self.contexts, self.features)

    @property
    def n(self):
        return self.features.shape[0]

    def Z(self) -> np.ndarray:
        return reconstructions(self.contexts, self.V)

    def w(self) -> np.ndarray:
        return compute_w(self.delta, self.labels, self.contexts, self.V)


@dataclass(frozen=True)
class IterationAudit:
    saddle_before_v: float
    saddle_after_v: float
    dual_before: float
    dual_after: float
    min_hessian_eig: float
    qp_sweeps: int
    qp_kkt: float


@dataclass(eq=False)
class BinaryModel:
    w: np.ndarray
    delta: DualState
    codes: SparseCodes
    hyper: Hyperparams
    objective_trace: list
    neighbor_ids: np.ndarray
    converged: bool = False
    audit: list = field(default_factory=list)
    best_iteration: int = 0
    diverged: bool = False


@dataclass(frozen=True, eq=False)
class TrainDiagnostics:
    slacks: np.ndarray
    recon_errors: np.ndarray
    sparsity: np.ndarray


@dataclass(eq=False)
class Model:
    """One-vs-rest bundle plus everything prediction needs.

    ``status[c]`` is 0 for a normal class, 1 when the class had fewer than two
    positive training points, 2 when it had none (no classifier; it never wins).
    """

    hyper: Hyperparams
    class_names: tuple
    weights: np.ndarray             # (C, d)
    status: np.ndarray              # (C,)
    standardizer: Standardizer
    train_features: np.ndarray      # standardized, (n, d)
    train_labels: np.ndarray        # (n,)
    binaries: list | None = None

    @property
    def flagged(self) -> list:
        return [self.class_names[c] for c in np.flatnonzero(self.status != OK)]


def reconstructions(contexts, V) -> np.ndarray:
    """Rows z_i = X_i v_i."""
    return np.einsum("idk,ki->id", contexts, V)


def compute_w(delta, labels, contexts, V) -> np.ndarray:
    """w = sum_i delta_i y_i X_i v_i; terms with delta_i == 0 are left out entirely."""
    delta = np.asarray(delta, dtype=float)
    sv = np.flatnonzero(delta != 0)
    if sv.size == 0:
        return np.zeros(contexts.shape[1])
    Z = np.einsum("idk,ki->id", contexts[sv], V[:, sv])
    return (delta[sv] * labels[sv]) @ Z


def _hinge(labels, Z, w):
    return np.maximum(0.0, 1.0 - labels * (Z @ w))


def primal_objective(state: TrainState, h: Hyperparams) -> float:
    """0.5|w|^2 + alpha sum xi + beta sum |x_i - X_i v_i|^2 + gamma sum |v_i|_1."""
    Z = state.Z()
    w = state.w()
    xi = _hinge(state.labels, Z, w)
    r = state.features - Z
    return float(
        0.5 * w @ w + h.alpha * xi.sum() + h.beta * np.einsum("ij,ij->", r, r)
        + h.gamma * np.abs(state.V).sum()
    )


def saddle_objective(state: TrainState, h: Hyperparams) -> float:
    """-0.5|w|^2 + beta sum |x_i - X_i v_i|^2 + gamma sum |v_i|_1 + sum delta_i."""
    Z = state.Z()
    w = state.w()
    r = state.features - Z
    return float(
        -0.5 * w @ w + h.beta * np.einsum("ij,ij->", r, r)
        + h.gamma * np.abs(state.V).sum() + state.delta.sum()
    )


def _vstep_terms(gram, proj, X_i, delta_i, y_i, u_i, h):
    coef = 2.0 * h.beta - delta_i * delta_i
    if coef < -1e-12 * 2.0 * h.beta:
        raise ConvexityError(
            f"code subproblem is non-convex: 2*beta - delta_i^2 = {coef:.3g} < 0 "
            "(alpha <= sqrt(2*beta) must hold)"
        )
    H = max(coef, 0.0) * gram
    H[np.diag_indices_from(H)] += ridge_for(gram, h.beta)
    c = -2.0 * h.beta * proj
    if delta_i != 0.0:
        c = c - (delta_i * y_i) * (X_i.T @ u_i)
    return H, c


def assemble_vstep(i: int, state: TrainState, h: Hyperparams) -> L1QuadProblem:
    """The L1 quadratic in v_i obtained by freezing delta and every other code."""
    X_i = state.contexts[i]
    d_i, y_i = float(state.delta[i]), float(state.labels[i])
    u_i = state.w() - d_i * y_i * (X_i @ state.V[:, i])
    H, c = _vstep_terms(state.grams[i].copy(), state.proj[i], X_i, d_i, y_i, u_i, h)
    return L1QuadProblem(H, c, h.gamma)


def _v_sweep(state: TrainState, h: Hyperparams, outer: int, eigs: list | None):
    Z = state.Z()
    w = compute_w(state.delta, state.labels, state.contexts, state.V)
    for i in range(state.n):
        X_i = state.contexts[i]
        d_i, y_i = float(state.delta[i]), float(state.labels[i])
        u = w - (d_i * y_i) * Z[i] if d_i != 0.0 else w
        H, c = _vstep_terms(state.grams[i].copy(), state.proj[i], X_i, d_i, y_i, u, h)
        if eigs is not None:
            eigs.append(float(np.linalg.eigvalsh(H)[0]))
        try:
            v = feature_sign_search(H, c, h.gamma, state.V[:, i])
        except (SolverError, ValueError) as exc:
            raise SolverError(f"code step failed at outer iteration {outer}, point {i}: {exc}",
                              getattr(exc, "best", None), getattr(exc, "residual", None)) from exc
        state.V[:, i] = v
        Z[i] = X_i @ v
        if d_i != 0.0:
            w = u + (d_i * y_i) * Z[i]
    return Z


def _init_codes(state: TrainState, h: Hyperparams):
    zero = np.zeros(state.contexts.shape[1])
    for i in range(state.n):
        H, c = _vstep_terms(state.grams[i].copy(), state.proj[i], state.contexts[i], 0.0, 0.0, zero, h)
        state.V[:, i] = feature_sign_search(H, c, h.gamma)


def _as_pm1(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=float)
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("binary labels must be +1/-1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("both classes required")
    return y


def train_binary(train, labels, h: Hyperparams, seed: int = 0, *,
                 index: ContextIndex | None = None, audit: bool = False) -> BinaryModel:
    """Train one +1/-1 classifier with jointly learned context codes.

    ``train`` is a Dataset or a feature matrix (assumed already
    standardized). ``seed`` is accepted for interface symmetry; the
    procedure itself uses no randomness. With ``audit=True`` every outer
    iteration records the saddle objective around the code sweep, the dual
    objective around the QP step and the smallest code-step Hessian
    eigenvalue.

    The returned model holds the iterate with the lowest primal objective.
    If the codes blow up (possible at alpha == sqrt(2*beta), where a code
    block loses all curvature but the ridge) the run stops early with
    ``diverged=True``.
    """
    h.validate()
    X = np.asarray(getattr(train, "features", train), dtype=float)
    y = _as_pm1(labels)
    if y.shape != (X.shape[0],):
        raise ValueError("labels do not match the number of training points")
    if index is None:
        index = build_index(X, h.k)
    n = X.shape[0]
    state = TrainState(X, y, index.context_mats, np.zeros((index.k, n)), np.zeros(n))
    _init_codes(state, h)
    trace = [primal_objective(state, h)]
    records = []
    converged = diverged = False
    dual = DualState(state.delta.copy(), h.alpha)
    best = (trace[0], 0, state.V.copy(), dual)
    for outer in range(1, h.max_outer + 1):
        eigs = [] if audit else None
        s_before = saddle_objective(state, h) if audit else math.nan
        try:
            Z = _v_sweep(state, h, outer, eigs)
        except SolverError as exc:
            # only the first sweep starts from bounded codes; later failures
            # mean the alternation itself has run off
            if outer == 1:
                raise
            log.warning("alternation diverged at outer iteration %d: %s", outer, exc)
            if audit:
                records.append(IterationAudit(s_before, math.nan, math.nan, math.nan,
                                              min(eigs) if eigs else math.nan, 0, math.nan))
            diverged = True
            break
        s_after = saddle_objective(state, h) if audit else math.nan

        # PSD by construction (Gram of label-signed reconstructions)
        Q = label_gram(Z, y)
        d_before = dual_objective(Q, state.delta)
        dual = solve_box_qp(BoxQP(Q, h.alpha), state.delta, check_psd=False)
        state.delta = dual.delta
        d_after = dual_objective(Q, state.delta)
        if audit:
            records.append(IterationAudit(s_before, s_after, d_before, d_after,
                                          min(eigs) if eigs else math.nan, dual.sweeps, dual.kkt))
        trace.append(primal_objective(state, h))
        if not math.isfinite(trace[-1]):
            log.warning("alternation diverged at outer iteration %d: primal objective %r", outer, trace[-1])
            diverged = True
            break
        if trace[-1] < best[0]:
            best = (trace[-1], outer, state.V.copy(), dual)
        change = abs(trace[-1] - trace[-2]) / max(abs(trace[-2]), 1e-300)
        log.debug("outer %d: primal %.10g (rel change %.3g), qp sweeps %d",
                  outer, trace[-1], change, dual.sweeps)
        if change < h.tol:
            converged = True
            break
    # The alternation can settle into a 2-cycle: with many multipliers at the
    # upper bound the joint code problem is unbounded even though every
    # per-point block is convex. Keep the iterate with the lowest primal value.
    _, it, V, dual = best
    w = compute_w(dual.delta, y, index.context_mats, V)
    return BinaryModel(w, dual, SparseCodes(V), h, trace, index.neighbor_ids, converged, records, it, diverged)


def diagnostics(model: BinaryModel, train, labels, index: ContextIndex | None = None) -> TrainDiagnostics:
    X = np.asarray(getattr(train, "features", train), dtype=float)
    y = np.asarray(labels, dtype=float)
    if index is None:
        index = build_index(X, model.hyper.k)
    Z = reconstructions(index.context_mats, model.codes.V)
    r = X - Z
    return TrainDiagnostics(_hinge(y, Z, model.w), np.einsum("ij,ij->i", r, r),
                            model.codes.zero_fraction())


def _mirror(m: BinaryModel) -> BinaryModel:
    # flipping every label leaves the codes and multipliers unchanged and negates w
    return BinaryModel(-m.w, m.delta, m.codes, m.hyper, list(m.objective_trace),
                       m.neighbor_ids, m.converged, list(m.audit), m.best_iteration, m.diverged)


def train_ovr(train: Dataset, h: Hyperparams, seed: int = 0) -> Model:
    """One-vs-rest wrapper: standardize, build the context index once, train per class.

    ``train`` must already be imputed. With exactly two classes the second
    classifier is the label-flipped mirror of the first, which the
    alternating procedure reproduces exactly, so it is not retrained.
    """
    h.validate()
    C = len(np.unique(train.labels))
    if C < 2:
        raise ValueError("at least two classes required")
    std = fit_standardizer(train)
    X = apply_standardizer(std, train).features
    index = build_index(X, h.k)
    names = train.class_names
    W = np.zeros((len(names), X.shape[1]))
    status = np.zeros(len(names), dtype=np.int64)
    binaries: list = [None] * len(names)
    present = np.unique(train.labels)
    for c in range(len(names)):
        pos = int((train.labels == c).sum())
        if pos == 0:
            status[c] = UNTRAINED
            continue
        if pos < 2:
            status[c] = FLAGGED
            log.warning("class %r has %d positive training point(s)", names[c], pos)
        if len(present) == 2 and c == present[1]:
            binaries[c] = _mirror(binaries[present[0]])
        else:
            y = np.where(train.labels == c, 1.0, -1.0)
            binaries[c] = train_binary(X, y, h, seed, index=index)
        W[c] = binaries[c].w
    return Model(h, names, W, status, std, X, train.labels.copy(), binaries)

"""Interchangeable rank-k subspace finders.

``exact`` is the truncated SVD. ``randomized_power`` is a Gaussian range
finder sharpened by ``q`` stabilized power iterations. ``column_subset`` builds
a column dictionary over several adaptive sampling rounds, drawing columns in
proportion to their squared residual norms, and truncates the projection of X
onto that dictionary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateError, InvalidInputError, InvalidRankError
from .linalg import SubspaceBasis, thin_svd, best_rank_k, orthonormal_columns

MODES = ("exact", "randomized_power", "column_subset")
MODE_ALIASES = {"rand": "randomized_power", "css": "column_subset"}


@dataclass(frozen=True)
class ProjectorSpec:
    mode: str = "exact"
    k: int = 1
    q: int = 2
    oversample: int = 5
    epsilon: float = 0.5
    seed: int | None = 0

    def __post_init__(self):
        mode = MODE_ALIASES.get(self.mode, self.mode)
        object.__setattr__(self, "mode", mode)
        if mode not in MODES:
            raise InvalidInputError(f"unknown projector mode {self.mode!r}")
        if self.k < 1:
            raise InvalidInputError("k must be at least 1")
        if self.q < 0 or self.oversample < 0:
            raise InvalidInputError("q and oversample must be nonnegative")
        if mode == "column_subset" and not self.epsilon > 0:
            raise InvalidInputError("epsilon must be positive for column subset selection")


def _lift(W: np.ndarray, X: np.ndarray, k: int):
    """Best rank-k approximation of ``X`` inside ``range(W)`` (W orthonormal)."""
    if W.shape[1] == 0:
        Ub, s, Vt = np.zeros((0, 0)), np.zeros(0), np.zeros((0, X.shape[1]))
    else:
        Ub, s, Vt = thin_svd(W.T @ X)
    r = min(k, s.size)
    U = W @ Ub[:, :r]
    V = Vt[:r].T
    if r < k:
        # dictionary poorer than k: pad with zero-weight orthonormal directions
        U = _complete(U, k)
        V = _complete(V, k)
        s = np.concatenate([s[:r], np.zeros(k - r)])
    return SubspaceBasis(U, V), (U[:, :k] * s[:k]) @ V[:, :k].T


def _complete(Q: np.ndarray, k: int) -> np.ndarray:
    """Extend orthonormal ``Q`` to ``k`` columns with arbitrary orthonormal directions."""
    E = np.eye(Q.shape[0])
    E -= Q @ (Q.T @ E)
    return np.hstack([Q, orthonormal_columns(E)[:, : k - Q.shape[1]]])


def randomized_range(X: np.ndarray, k: int, q: int, oversample: int, rng) -> np.ndarray:
    """Orthonormal basis W with ``range(W)`` approximating the top-k left singular space."""
    m, n = X.shape
    ell = min(k + oversample, m, n)
    W, _ = np.linalg.qr(X @ rng.standard_normal((n, ell)))
    for _ in range(q):
        Z, _ = np.linalg.qr(X.T @ W)
        W, _ = np.linalg.qr(X @ Z)
    return W


def column_subset_dictionary(X: np.ndarray, k: int, epsilon: float, rng) -> np.ndarray:
    """Orthonormal basis of adaptively sampled columns of X."""
    m, n = X.shape
    rounds = math.ceil(2 * (k + 1) * (math.log(k + 1) + 1))
    per_round = min(n, math.ceil(k / epsilon + k * k * math.log(k)))
    Q = np.zeros((m, 0))
    residual = X
    for _ in range(rounds):
        weights = np.sum(residual**2, axis=0)
        total = weights.sum()
        if total <= 1e-28 * max(1.0, float(np.sum(X**2))):
            break
        cols = np.unique(rng.choice(n, size=per_round, replace=True, p=weights / total))
        Q = orthonormal_columns(np.hstack([Q, X[:, cols]]))
        residual = X - Q @ (Q.T @ X)
    return Q


def project(spec: ProjectorSpec, X, rng=None) -> tuple[SubspaceBasis, np.ndarray]:
    """Rank-``spec.k`` basis and matrix approximating ``X``."""
    X = np.asarray(X, dtype=float)
    k = spec.k
    if k > min(X.shape):
        raise InvalidRankError(f"k={k} exceeds min{X.shape}")
    if spec.mode == "exact":
        return best_rank_k(X, k)
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    if spec.mode == "randomized_power":
        W = randomized_range(X, k, spec.q, spec.oversample, rng)
    else:
        W = column_subset_dictionary(X, k, spec.epsilon, rng)
    return _lift(W, X, k)


def measured_epsilon(spec: ProjectorSpec, X, rng=None) -> float:
    """``||X_hat - X||_F^2 / ||P_k(X) - X||_F^2 - 1`` for the engine's output."""
    X = np.asarray(X, dtype=float)
    _, best = best_rank_k(X, spec.k)
    denom = float(np.sum((best - X) ** 2))
    if denom <= 1e-24 * max(1.0, float(np.sum(X**2))):
        raise DegenerateError("X has rank <= k; the optimal residual is zero")
    if spec.mode == "exact":
        return 0.0
    _, approx = project(spec, X, rng=rng)
    return float(np.sum((approx - X) ** 2)) / denom - 1.0

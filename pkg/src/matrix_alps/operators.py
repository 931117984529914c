"""Linear measurement maps ``A: R^{m x n} -> R^p`` and their adjoints."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError


def fwht(x: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along the last axis.

    The length must be a power of two. Natural (Sylvester) ordering, so the
    result equals ``x @ scipy.linalg.hadamard(N)``.
    """
    x = np.array(x, dtype=float)
    N = x.shape[-1]
    if N & (N - 1):
        raise InvalidInputError(f"length {N} is not a power of two")
    lead = x.shape[:-1]
    h = 1
    while h < N:
        x = x.reshape(*lead, N // (2 * h), 2, h)
        a = x[..., 0, :]
        b = x[..., 1, :]
        x = np.stack((a + b, a - b), axis=-2)
        h *= 2
    return x.reshape(*lead, N)


def _next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


class LinearOperator:
    """Base class; concrete maps implement ``_apply`` and ``_adjoint``."""

    kind = "abstract"

    def __init__(self, m: int, n: int, p: int):
        if m < 1 or n < 1:
            raise InvalidInputError("signal dimensions must be positive")
        if not 1 <= p <= m * n:
            raise InvalidInputError(f"measurement count p={p} outside [1, {m * n}]")
        self.m, self.n, self.p = int(m), int(n), int(p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape != (self.m, self.n):
            raise InvalidInputError(f"expected a {self.m}x{self.n} matrix, got {X.shape}")
        return self._apply(X)

    def adjoint(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.p,):
            raise InvalidInputError(f"expected a vector of length {self.p}, got {v.shape}")
        return self._adjoint(v)

    __call__ = apply

    def descriptor(self) -> dict:
        return {"kind": self.kind, "m": self.m, "n": self.n, "p": self.p}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    def _apply(self, X):
        raise NotImplementedError

    def _adjoint(self, v):
        raise NotImplementedError


class IdentityOperator(LinearOperator):
    kind = "identity"

    def __init__(self, m: int, n: int):
        super().__init__(m, n, m * n)

    def _apply(self, X):
        return X.reshape(-1).copy()

    def _adjoint(self, v):
        return v.reshape(self.m, self.n).copy()


class MaskOperator(LinearOperator):
    """Entry sampling on a set of coordinates, in sorted row-major order."""

    kind = "mask"

    def __init__(self, m: int, n: int, indices, seed: int | None = None):
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        if idx.size != np.asarray(indices).size:
            raise InvalidInputError("mask coordinates contain duplicates")
        if idx.size and (idx[0] < 0 or idx[-1] >= m * n):
            raise InvalidInputError("mask coordinates out of range")
        super().__init__(m, n, idx.size)
        self.indices = idx
        self.seed = seed

    @classmethod
    def random(cls, m: int, n: int, p: int, seed: int) -> "MaskOperator":
        if not 1 <= p <= m * n:
            raise InvalidInputError(f"measurement count p={p} outside [1, {m * n}]")
        rng = np.random.default_rng(seed)
        return cls(m, n, rng.choice(m * n, size=p, replace=False), seed=seed)

    @classmethod
    def from_boolean(cls, mask) -> "MaskOperator":
        mask = np.asarray(mask, dtype=bool)
        return cls(*mask.shape, np.flatnonzero(mask))

    def mask(self) -> np.ndarray:
        out = np.zeros(self.m * self.n, dtype=bool)
        out[self.indices] = True
        return out.reshape(self.m, self.n)

    def _apply(self, X):
        return X.reshape(-1)[self.indices]

    def _adjoint(self, v):
        out = np.zeros(self.m * self.n)
        out[self.indices] = v
        return out.reshape(self.m, self.n)

    def descriptor(self) -> dict:
        d = super().descriptor()
        d["seed"] = self.seed
        return d


class StructuredOperator(LinearOperator):
    """Sign flip, permutation, orthonormal Walsh-Hadamard transform, subsample.

    ``vec(X)`` is zero-padded to the next power of two ``N``. The full
    (unsampled) transform is orthonormal; the kept rows are rescaled by
    ``sqrt(N / p)`` so that ``E ||A X||^2 = ||X||^2``.
    """

    kind = "structured"

    def __init__(self, m: int, n: int, p: int, seed: int):
        super().__init__(m, n, p)
        self.seed = seed
        self.N = _next_pow2(m * n)
        if p > self.N:
            raise InvalidInputError("p exceeds the padded transform length")
        rng = np.random.default_rng(seed)
        self.signs = rng.choice(np.array([-1.0, 1.0]), size=self.N)
        self.permutation = rng.permutation(self.N)
        self.rows = np.sort(rng.choice(self.N, size=p, replace=False))
        self.scale = np.sqrt(self.N / p)

    def full_transform(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal map on padded length-N vectors (before subsampling)."""
        return fwht((x * self.signs)[self.permutation]) / np.sqrt(self.N)

    def full_transform_adjoint(self, z: np.ndarray) -> np.ndarray:
        w = fwht(z) / np.sqrt(self.N)
        out = np.empty(self.N)
        out[self.permutation] = w
        return out * self.signs

    def _apply(self, X):
        x = np.zeros(self.N)
        x[: self.m * self.n] = X.reshape(-1)
        return self.full_transform(x)[self.rows] * self.scale

    def _adjoint(self, v):
        z = np.zeros(self.N)
        z[self.rows] = v * self.scale
        return self.full_transform_adjoint(z)[: self.m * self.n].reshape(self.m, self.n)

    def descriptor(self) -> dict:
        d = super().descriptor()
        d["seed"] = self.seed
        return d


def operator_from_descriptor(desc: dict | str) -> LinearOperator:
    """Rebuild an operator from its JSON descriptor; random data is regenerated from the seed."""
    if isinstance(desc, str):
        desc = json.loads(desc)
    kind = desc["kind"]
    m, n, p = desc["m"], desc["n"], desc["p"]
    if kind == "identity":
        return IdentityOperator(m, n)
    if kind == "mask":
        if desc.get("seed") is None:
            raise InvalidInputError("mask descriptor without a seed cannot be regenerated")
        return MaskOperator.random(m, n, p, desc["seed"])
    if kind == "structured":
        return StructuredOperator(m, n, p, desc["seed"])
    raise InvalidInputError(f"unknown operator kind {kind!r}")


def make_operator(kind: str, m: int, n: int, sr: float, seed: int) -> LinearOperator:
    """Build an operator with ``p = floor(sr * m * n)`` measurements."""
    p = int(np.floor(sr * m * n))
    if p < 1:
        raise InvalidInputError(f"SR={sr} gives no measurements for a {m}x{n} signal")
    if kind == "mask":
        return MaskOperator.random(m, n, p, seed)
    if kind == "structured":
        return StructuredOperator(m, n, p, seed)
    if kind == "identity":
        return IdentityOperator(m, n)
    raise InvalidInputError(f"unknown operator kind {kind!r}")


@dataclass(frozen=True)
class Observation:
    y: np.ndarray
    operator: LinearOperator
    noise_energy: float = 0.0

    def __post_init__(self):
        if np.shape(self.y) != (self.operator.p,):
            raise InvalidInputError("observation length does not match the operator")
        if self.noise_energy < 0:
            raise InvalidInputError("noise energy must be nonnegative")


def data_error(A: LinearOperator, y, X) -> float:
    """``f(X) = ||y - A X||_2^2``."""
    r = np.asarray(y) - A.apply(X)
    return float(r @ r)


def gradient(A: LinearOperator, y, X) -> np.ndarray:
    """``-2 A*(y - A X)``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (A.p,):
        raise InvalidInputError(f"expected y of length {A.p}, got {y.shape}")
    return -2.0 * A.adjoint(y - A.apply(X))


def rip_probe(A: LinearOperator, k: int, trials: int, seed=None, family: str = "gaussian"):
    """Monte-Carlo lower bound on the rank-restricted isometry constant.

    Draws ``trials`` unit-Frobenius rank-``k`` matrices and returns the largest
    one-sided deviations ``(max(1 - ||AX||^2), max(||AX||^2 - 1))``, each
    floored at zero. ``family="spikes"`` uses coherent matrices ``e_i e_j^T``
    instead of Gaussian factors, which exposes sampling operators.
    """
    if not 1 <= k <= min(A.m, A.n):
        raise InvalidInputError(f"k={k} outside [1, {min(A.m, A.n)}]")
    if trials < 1:
        raise InvalidInputError("trials must be positive")
    rng = np.random.default_rng(seed)
    lower = upper = 0.0
    for _ in range(trials):
        if family == "gaussian":
            X = rng.standard_normal((A.m, k)) @ rng.standard_normal((A.n, k)).T
        elif family == "spikes":
            X = np.zeros((A.m, A.n))
            X[rng.integers(A.m), rng.integers(A.n)] = 1.0
        else:
            raise InvalidInputError(f"unknown probe family {family!r}")
        # ratio form: exactly 1 for an isometry that copies entries
        energy = float(np.sum(A.apply(X) ** 2)) / float(np.sum(X**2))
        lower = max(lower, 1.0 - energy)
        upper = max(upper, energy - 1.0)
    return lower, upper

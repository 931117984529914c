"""Dense matrix helpers and the subspace projection calculus.

A subspace is described by a pair of factors ``(U, V)``. Two notions of
"the subspace spanned by S" are used in the solvers:

* the *tangent* subspace ``{U A + B V^T}``, whose orthogonal projection is
  ``P_U X + X P_V - P_U X P_V`` (the default everywhere);
* the *atom* span, i.e. the linear span of the rank-1 matrices
  ``u_i v_i^T`` (used by the ADMiRA least-squares step).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import InvalidInputError, InvalidRankError

ORTHO_TOL = 1e-10


class SvdFactors(NamedTuple):
    U: np.ndarray
    s: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class SubspaceBasis:
    """Left/right factors of a set of rank-1 matrices.

    ``left`` is m x r_left and ``right`` is n x r_right. For bases coming out of
    an SVD the two widths agree; after :func:`ortho_union` they may differ (the
    left and right spans are kept at their true dimensions, never padded).
    ``strict_orthonormal`` is False only for raw concatenations.
    """

    left: np.ndarray
    right: np.ndarray
    strict_orthonormal: bool = True
    _ortho_cache: list = field(default_factory=list, repr=False, compare=False)

    @classmethod
    def empty(cls, m: int, n: int) -> "SubspaceBasis":
        return cls(np.zeros((m, 0)), np.zeros((n, 0)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.left.shape[0], self.right.shape[0]

    @property
    def rank(self) -> int:
        return max(self.left.shape[1], self.right.shape[1])

    @property
    def is_empty(self) -> bool:
        return self.rank == 0

    def orthonormalized(self) -> "SubspaceBasis":
        """Orthonormal copy spanning the same left/right ranges (computed once)."""
        if self.strict_orthonormal:
            return self
        if not self._ortho_cache:
            self._ortho_cache.append(
                SubspaceBasis(orthonormal_columns(self.left), orthonormal_columns(self.right))
            )
        return self._ortho_cache[0]

    def atoms(self) -> list[np.ndarray]:
        """The rank-1 matrices ``u_i v_i^T`` (only defined for paired factors)."""
        if self.left.shape[1] != self.right.shape[1]:
            raise InvalidInputError("atoms need paired left/right factors")
        return [np.outer(self.left[:, i], self.right[:, i]) for i in range(self.left.shape[1])]


def _check_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise InvalidInputError(f"expected a non-empty 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("matrix has non-finite entries")
    return X


def _check_compatible(S: SubspaceBasis, X: np.ndarray) -> None:
    if S.shape != X.shape:
        raise InvalidInputError(f"basis of shape {S.shape} incompatible with matrix {X.shape}")


def frobenius_norm(X) -> float:
    return float(np.linalg.norm(X))


def orthonormal_columns(A: np.ndarray, rtol: float = ORTHO_TOL) -> np.ndarray:
    """Orthonormal basis of ``range(A)``, dropping numerically dependent directions."""
    if A.shape[1] == 0:
        return A.copy()
    U, s, _ = thin_svd(A)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((A.shape[0], 0))
    return U[:, s > rtol * s[0]]


def svd(X) -> SvdFactors:
    """Thin SVD with ``l = min(m, n)`` and non-increasing singular values.

    Equal singular values keep the order returned by LAPACK.
    """
    X = _check_matrix(X)
    U, s, Vt = thin_svd(X)
    return SvdFactors(U, s, Vt.T)


def thin_svd(X):
    """``np.linalg.svd(X, full_matrices=False)`` with a robust fallback driver."""
    try:
        return np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError:
        # divide-and-conquer occasionally fails to converge; QR iteration is slower but robust
        return scipy.linalg.svd(X, full_matrices=False, lapack_driver="gesvd")


def best_rank_k(X, k: int) -> tuple[SubspaceBasis, np.ndarray]:
    """Truncated SVD: the Frobenius-closest matrix of rank at most ``k``."""
    X = _check_matrix(X)
    if not 1 <= k <= min(X.shape):
        raise InvalidRankError(f"k={k} outside [1, {min(X.shape)}]")
    U, s, V = svd(X)
    Uk, Vk = U[:, :k], V[:, :k]
    return SubspaceBasis(Uk, Vk), (Uk * s[:k]) @ Vk.T


def _factors(S: SubspaceBasis, exact: bool) -> tuple[np.ndarray, np.ndarray]:
    if exact and not S.strict_orthonormal:
        S = S.orthonormalized()
    return S.left, S.right


def project_subspace(S: SubspaceBasis, X, exact: bool = True) -> np.ndarray:
    """``P_U X + X P_V - P_U X P_V``.

    With ``exact=False`` a raw (non-orthonormal) basis is used as-is, which
    gives the cheap pseudo-projection employed for unorthogonalized unions.
    """
    X = np.asarray(X, dtype=float)
    _check_compatible(S, X)
    U, V = _factors(S, exact)
    UtX = U.T @ X
    XV = X @ V
    return U @ UtX + XV @ V.T - U @ (UtX @ V) @ V.T


def project_complement(S: SubspaceBasis, X, exact: bool = True) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X - project_subspace(S, X, exact=exact)


def project_left_only(S: SubspaceBasis, X, exact: bool = True) -> np.ndarray:
    """``P_U X``, one matrix-matrix product instead of three."""
    X = np.asarray(X, dtype=float)
    if S.left.shape[0] != X.shape[0]:
        raise InvalidInputError(f"left factor has {S.left.shape[0]} rows, matrix has {X.shape[0]}")
    U, _ = _factors(S, exact)
    return U @ (U.T @ X)


def project_right_only(S: SubspaceBasis, X, exact: bool = True) -> np.ndarray:
    """``X P_V``; the transpose of :func:`project_left_only`."""
    X = np.asarray(X, dtype=float)
    if S.right.shape[0] != X.shape[1]:
        raise InvalidInputError(f"right factor has {S.right.shape[0]} rows, matrix has {X.shape[1]} cols")
    _, V = _factors(S, exact)
    return (X @ V) @ V.T


def atom_coefficients(S: SubspaceBasis, X) -> np.ndarray:
    """Least-squares coefficients of ``X`` on the atoms ``u_i v_i^T``."""
    X = np.asarray(X, dtype=float)
    _check_compatible(S, X)
    if S.is_empty:
        return np.zeros(0)
    if S.left.shape[1] != S.right.shape[1]:
        raise InvalidInputError("atom coefficients need paired left/right factors")
    U, V = S.left, S.right
    b = np.einsum("ij,ik,jk->k", X, U, V)
    # Gram of atoms: <u_i v_i^T, u_j v_j^T> = (u_i.u_j)(v_i.v_j)
    gram = (U.T @ U) * (V.T @ V)
    if S.strict_orthonormal:
        return b
    return np.linalg.lstsq(gram, b, rcond=None)[0]


def atoms_to_matrix(S: SubspaceBasis, coef: np.ndarray) -> np.ndarray:
    return (S.left * coef) @ S.right.T


def project_atoms(S: SubspaceBasis, X) -> np.ndarray:
    """Orthogonal projection onto the linear span of the rank-1 atoms."""
    X = np.asarray(X, dtype=float)
    if S.is_empty:
        _check_compatible(S, X)
        return np.zeros_like(X)
    return atoms_to_matrix(S, atom_coefficients(S, X))


def ortho_union(S1: SubspaceBasis, S2: SubspaceBasis) -> SubspaceBasis:
    """Orthonormal bases of ``range([U1 U2])`` and ``range([V1 V2])``."""
    if S1.shape != S2.shape:
        raise InvalidInputError(f"cannot union bases of shapes {S1.shape} and {S2.shape}")
    if S1.is_empty:
        return S2.orthonormalized()
    if S2.is_empty:
        return S1.orthonormalized()
    U = orthonormal_columns(np.hstack([S1.left, S2.left]))
    V = orthonormal_columns(np.hstack([S1.right, S2.right]))
    return SubspaceBasis(U, V)


def raw_union(S1: SubspaceBasis, S2: SubspaceBasis) -> SubspaceBasis:
    """Concatenate the factors without re-orthogonalization."""
    if S1.shape != S2.shape:
        raise InvalidInputError(f"cannot union bases of shapes {S1.shape} and {S2.shape}")
    if S1.is_empty:
        return S2
    if S2.is_empty:
        return S1
    return SubspaceBasis(
        np.hstack([S1.left, S2.left]),
        np.hstack([S1.right, S2.right]),
        strict_orthonormal=False,
    )


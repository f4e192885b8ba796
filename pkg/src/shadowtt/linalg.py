"""Dense linear-algebra kernels: contraction, truncated SVD, least squares.

All functions are pure and operate on immutable ``numpy`` arrays; they are
safe to call concurrently.  Tensors are row-major with explicit axis-pair
contraction so that diagram-to-code mapping stays mechanical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Relative singular-value cutoff for pseudoinverse-based solves.
PINV_CUTOFF = 1e-12


@dataclass
class SVDResult:
    """Rank-truncated SVD ``m ~ left_factor @ diag(singular_values) @ right_factor``.

    ``left_factor`` has orthonormal columns, ``right_factor`` orthonormal
    rows, and ``singular_values`` is nonincreasing and nonnegative.
    """

    left_factor: np.ndarray
    singular_values: np.ndarray
    right_factor: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left_factor * self.singular_values) @ self.right_factor


def contract(a: np.ndarray, b: np.ndarray, axis_pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Contract ``a`` with ``b`` over the given ``(axis_of_a, axis_of_b)`` pairs.

    Standard tensordot semantics: the output carries the unpaired axes of
    ``a`` followed by the unpaired axes of ``b``, in their original order.

    Raises
    ------
    ValueError
        If any paired axes have unequal lengths.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = [pair[0] for pair in axis_pairs]
    axes_b = [pair[1] for pair in axis_pairs]
    for ax_a, ax_b in axis_pairs:
        if a.shape[ax_a] != b.shape[ax_b]:
            raise ValueError(
                f"axis pair ({ax_a}, {ax_b}): lengths {a.shape[ax_a]} != {b.shape[ax_b]}"
            )
    if not axis_pairs:
        return np.multiply.outer(a, b)
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def truncated_svd(m: np.ndarray, rank: int) -> SVDResult:
    """Best rank-``rank`` factorization of a matrix in the Frobenius norm.

    The sign/phase gauge is fixed deterministically: the largest-magnitude
    entry of each left-factor column is made real and positive (ties broken
    by the first such entry), so factors are reproducible across runs.

    Raises
    ------
    ValueError
        If ``rank`` is not in ``[1, min(m.shape)]``.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    if not 1 <= rank <= min(m.shape):
        raise ValueError(f"rank {rank} out of range for shape {m.shape}")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    u = u[:, :rank].copy()
    s = s[:rank].copy()
    vh = vh[:rank, :].copy()
    for j in range(rank):
        pivot = u[np.argmax(np.abs(u[:, j])), j]
        if pivot != 0:
            phase = pivot / abs(pivot)
            u[:, j] /= phase
            vh[j, :] *= phase
    if not np.iscomplexobj(m):
        u = u.real
        vh = vh.real
    return SVDResult(left_factor=u, singular_values=s, right_factor=vh)


def pinv(a: np.ndarray, cutoff: float = PINV_CUTOFF) -> np.ndarray:
    """Moore-Penrose pseudoinverse with a relative singular-value cutoff."""
    a = np.asarray(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(a.T.shape, dtype=a.dtype)
    inv = np.where(s > cutoff * s[0], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


def least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of ``min_X || X a - b ||_F`` (right-multiplication form).

    Solved through the pseudoinverse of ``a`` with relative cutoff
    ``PINV_CUTOFF * s_1``, so rank-deficient systems return the
    minimum-Frobenius-norm minimizer instead of failing.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("least_squares expects matrices")
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column mismatch: a has {a.shape[1]}, b has {b.shape[1]}")
    return b @ pinv(a)

"""Randomized Pauli-measurement simulation and shadow-moment evaluation.

Each recorded sample holds one uniformly random basis in {X, Y, Z} and one
outcome bit per site (bit 0 corresponds to the +1 eigenvalue).  A sample's
inverted-channel matrix per site is ``M = 3 |v><v| - I`` with ``v`` the
measured eigenvector; every estimator in this module is a product of the
per-site traces ``t(i) = tr(M sigma~^i)``, which take only the values
``1/sqrt(2)``, ``+-3/sqrt(2)`` and ``0``.  Those traces are tabulated once
per sample and site (the trace table), making every Pauli-string estimate a
short product over the string's support.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from shadowtt import _kernels_numpy
from shadowtt.backend import active_backend
from shadowtt.mps import MPS, canonicalize
from shadowtt.pauli import PauliString

#: Basis labels by code: measurement basis index 0, 1, 2 = X, Y, Z.
BASIS_LABELS = ("X", "Y", "Z")

#: +1 / -1 eigenvectors per basis; bit 0 records the +1 outcome.
_EIGVECS = np.array(
    [
        [[1.0, 1.0], [1.0, -1.0]],
        [[1.0, 1.0j], [1.0, -1.0j]],
        [[np.sqrt(2.0), 0.0], [0.0, np.sqrt(2.0)]],
    ],
    dtype=complex,
) / np.sqrt(2.0)


def _trace_lookup() -> np.ndarray:
    """(6, 4) table: row ``2*basis + bit`` holds ``tr(M sigma~^i)`` for i = 0..3."""
    table = np.zeros((6, 4))
    for basis in range(3):
        for bit in range(2):
            table[2 * basis + bit, 0] = 1.0 / np.sqrt(2.0)
            table[2 * basis + bit, 1 + basis] = (3.0 / np.sqrt(2.0)) * (1.0 if bit == 0 else -1.0)
    return table


#: Normalized-Pauli traces of the inverted-channel matrix, by sample code.
TRACE_TABLE = _trace_lookup()

#: Same table scaled by sqrt(2): per-site factors for unnormalized Paulis.
STRING_FACTORS = np.sqrt(2.0) * TRACE_TABLE


@dataclass
class ShadowSample:
    """One measurement record: per-site basis indices (0..2) and outcome bits."""

    bases: np.ndarray
    bits: np.ndarray

    def basis_labels(self) -> list[str]:
        return [BASIS_LABELS[b] for b in self.bases]


@dataclass
class ShadowBatch:
    """A batch of measurement records stored one byte per site.

    ``codes[j, l] = 2 * basis + bit``.  Samples split into ``w_groups``
    contiguous equal-size groups for median-of-means aggregation.
    """

    n: int
    codes: np.ndarray
    w_groups: int
    seed: int

    def __post_init__(self) -> None:
        self.codes = np.asarray(self.codes, dtype=np.uint8)
        if self.codes.ndim != 2 or self.codes.shape[1] != self.n:
            raise ValueError("codes must have shape (count, n)")
        if self.codes.size and int(self.codes.max()) > 5:
            raise ValueError("codes must lie in [0, 5]")
        if self.w_groups < 1 or self.count % self.w_groups != 0:
            raise ValueError("sample count must divide into w_groups equal groups")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")

    @property
    def count(self) -> int:
        return self.codes.shape[0]

    def sample(self, j: int) -> ShadowSample:
        row = self.codes[j]
        return ShadowSample(bases=row // 2, bits=row % 2)


@dataclass
class TraceTable:
    """Per-sample per-site traces ``t(i) = tr(M sigma~^i)``, held compactly.

    Entries are a pure lookup of the sample codes, so only the codes are
    stored; ``values()`` materializes the full (count, n, 4) array.
    """

    codes: np.ndarray
    w_groups: int

    @property
    def count(self) -> int:
        return self.codes.shape[0]

    @property
    def n(self) -> int:
        return self.codes.shape[1]

    def values(self) -> np.ndarray:
        return TRACE_TABLE[self.codes]


def build_trace_table(batch: ShadowBatch) -> TraceTable:
    return TraceTable(codes=batch.codes, w_groups=batch.w_groups)


def _basis_contractions(psi: MPS) -> np.ndarray:
    """Per-site components contracted with every outcome bra, zero-padded.

    Returns an array of shape ``(n, 3, 2, amax, amax)``; requires the state
    right-canonical so the conditional sweep needs no right environments.
    """
    amax = max(psi.bonds)
    mats = np.zeros((psi.n, 3, 2, amax, amax), dtype=np.complex128)
    for l, comp in enumerate(psi.components):
        a, _, b = comp.shape
        for basis in range(3):
            for bit in range(2):
                bra = _EIGVECS[basis, bit].conj()
                mats[l, basis, bit, :a, :b] = bra[0] * comp[:, 0, :] + bra[1] * comp[:, 1, :]
    return mats


def sample_shadows(
    psi: MPS, count: int, w_groups: int, seed: int, backend: str | None = None
) -> ShadowBatch:
    """Exact sampling of ``count`` random-Pauli measurements on an MPS.

    Sweeps left to right drawing each site's basis and outcome from the
    conditional marginal; the state is right-canonicalized once so each step
    is a small matrix-vector product.  Fully deterministic in ``seed``
    regardless of worker count (counter-based per-sample streams).
    """
    if count < 1 or w_groups < 1 or count % w_groups != 0:
        raise ValueError("count must be a positive multiple of w_groups")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit an unsigned 64-bit integer")
    from shadowtt.mps import mps_norm

    norm = mps_norm(psi)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-6")
    rc = canonicalize(psi, center=1)
    rc.components[0] = rc.components[0] / np.sqrt(
        np.sum(np.abs(rc.components[0]) ** 2)
    )
    site_mats = _basis_contractions(rc)
    codes = np.zeros((count, psi.n), dtype=np.uint8)
    if active_backend(backend) == "numba":
        from shadowtt import _kernels_numba

        _kernels_numba.sample_sweep(site_mats, np.uint64(seed & (2**64 - 1)), count, codes)
    else:
        _kernels_numpy.sample_sweep(site_mats, seed, count, codes)
    return ShadowBatch(n=psi.n, codes=codes, w_groups=w_groups, seed=seed)


def median_of_group_means(values: np.ndarray, w_groups: int) -> float:
    """Median of the ``w_groups`` contiguous group means (grand mean if W = 1)."""
    if w_groups == 1:
        return float(np.mean(values))
    groups = values.reshape(w_groups, -1)
    return float(np.median(groups.mean(axis=1)))


def _string_arrays(
    obs: Sequence[tuple[float, PauliString]], n: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Flatten (weight, string) pairs into the kernel encoding for one observable."""
    coeffs, ptr, sites, paulis = [], [0], [], []
    for weight, p in obs:
        p.validate_sites(n)
        coeffs.append(weight * p.coefficient)
        for site, idx in p.sorted_support():
            sites.append(site - 1)
            paulis.append(idx)
        ptr.append(len(sites))
    return (
        np.asarray(coeffs, dtype=np.float64),
        np.zeros(len(coeffs), dtype=np.int64),
        np.asarray(ptr, dtype=np.int64),
        np.asarray(sites, dtype=np.int64),
        np.asarray(paulis, dtype=np.int64),
    )


def weighted_sample_values(
    table: TraceTable,
    obs: Sequence[tuple[float, PauliString]],
    backend: str | None = None,
) -> np.ndarray:
    """Per-sample estimates of ``sum_i w_i tr(rho P_i)`` (length ``count``)."""
    coeffs, obs_idx, ptr, sites, paulis = _string_arrays(obs, table.n)
    if active_backend(backend) == "numba":
        from shadowtt import _kernels_numba

        out = _kernels_numba.obs_value_table(
            table.codes, STRING_FACTORS, 1, coeffs, obs_idx, ptr, sites, paulis
        )
    else:
        out = _kernels_numpy.obs_value_table(
            table.codes, STRING_FACTORS, 1, coeffs, obs_idx, ptr, sites, paulis
        )
    return out[:, 0]


def shadow_pauli_estimate(
    table: TraceTable, p: PauliString, median_of_means: bool = False
) -> float:
    """Unbiased estimate of ``tr(rho P)`` from the trace table.

    Each sample contributes ``coefficient * prod over support of
    sqrt(2) t(label)``; off-support sites contribute the exact factor 1.
    """
    values = weighted_sample_values(table, [(1.0, p)])
    return median_of_group_means(values, table.w_groups if median_of_means else 1)


def shadow_weighted_estimate(
    table: TraceTable,
    obs: Sequence[tuple[float, PauliString]],
    median_of_means: bool = False,
) -> float:
    """Estimate a weighted sum of Pauli strings; the median (when requested)
    is taken over group means of the full weighted sum, not per string."""
    values = weighted_sample_values(table, obs)
    return median_of_group_means(values, table.w_groups if median_of_means else 1)

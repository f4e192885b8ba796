"""Shared fixtures and self-contained dense oracles.

Oracle helpers here rebuild quantities from first principles (explicit kron
products, full SVDs, brute-force loops) so they stay independent of the
package paths they are used to check.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from shadowtt.mps import MPS, statevector_to_mps

I2 = np.eye(2, dtype=complex)
PAULIS = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(support: dict[int, str], n: int, coefficient: float = 1.0) -> np.ndarray:
    """Oracle kron assembly of a Pauli string (site 1 most significant)."""
    mats = [PAULIS[support.get(site, "I")] for site in range(1, n + 1)]
    return coefficient * reduce(np.kron, mats)


def dense_expectation(vec: np.ndarray, support: dict[int, str], coefficient: float = 1.0) -> float:
    n = int(np.log2(len(vec)))
    return float(np.real(vec.conj() @ dense_pauli(support, n, coefficient) @ vec))


def normalized_pauli_coeffs(rho: np.ndarray) -> np.ndarray:
    """Oracle coefficient array: brute-force trace against every sigma~ product."""
    n = int(np.log2(rho.shape[0]))
    out = np.zeros((4,) * n)
    labels = "IXYZ"
    for flat in range(4**n):
        idx, rem = [], flat
        for _ in range(n):
            idx.append(rem % 4)
            rem //= 4
        idx = idx[::-1]
        support = {k + 1: labels[i] for k, i in enumerate(idx) if i}
        mat = dense_pauli(support, n) / np.sqrt(2.0) ** n
        out[tuple(idx)] = np.real(np.trace(rho @ mat))
    return out


@pytest.fixture
def bell_mps() -> MPS:
    return statevector_to_mps(np.array([1, 0, 0, 1]) / np.sqrt(2.0), None, 0.0)


@pytest.fixture
def zero_mps() -> MPS:
    """|00...0> on four sites."""
    vec = np.zeros(16)
    vec[0] = 1.0
    return statevector_to_mps(vec, None, 0.0)

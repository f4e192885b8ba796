"""Single-qubit Pauli algebra shared by every module.

Index convention used throughout the package: 0 = I, 1 = X, 2 = Y, 3 = Z.
``NORMALIZED[i]`` is the orthonormal basis element ``sigma_i / sqrt(2)``
under the trace inner product ``<A, B> = tr(A^H B)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

LABELS = ("I", "X", "Y", "Z")
LABEL_TO_INDEX = {"I": 0, "X": 1, "Y": 2, "Z": 3}

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

MATRICES = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)
NORMALIZED = tuple(m / np.sqrt(2.0) for m in MATRICES)


@dataclass
class PauliString:
    """A weighted Pauli string ``coefficient * prod_site sigma^label_site``.

    Sites are 1-based.  Sites absent from ``support`` carry the identity, so
    an empty support denotes the scaled identity operator.  The per-site
    operators are the unnormalized Pauli matrices (operator norm 1).
    """

    support: dict[int, str] = field(default_factory=dict)
    coefficient: float = 1.0

    def __post_init__(self) -> None:
        for site, label in self.support.items():
            if not isinstance(site, (int, np.integer)) or site < 1:
                raise ValueError(f"site {site!r} must be a positive integer")
            if label not in ("X", "Y", "Z"):
                raise ValueError(f"label {label!r} must be one of X, Y, Z")

    def validate_sites(self, n: int) -> None:
        """Raise if any support site lies outside ``[1, n]``."""
        for site in self.support:
            if site > n:
                raise ValueError(f"site {site} outside chain of length {n}")

    def indices(self) -> dict[int, int]:
        """Support as a map site -> Pauli index in {1, 2, 3}."""
        return {site: LABEL_TO_INDEX[label] for site, label in self.support.items()}

    def sorted_support(self) -> list[tuple[int, int]]:
        """Support as (site, pauli index) pairs in ascending site order."""
        return sorted(self.indices().items())


def dense_operator(p: PauliString, n: int) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of a Pauli string (site 1 most significant)."""
    p.validate_sites(n)
    factors = [MATRICES[0]] * n
    for site, idx in p.indices().items():
        factors[site - 1] = MATRICES[idx]
    return p.coefficient * reduce(np.kron, factors)


def product_string(*parts: PauliString) -> PauliString:
    """Product of Pauli strings with pairwise disjoint supports.

    Coefficients multiply.  Raises on overlapping supports (that case would
    need full Pauli group algebra, which nothing in this package requires).
    """
    support: dict[int, str] = {}
    coeff = 1.0
    for part in parts:
        for site, label in part.support.items():
            if site in support:
                raise ValueError(f"overlapping support at site {site}")
            support[site] = label
        coeff *= part.coefficient
    return PauliString(support=support, coefficient=coeff)

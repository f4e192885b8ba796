"""Spin-chain Hamiltonians and exact ground states at desk scale.

Ground states come from dense eigendecomposition of the assembled
Hamiltonian (exact and deterministic) followed by sequential-SVD
factorization into an MPS; no variational sweep is involved.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from shadowtt.mps import MPS, mps_to_statevector, statevector_to_mps
from shadowtt.pauli import PauliString, dense_operator

#: Dense diagonalization is refused beyond this many sites.
MAX_EIG_SITES = 12

#: Eigenvalue gaps below this threshold are flagged as degenerate.
DEGENERACY_GAP = 1e-9


@dataclass
class HamiltonianSpec:
    """A Hamiltonian as a sum of weighted Pauli strings on ``n`` sites."""

    n: int
    terms: list[PauliString] = field(default_factory=list)

    def __post_init__(self) -> None:
        for term in self.terms:
            term.validate_sites(self.n)


def heisenberg_1d(n: int, periodic: bool) -> HamiltonianSpec:
    """Antiferromagnetic Heisenberg chain: XX + YY + ZZ on every bond, coefficient +1.

    With periodic boundaries the wrap bond ``(n, 1)`` is added once; at
    ``n = 2`` it coincides with the interior bond and is not duplicated.
    """
    if n < 2:
        raise ValueError("need at least two sites")
    pairs = [(i, i + 1) for i in range(1, n)]
    if periodic and n > 2:
        pairs.append((n, 1))
    terms = [
        PauliString({i: axis, j: axis}, 1.0) for (i, j) in pairs for axis in ("X", "Y", "Z")
    ]
    return HamiltonianSpec(n=n, terms=terms)


def tfim_1d(n: int, J: float, h: float) -> HamiltonianSpec:
    """Ferromagnetic transverse-field Ising chain with a periodic ZZ wrap term.

    ``n - 1`` interior ZZ bonds plus the ``(1, n)`` wrap, each with
    coefficient ``-J``, and an X field of coefficient ``-h`` on every site.
    """
    if n < 3:
        raise ValueError("need at least three sites")
    terms = [PauliString({i: "Z", i + 1: "Z"}, -J) for i in range(1, n)]
    terms.append(PauliString({1: "Z", n: "Z"}, -J))
    terms.extend(PauliString({i: "X"}, -h) for i in range(1, n + 1))
    return HamiltonianSpec(n=n, terms=terms)


def dense_hamiltonian(h: HamiltonianSpec) -> np.ndarray:
    """Assemble the dense ``2^n x 2^n`` matrix of all terms."""
    if h.n > MAX_EIG_SITES:
        raise ValueError(f"refusing dense assembly beyond {MAX_EIG_SITES} sites")
    mat = np.zeros((2**h.n, 2**h.n), dtype=complex)
    for term in h.terms:
        mat += dense_operator(term, h.n)
    return mat


def exact_ground_state(h: HamiltonianSpec, with_gap: bool = False):
    """Lowest eigenpair of the dense Hamiltonian, returned as ``(energy, MPS)``.

    Degenerate ground spaces (gap below ``DEGENERACY_GAP``) are flagged with
    a warning and the deterministic lowest-index eigenvector is used.  With
    ``with_gap=True`` the spectral gap is appended to the return tuple.
    """
    if h.n > MAX_EIG_SITES:
        raise ValueError(f"refusing dense diagonalization beyond {MAX_EIG_SITES} sites")
    eigvals, eigvecs = np.linalg.eigh(dense_hamiltonian(h))
    energy = float(eigvals[0])
    gap = float(eigvals[1] - eigvals[0]) if len(eigvals) > 1 else np.inf
    if gap < DEGENERACY_GAP:
        warnings.warn(
            f"ground space degenerate (gap {gap:.2e}); using lowest-index eigenvector",
            stacklevel=2,
        )
    psi = statevector_to_mps(eigvecs[:, 0], max_bond=None, tol=1e-13)
    if with_gap:
        return energy, psi, gap
    return energy, psi


def hamiltonian_expectation(psi: MPS, h: HamiltonianSpec) -> float:
    """Exact ``<psi| H |psi>`` through the dense matrix (small ``n`` only)."""
    vec = mps_to_statevector(psi)
    return float(np.real(vec.conj() @ dense_hamiltonian(h) @ vec))

"""Model builders and exact ground states against independent diagonalization."""

import numpy as np
import pytest

from shadowtt.hamiltonians import (
    HamiltonianSpec,
    dense_hamiltonian,
    exact_ground_state,
    hamiltonian_expectation,
    heisenberg_1d,
    tfim_1d,
)
from shadowtt.mps import mps_to_statevector, random_mps
from shadowtt.pauli import PauliString

from conftest import dense_pauli


def oracle_matrix(spec: HamiltonianSpec) -> np.ndarray:
    """Independent kron assembly of the Hamiltonian."""
    out = np.zeros((2**spec.n, 2**spec.n), dtype=complex)
    for term in spec.terms:
        out += dense_pauli(term.support, spec.n, term.coefficient)
    return out


def test_heisenberg_term_counts():
    assert len(heisenberg_1d(3, periodic=True).terms) == 9
    assert len(heisenberg_1d(3, periodic=False).terms) == 6
    assert len(heisenberg_1d(20, periodic=True).terms) == 60


def test_heisenberg_two_sites_periodic_emits_wrap_once():
    spec = heisenberg_1d(2, periodic=True)
    assert len(spec.terms) == 3
    assert all(term.coefficient == 1.0 for term in spec.terms)


def test_tfim_term_counts_and_signs():
    spec = tfim_1d(4, J=1.0, h=1.0)
    zz = [t for t in spec.terms if len(t.support) == 2]
    x = [t for t in spec.terms if len(t.support) == 1]
    assert len(zz) == 4 and len(x) == 4
    assert all(t.coefficient == -1.0 for t in spec.terms)
    spec40 = tfim_1d(40, J=1.0, h=1.0)
    assert len(spec40.terms) == 80


def test_tfim_needs_three_sites():
    with pytest.raises(ValueError):
        tfim_1d(2, 1.0, 1.0)


def test_single_zz_bond_ground_energy_and_degeneracy_flag():
    # Antiferromagnetic pair: energy -1, doubly degenerate ground space.
    spec = HamiltonianSpec(n=2, terms=[PauliString({1: "Z", 2: "Z"}, 1.0)])
    with pytest.warns(UserWarning, match="degenerate"):
        energy, _ = exact_ground_state(spec)
    assert energy == pytest.approx(-1.0, abs=1e-12)


def test_tfim_two_site_handbuilt_matches_oracle():
    spec = HamiltonianSpec(
        n=2,
        terms=[
            PauliString({1: "Z", 2: "Z"}, -1.0),
            PauliString({1: "X"}, -1.0),
            PauliString({2: "X"}, -1.0),
        ],
    )
    energy, psi = exact_ground_state(spec)
    oracle = np.linalg.eigvalsh(oracle_matrix(spec))[0]
    assert energy == pytest.approx(oracle, abs=1e-12)
    vec = mps_to_statevector(psi)
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)


def test_heisenberg_n4_periodic_energy():
    spec = heisenberg_1d(4, periodic=True)
    energy, psi = exact_ground_state(spec)
    oracle = np.linalg.eigvalsh(oracle_matrix(spec))[0]
    assert oracle == pytest.approx(-8.0, abs=1e-10)
    assert energy == pytest.approx(-8.0, abs=1e-10)


def test_ground_state_mps_reaches_eigenvector():
    spec = tfim_1d(5, 1.0, 0.7)
    energy, psi = exact_ground_state(spec)
    vals, vecs = np.linalg.eigh(oracle_matrix(spec))
    fidelity = abs(np.vdot(vecs[:, 0], mps_to_statevector(psi)))
    assert fidelity == pytest.approx(1.0, abs=1e-10)
    assert energy == pytest.approx(vals[0], abs=1e-10)


def test_ground_state_variational_property():
    spec = heisenberg_1d(4, periodic=False)
    energy, _ = exact_ground_state(spec)
    for seed in range(20):
        psi = random_mps(4, 2, seed)
        assert hamiltonian_expectation(psi, spec) >= energy - 1e-9


def test_size_guard():
    with pytest.raises(ValueError):
        exact_ground_state(heisenberg_1d(13, periodic=False))

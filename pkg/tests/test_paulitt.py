"""Coefficient-train construction, conversions, norms and entropies vs dense oracles."""

from itertools import product

import numpy as np
import pytest

from shadowtt.mps import mps_to_statevector, random_mps, statevector_to_mps
from shadowtt.pauli import PauliString
from shadowtt.paulitt import (
    TTCoeff,
    density_to_coeff,
    mps_to_tt_coeff,
    tt_entry,
    tt_frobenius_distance,
    tt_inner,
    tt_norm,
    tt_pauli_expectation,
    tt_renyi2,
    tt_to_density,
)

from conftest import dense_expectation, normalized_pauli_coeffs


def test_one_site_zero_state_coefficient_vector():
    from shadowtt.mps import MPS

    psi = MPS([np.array([[[1.0], [0.0]]])])  # |0> on a single site
    tt = mps_to_tt_coeff(psi)
    root = 1.0 / np.sqrt(2.0)
    np.testing.assert_allclose(tt.components[0][0, :, 0], [root, 0.0, 0.0, root], atol=1e-12)
    np.testing.assert_allclose(tt_to_density(tt), np.diag([1.0, 0.0]), atol=1e-12)


def test_single_qubit_zero_state_coefficients():
    psi = statevector_to_mps(np.array([1.0, 0.0, 0.0, 0.0]), None, 0.0)
    # two-site product |00>: per-site coefficient structure shows through entries
    tt = mps_to_tt_coeff(psi)
    root = 1.0 / np.sqrt(2.0)
    assert tt_entry(tt, [0, 0]) == pytest.approx(root * root)
    assert tt_entry(tt, [3, 0]) == pytest.approx(root * root)
    assert tt_entry(tt, [1, 0]) == pytest.approx(0.0, abs=1e-12)
    assert tt_entry(tt, [2, 0]) == pytest.approx(0.0, abs=1e-12)


def test_bell_state_coefficients(bell_mps):
    tt = mps_to_tt_coeff(bell_mps)
    # alias: (I, X, Y, Z) indices 0..3; nonzeros II, XX, ZZ = 1/2 and YY = -1/2
    assert tt_entry(tt, [0, 0]) == pytest.approx(0.5)
    assert tt_entry(tt, [1, 1]) == pytest.approx(0.5)
    assert tt_entry(tt, [2, 2]) == pytest.approx(-0.5)
    assert tt_entry(tt, [3, 3]) == pytest.approx(0.5)
    vec = mps_to_statevector(bell_mps)
    oracle = normalized_pauli_coeffs(np.outer(vec, vec.conj()))
    for idx in product(range(4), repeat=2):
        assert tt_entry(tt, list(idx)) == pytest.approx(oracle[idx], abs=1e-10)


def test_ranks_are_squared_bonds():
    psi = random_mps(5, 2, seed=0)
    tt = mps_to_tt_coeff(psi)
    assert tt.ranks == [b * b for b in psi.bonds]


def test_density_round_trip_random_mps():
    psi = random_mps(5, 2, seed=1)
    tt = mps_to_tt_coeff(psi)
    vec = mps_to_statevector(psi)
    np.testing.assert_allclose(tt_to_density(tt), np.outer(vec, vec.conj()), atol=1e-10)


def test_tt_entry_matches_full_expansion():
    psi = random_mps(4, 2, seed=2)
    tt = mps_to_tt_coeff(psi)
    vec = mps_to_statevector(psi)
    oracle = normalized_pauli_coeffs(np.outer(vec, vec.conj()))
    for idx in product(range(4), repeat=4):
        assert tt_entry(tt, list(idx)) == pytest.approx(oracle[idx], abs=1e-10)


def test_all_identity_entry_is_trace_normalization():
    for n, seed in ((4, 3), (6, 4)):
        tt = mps_to_tt_coeff(random_mps(n, 2, seed))
        assert tt_entry(tt, [0] * n) == pytest.approx(2.0 ** (-n / 2.0), abs=1e-10)


def test_rank_one_entry_is_product_of_scalars():
    comps = [np.zeros((1, 4, 1)) for _ in range(3)]
    for k, comp in enumerate(comps):
        comp[0, :, 0] = [0.5, 0.1 * (k + 1), -0.2, 0.3]
    tt = TTCoeff(comps)
    assert tt_entry(tt, [1, 2, 3]) == pytest.approx(0.1 * -0.2 * 0.3)


def test_tt_to_density_identity_only_gives_maximally_mixed():
    comps = [np.zeros((1, 4, 1)) for _ in range(3)]
    for comp in comps:
        comp[0, 0, 0] = 1.0 / np.sqrt(2.0)
    rho = tt_to_density(TTCoeff(comps))
    np.testing.assert_allclose(rho, np.eye(8) / 8.0, atol=1e-12)


def test_density_to_coeff_single_qubit_cases():
    np.testing.assert_allclose(
        density_to_coeff(np.eye(2) / 2.0), [1 / np.sqrt(2), 0, 0, 0], atol=1e-12
    )
    np.testing.assert_allclose(
        density_to_coeff(np.diag([0.0, 1.0])),
        [1 / np.sqrt(2), 0, 0, -1 / np.sqrt(2)],
        atol=1e-12,
    )


def test_density_to_coeff_round_trip():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    rho = m + m.conj().T
    coeffs = density_to_coeff(rho)
    rebuilt = np.zeros_like(rho)
    from conftest import dense_pauli

    for idx in product(range(4), repeat=4):
        support = {k + 1: "IXYZ"[i] for k, i in enumerate(idx) if i}
        rebuilt = rebuilt + coeffs[idx] * dense_pauli(support, 4) / 4.0
    np.testing.assert_allclose(rebuilt, rho, atol=1e-12)


def test_density_to_coeff_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        density_to_coeff(m)


def test_frobenius_norm_matches_dense():
    for n, seed in ((4, 6), (6, 7)):
        psi = random_mps(n, 2, seed)
        tt = mps_to_tt_coeff(psi)
        vec = mps_to_statevector(psi)
        dense_norm = np.linalg.norm(np.outer(vec, vec.conj()))
        assert tt_norm(tt) == pytest.approx(dense_norm, abs=1e-10)
        assert np.sqrt(tt_inner(tt, tt)) == pytest.approx(dense_norm, abs=1e-10)


def test_distance_identical_is_zero():
    tt = mps_to_tt_coeff(random_mps(5, 2, seed=8))
    assert tt_frobenius_distance(tt, tt) == pytest.approx(0.0, abs=1e-12)


def test_distance_two_pure_states_formula():
    psi = random_mps(5, 2, seed=9)
    phi = random_mps(5, 2, seed=10)
    overlap = abs(np.vdot(mps_to_statevector(psi), mps_to_statevector(phi)))
    expected = np.sqrt(2.0 - 2.0 * overlap**2)
    dist = tt_frobenius_distance(mps_to_tt_coeff(psi), mps_to_tt_coeff(phi))
    assert dist == pytest.approx(expected, abs=1e-9)


def test_distance_matches_dense_frobenius():
    psi = random_mps(6, 2, seed=11)
    phi = random_mps(6, 2, seed=12)
    d = tt_frobenius_distance(mps_to_tt_coeff(psi), mps_to_tt_coeff(phi))
    va, vb = mps_to_statevector(psi), mps_to_statevector(phi)
    dense = np.linalg.norm(np.outer(va, va.conj()) - np.outer(vb, vb.conj()))
    assert d == pytest.approx(dense, abs=1e-9)


def test_pauli_expectation_identity_and_bell(bell_mps):
    tt = mps_to_tt_coeff(bell_mps)
    assert tt_pauli_expectation(tt, PauliString({})) == pytest.approx(1.0, abs=1e-10)
    assert tt_pauli_expectation(tt, PauliString({1: "Z", 2: "Z"})) == pytest.approx(1.0, abs=1e-10)


def test_pauli_expectation_matches_dense():
    psi = random_mps(6, 2, seed=13)
    tt = mps_to_tt_coeff(psi)
    vec = mps_to_statevector(psi)
    rng = np.random.default_rng(2)
    for _ in range(20):
        support = {
            int(site): "XYZ"[rng.integers(3)]
            for site in rng.choice(6, size=rng.integers(1, 4), replace=False) + 1
        }
        coeff = float(rng.standard_normal())
        p = PauliString(support, coeff)
        assert tt_pauli_expectation(tt, p) == pytest.approx(
            dense_expectation(vec, support, coeff), abs=1e-9
        )


def oracle_renyi(vec: np.ndarray, sites: tuple[int, ...]) -> float:
    """Dense partial-trace purity of a pure state."""
    n = int(np.log2(len(vec)))
    axes = [s - 1 for s in sites] + [k for k in range(n) if k + 1 not in sites]
    m = vec.reshape((2,) * n).transpose(axes).reshape(2 ** len(sites), -1)
    rho_a = m @ m.conj().T
    return float(-np.log(np.real(np.trace(rho_a @ rho_a))))


def test_renyi_product_state_is_zero(zero_mps):
    tt = mps_to_tt_coeff(zero_mps)
    for sites in ((1,), (2, 3), (1, 4)):
        assert tt_renyi2(tt, sites) == pytest.approx(0.0, abs=1e-10)


def test_renyi_bell_half_is_log_two(bell_mps):
    tt = mps_to_tt_coeff(bell_mps)
    assert tt_renyi2(tt, (1,)) == pytest.approx(np.log(2.0), abs=1e-10)


def test_renyi_matches_partial_trace_oracle():
    psi = random_mps(6, 2, seed=14)
    tt = mps_to_tt_coeff(psi)
    vec = mps_to_statevector(psi)
    for sites in ((2, 5), (1,), (3, 4), (6,)):
        assert tt_renyi2(tt, sites) == pytest.approx(oracle_renyi(vec, sites), abs=1e-8)


def test_renyi_schmidt_symmetry_and_phase_invariance():
    psi = random_mps(6, 2, seed=15)
    tt = mps_to_tt_coeff(psi)
    for sites in ((1, 2), (2, 4)):
        complement = tuple(s for s in range(1, 7) if s not in sites)
        assert tt_renyi2(tt, sites) == pytest.approx(tt_renyi2(tt, complement), abs=1e-8)
    phased = psi.copy()
    phased.components[0] = phased.components[0] * np.exp(0.7j)
    tt2 = mps_to_tt_coeff(phased)
    assert tt_renyi2(tt2, (2, 3)) == pytest.approx(tt_renyi2(tt, (2, 3)), abs=1e-10)


def test_renyi_rejects_bad_subsystems():
    tt = mps_to_tt_coeff(random_mps(4, 2, seed=16))
    with pytest.raises(ValueError):
        tt_renyi2(tt, ())
    with pytest.raises(ValueError):
        tt_renyi2(tt, (5,))


def test_guards_on_dense_conversions():
    tt = mps_to_tt_coeff(random_mps(11, 1, seed=17))
    with pytest.raises(ValueError):
        tt_to_density(tt)
    with pytest.raises(ValueError):
        density_to_coeff(np.eye(2**9))

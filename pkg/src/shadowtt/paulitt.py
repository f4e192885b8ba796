"""Pauli-basis coefficient tensor of a density matrix, stored as a tensor train.

A density matrix expands as ``rho = sum_i C(i_1..i_n) prod_l sigma~^{i_l}``
over the orthonormal per-site basis ``sigma~ = (I, X, Y, Z)/sqrt(2)``
(indices 0..3 in code).  For a pure MPS the coefficient tensor ``C`` is a
real tensor train whose internal ranks are the squared bond dimensions; this
module builds it, evaluates it, and computes norms, observables and Renyi-2
entropies directly in the train format.  Dense conversions provide small-n
oracles for everything else.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from shadowtt.mps import MPS
from shadowtt.pauli import NORMALIZED, PauliString

#: Dense density-matrix conversion is refused beyond this many sites.
MAX_DENSE_SITES = 10

#: Full coefficient-array extraction is refused beyond this many sites.
MAX_COEFF_SITES = 8

#: Purities are clamped here before taking the log.
PURITY_FLOOR = 1e-300

_SIGMA = np.stack(NORMALIZED)  # (4, 2, 2)


@dataclass
class TTCoeff:
    """Real tensor train with one ``(r_{k-1}, 4, r_k)`` component per site."""

    components: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.components) < 1:
            raise ValueError("TTCoeff needs at least one site")
        self.components = [np.asarray(c, dtype=float) for c in self.components]
        for k, comp in enumerate(self.components):
            if comp.ndim != 3 or comp.shape[1] != 4:
                raise ValueError(f"site {k + 1}: expected shape (r, 4, r'), got {comp.shape}")
            if k > 0 and comp.shape[0] != self.components[k - 1].shape[2]:
                raise ValueError(f"rank mismatch between sites {k} and {k + 1}")
        if self.components[0].shape[0] != 1 or self.components[-1].shape[2] != 1:
            raise ValueError("outer ranks must have size 1")

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def ranks(self) -> list[int]:
        """Internal ranks ``[r_0, ..., r_n]``."""
        return [self.components[0].shape[0]] + [c.shape[2] for c in self.components]


def hermitian_bond_basis(dim: int) -> np.ndarray:
    """Orthonormal Hermitian basis of ``dim x dim`` matrices, shape ``(dim^2, dim, dim)``.

    Diagonal units first, then symmetric and antisymmetric pair combinations,
    orthonormal under ``tr(A B)``.
    """
    basis = np.zeros((dim * dim, dim, dim), dtype=complex)
    m = 0
    for g in range(dim):
        basis[m, g, g] = 1.0
        m += 1
    root = 1.0 / np.sqrt(2.0)
    for g in range(dim):
        for gp in range(g + 1, dim):
            basis[m, g, gp] = root
            basis[m, gp, g] = root
            m += 1
            basis[m, g, gp] = 1.0j * root
            basis[m, gp, g] = -1.0j * root
            m += 1
    return basis


def mps_to_tt_coeff(psi: MPS) -> TTCoeff:
    """Coefficient train of ``|psi><psi|`` with ranks the squared bond dimensions.

    Per site, the component and its conjugate are contracted through each
    normalized Pauli matrix; the doubled bonds are expressed in a Hermitian
    orthonormal basis, which leaves the chain value untouched while making
    every component entry exactly real (the raw pair-index form is real only
    after the full chain contraction).  An imaginary residue above 1e-9
    signals a conjugation bug and raises.
    """
    comps = []
    for f in psi.components:
        a, _, b = f.shape
        left = hermitian_bond_basis(a)
        right = hermitian_bond_basis(b)
        # The conjugated chain pairs with the Pauli row index, so entries
        # realize tr(rho sigma~-product) rather than its transpose.
        t = np.einsum("mgG,gjd->mGjd", left.conj(), f, optimize=True)
        t = np.einsum("mGjd,GJD->mjdJD", t, f.conj(), optimize=True)
        t = np.einsum("iJj,mjdJD->midD", _SIGMA, t, optimize=True)
        g = np.einsum("midD,pdD->mip", t, right, optimize=True)
        residue = float(np.max(np.abs(g.imag)))
        if residue > 1e-9:
            raise ValueError(f"imaginary residue {residue:.3e} in coefficient component")
        comps.append(g.real)
    return TTCoeff(comps)


def tt_entry(c: TTCoeff, indices: Sequence[int]) -> float:
    """Evaluate one entry ``C(i_1..i_n)`` with per-site indices in ``0..3``."""
    if len(indices) != c.n:
        raise ValueError("index count mismatch")
    vec = np.ones(1)
    for comp, idx in zip(c.components, indices):
        if not 0 <= idx <= 3:
            raise ValueError(f"index {idx} outside [0, 3]")
        vec = vec @ comp[:, idx, :]
    return float(vec[0])


def tt_to_density(c: TTCoeff) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix ``sum_i C(i) prod sigma~^{i_l}``."""
    if c.n > MAX_DENSE_SITES:
        raise ValueError(f"refusing dense conversion beyond {MAX_DENSE_SITES} sites")
    acc = np.ones((1, 1, 1), dtype=complex)
    for comp in c.components:
        dim = acc.shape[1]
        acc = np.einsum("apq,aib,ijk->bpjqk", acc, comp, _SIGMA, optimize=True)
        acc = acc.reshape(comp.shape[2], dim * 2, dim * 2)
    return acc[0]


def density_to_coeff(rho: np.ndarray) -> np.ndarray:
    """Full coefficient array ``C(i) = tr(rho prod sigma~^{i_l})`` of shape ``(4,)*n``."""
    rho = np.asarray(rho, dtype=complex)
    n = int(np.log2(rho.shape[0]))
    if rho.shape != (2**n, 2**n):
        raise ValueError("expected a square matrix of power-of-two size")
    if n > MAX_COEFF_SITES:
        raise ValueError(f"refusing coefficient extraction beyond {MAX_COEFF_SITES} sites")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise ValueError("input is not Hermitian")
    # Per-site change of basis: Q[i, 2x+y] = sigma~^i[y, x] realizes the trace pairing.
    q = np.array([[s[y, x] for x in range(2) for y in range(2)] for s in NORMALIZED])
    axes = [ax for k in range(n) for ax in (k, n + k)]
    t = rho.reshape((2,) * (2 * n)).transpose(axes).reshape((4,) * n)
    for _ in range(n):
        t = np.tensordot(t, q, axes=([0], [1]))
    residue = float(np.max(np.abs(t.imag)))
    if residue > 1e-8:
        raise ValueError(f"imaginary residue {residue:.3e}; input not Hermitian enough")
    return t.real


def tt_inner(c1: TTCoeff, c2: TTCoeff) -> float:
    """Frobenius inner product of two coefficient trains without densifying."""
    if c1.n != c2.n:
        raise ValueError("site counts differ")
    env = np.ones((1, 1))
    for a, b in zip(c1.components, c2.components):
        env = np.einsum("ab,aic,bid->cd", env, a, b, optimize=True)
    return float(env[0, 0])


def tt_norm(c: TTCoeff) -> float:
    """``||C||_F`` via a left-orthogonalizing QR sweep (cancellation safe)."""
    carry = np.ones((1, 1))
    for comp in c.components:
        merged = np.einsum("ab,bic->aic", carry, comp)
        carry = np.linalg.qr(merged.reshape(-1, comp.shape[2]), mode="r")
    return float(np.linalg.norm(carry))


def _difference_train(c1: TTCoeff, c2: TTCoeff) -> TTCoeff:
    """Direct-sum train representing ``C1 - C2`` (sign carried by the first block)."""
    comps = [np.concatenate([c1.components[0], -c2.components[0]], axis=2)]
    for a, b in zip(c1.components[1:-1], c2.components[1:-1]):
        block = np.zeros((a.shape[0] + b.shape[0], 4, a.shape[2] + b.shape[2]))
        block[: a.shape[0], :, : a.shape[2]] = a
        block[a.shape[0] :, :, a.shape[2] :] = b
        comps.append(block)
    comps.append(np.concatenate([c1.components[-1], c2.components[-1]], axis=0))
    return TTCoeff(comps)


def tt_frobenius_distance(c1: TTCoeff, c2: TTCoeff) -> float:
    """``||C1 - C2||_F`` without densification.

    Evaluated as the orthogonalized norm of the direct-sum difference train;
    unlike the Gram combination ``<c1,c1> + <c2,c2> - 2<c1,c2>``, this
    resolves distances far below the ~1e-8 cancellation floor.
    """
    if c1.n != c2.n:
        raise ValueError("site counts differ")
    if c1.n == 1:
        return float(np.linalg.norm(c1.components[0] - c2.components[0]))
    return tt_norm(_difference_train(c1, c2))


def tt_pauli_expectation(c: TTCoeff, p: PauliString) -> float:
    """``tr(rho P)`` for an unnormalized Pauli string: ``2^{n/2}`` times the
    matching coefficient entry, scaled by the string coefficient."""
    p.validate_sites(c.n)
    indices = [0] * c.n
    for site, idx in p.indices().items():
        indices[site - 1] = idx
    return p.coefficient * 2.0 ** (c.n / 2.0) * tt_entry(c, indices)


def tt_renyi2(c: TTCoeff, subsystem: Iterable[int]) -> float:
    """Second Renyi entropy ``-log tr(rho_A^2)`` of a 1-based site set ``A``.

    Uses the purity identity ``tr(rho_A^2) = 2^{n-|A|} sum_{i_A} C(i_A, 0...)^2``:
    sites in ``A`` are contracted over all four squared indices, sites outside
    over the squared identity slice with a factor 2.  Validated against the
    dense partial-trace oracle in the test suite.
    """
    sites = set(subsystem)
    if not sites:
        raise ValueError("subsystem must be nonempty")
    if not sites <= set(range(1, c.n + 1)):
        raise ValueError(f"subsystem {sorted(sites)} outside [1, {c.n}]")
    env = np.ones((1, 1))
    for k, comp in enumerate(c.components):
        if k + 1 in sites:
            env = np.einsum("ab,aic,bid->cd", env, comp, comp, optimize=True)
        else:
            ident = comp[:, 0, :]
            env = 2.0 * np.einsum("ab,ac,bd->cd", env, ident, ident, optimize=True)
    purity = float(env[0, 0])
    if purity <= 0.0:
        warnings.warn(f"nonpositive purity {purity:.3e}; clamping", stacklevel=2)
    return float(-np.log(max(purity, PURITY_FLOOR)))

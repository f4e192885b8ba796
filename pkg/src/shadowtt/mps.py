"""Matrix product states: construction, canonical forms, exact evaluation.

An MPS stores one complex tensor per site with shape
``(left bond, physical, right bond)``; the outer bonds have size 1.  Site
indices in the public API are 1-based, matching the Pauli-string convention.
Statevector helpers use site 1 as the most significant qubit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shadowtt.pauli import MATRICES, PauliString

#: Dense statevector conversions are refused beyond this many sites.
MAX_DENSE_SITES = 14


@dataclass
class MPS:
    """Matrix product state as a chain of ``(a_{k-1}, 2, a_k)`` tensors."""

    components: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.components) < 1:
            raise ValueError("MPS needs at least one site")
        self.components = [np.asarray(c, dtype=complex) for c in self.components]
        for k, comp in enumerate(self.components):
            if comp.ndim != 3 or comp.shape[1] != 2:
                raise ValueError(f"site {k + 1}: expected shape (a, 2, b), got {comp.shape}")
            if k > 0 and comp.shape[0] != self.components[k - 1].shape[2]:
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")
        if self.components[0].shape[0] != 1 or self.components[-1].shape[2] != 1:
            raise ValueError("outer bonds must have size 1")

    @property
    def n(self) -> int:
        return len(self.components)

    @property
    def bonds(self) -> list[int]:
        """Bond dimensions ``[a_0, ..., a_n]``."""
        return [self.components[0].shape[0]] + [c.shape[2] for c in self.components]

    def copy(self) -> "MPS":
        return MPS([c.copy() for c in self.components])


def mps_inner(a: MPS, b: MPS) -> complex:
    """Exact inner product ``<a|b>`` via transfer-matrix contraction."""
    if a.n != b.n:
        raise ValueError("site counts differ")
    env = np.ones((1, 1), dtype=complex)
    for ca, cb in zip(a.components, b.components):
        env = np.einsum("ab,ajc,bjd->cd", env, ca.conj(), cb, optimize=True)
    return complex(env[0, 0])


def mps_norm(psi: MPS) -> float:
    return float(np.sqrt(max(mps_inner(psi, psi).real, 0.0)))


def normalize(psi: MPS) -> MPS:
    """Rescale so that ``<psi|psi> = 1``, spreading the factor over all sites."""
    norm = mps_norm(psi)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero state")
    scale = norm ** (-1.0 / psi.n)
    return MPS([c * scale for c in psi.components])


def random_mps(n: int, bond: int, seed: int) -> MPS:
    """Normalized MPS with i.i.d. standard complex Gaussian entries.

    Bond dimensions are capped at ``min(bond, 2^k, 2^(n-k))`` so the state
    never carries redundant bonds.  Deterministic in ``seed``.
    """
    if n < 2:
        raise ValueError("need at least two sites")
    if bond < 1:
        raise ValueError("bond must be >= 1")
    rng = np.random.default_rng(seed)
    dims = [min(bond, 2**k, 2 ** (n - k)) for k in range(n + 1)]
    comps = []
    for k in range(n):
        shape = (dims[k], 2, dims[k + 1])
        comps.append((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0))
    return normalize(MPS(comps))


def _left_orthonormalize(comps: list[np.ndarray], k: int) -> None:
    """QR-split site ``k`` and absorb the remainder into site ``k + 1``."""
    a, _, b = comps[k].shape
    q, r = np.linalg.qr(comps[k].reshape(a * 2, b))
    comps[k] = q.reshape(a, 2, q.shape[1])
    comps[k + 1] = np.einsum("ab,bjc->ajc", r, comps[k + 1])


def _right_orthonormalize(comps: list[np.ndarray], k: int) -> None:
    """Split site ``k`` into L @ Q with Q right-orthonormal; absorb L leftwards."""
    a, _, b = comps[k].shape
    q, r = np.linalg.qr(comps[k].reshape(a, 2 * b).conj().T)
    comps[k] = q.conj().T.reshape(q.shape[1], 2, b)
    comps[k - 1] = np.einsum("ajb,cb->ajc", comps[k - 1], r.conj())


def canonicalize(psi: MPS, center: int) -> MPS:
    """Mixed canonical form centered at 1-based site ``center``.

    Sites left of the center become left-orthonormal, sites right of it
    right-orthonormal; the represented state is unchanged.
    """
    if not 1 <= center <= psi.n:
        raise ValueError(f"center {center} outside [1, {psi.n}]")
    comps = [c.copy() for c in psi.components]
    for k in range(center - 1):
        _left_orthonormalize(comps, k)
    for k in range(psi.n - 1, center - 1, -1):
        _right_orthonormalize(comps, k)
    return MPS(comps)


def mps_to_statevector(psi: MPS) -> np.ndarray:
    """Dense state of length ``2^n``; entry order has site 1 most significant."""
    if psi.n > MAX_DENSE_SITES:
        raise ValueError(f"refusing dense conversion beyond {MAX_DENSE_SITES} sites")
    vec = psi.components[0].reshape(2, -1)
    for comp in psi.components[1:]:
        vec = np.einsum("pa,ajb->pjb", vec, comp).reshape(vec.shape[0] * 2, -1)
    return vec[:, 0]


def statevector_to_mps(v: np.ndarray, max_bond: int | None = None, tol: float = 0.0) -> MPS:
    """Sequential-SVD factorization of a normalized statevector.

    Trailing singular values are discarded greedily while their squared mass
    stays within ``tol`` per bond, then capped at ``max_bond``.  With
    sufficient bond the round trip back to a statevector is exact.
    """
    v = np.asarray(v, dtype=complex).ravel()
    n = int(np.log2(v.size))
    if 2**n != v.size or n < 1:
        raise ValueError("length must be a power of two (>= 2)")
    if abs(np.linalg.norm(v) - 1.0) > 1e-6:
        raise ValueError("statevector must be normalized")
    comps = []
    cur = v.reshape(1, -1)
    for _ in range(n - 1):
        a = cur.shape[0]
        u, s, vh = np.linalg.svd(cur.reshape(a * 2, -1), full_matrices=False)
        r = len(s)
        while r > 1 and float(np.sum(s[r - 1 :] ** 2)) <= tol:
            r -= 1
        if max_bond is not None:
            r = min(r, max_bond)
        comps.append(u[:, :r].reshape(a, 2, r))
        cur = s[:r, None] * vh[:r, :]
    comps.append(cur.reshape(cur.shape[0], 2, 1))
    return MPS(comps)


def mps_expectation(psi: MPS, p: PauliString) -> float:
    """Exact ``<psi| P |psi>`` for a weighted Pauli string, via transfer contraction."""
    p.validate_sites(psi.n)
    indices = p.indices()
    env = np.ones((1, 1), dtype=complex)
    for k, comp in enumerate(psi.components):
        idx = indices.get(k + 1, 0)
        acted = comp if idx == 0 else np.einsum("jk,akb->ajb", MATRICES[idx], comp)
        env = np.einsum("ab,ajc,bjd->cd", env, acted, comp.conj(), optimize=True)
    value = complex(env[0, 0]) * p.coefficient
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return value.real

"""Pure-numpy lane for the hot kernels.

Accumulations run in the same index order as the numba lane (explicit loops
over the small bond/site axes, vectorized over samples), so outputs are
bit-identical between lanes.
"""

from __future__ import annotations

import numpy as np

from shadowtt._rng import unit_array


def sample_sweep(site_mats: np.ndarray, seed: int, count: int, codes: np.ndarray) -> None:
    """Sequential conditional sampling of all sites, vectorized over samples.

    ``site_mats[l, b, o]`` is the site-``l`` component contracted with the
    bra of outcome ``o`` in basis ``b``, zero-padded to the maximal bond.
    Writes measurement codes ``2 * basis + bit`` into ``codes``.
    """
    n, _, _, amax, _ = site_mats.shape
    idx_all = np.arange(count)
    w = np.zeros((count, amax), dtype=np.complex128)
    w[:, 0] = 1.0
    for l in range(n):
        basis = (unit_array(seed, idx_all, l, 0) * 3.0).astype(np.uint8)
        u_out = unit_array(seed, idx_all, l, 1)
        for b in range(3):
            rows = np.nonzero(basis == b)[0]
            if rows.size == 0:
                continue
            wb = w[rows]
            a0 = site_mats[l, b, 0]
            a1 = site_mats[l, b, 1]
            u0 = np.zeros((rows.size, amax), dtype=np.complex128)
            u1 = np.zeros((rows.size, amax), dtype=np.complex128)
            for g in range(amax):
                col = wb[:, g : g + 1]
                u0 += col * a0[g]
                u1 += col * a1[g]
            p0 = np.zeros(rows.size)
            p1 = np.zeros(rows.size)
            for d in range(amax):
                re0, im0 = u0[:, d].real, u0[:, d].imag
                re1, im1 = u1[:, d].real, u1[:, d].imag
                p0 += re0 * re0 + im0 * im0
                p1 += re1 * re1 + im1 * im1
            bit = u_out[rows] * (p0 + p1) >= p0
            chosen = np.where(bit[:, None], u1, u0)
            scale = 1.0 / np.sqrt(np.where(bit, p1, p0))
            w[rows] = chosen * scale[:, None]
            codes[rows, l] = (2 * b + bit).astype(np.uint8)


def obs_value_table(
    codes: np.ndarray,
    factors: np.ndarray,
    n_obs: int,
    coeffs: np.ndarray,
    obs_of_string: np.ndarray,
    ptr: np.ndarray,
    sites: np.ndarray,
    paulis: np.ndarray,
) -> np.ndarray:
    """Per-sample values of weighted Pauli-string observables.

    ``V[j, o] = sum over strings s of observable o of coeffs[s] *
    prod over support of factors[codes[j, site], pauli]``.
    """
    count = codes.shape[0]
    table = np.zeros((count, n_obs))
    for s in range(len(coeffs)):
        v = np.full(count, coeffs[s])
        for t in range(ptr[s], ptr[s + 1]):
            v = v * factors[codes[:, sites[t]], paulis[t]]
        table[:, obs_of_string[s]] += v
    return table

"""Numba lane for the hot kernels (parallel over samples).

Float accumulation order matches the numpy lane exactly: ascending bond
index inside the matvec, ascending output index inside the norm, strings in
declaration order.  Keep the two lanes in lock-step when editing.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 2.0**-53


@njit(cache=True, inline="always")
def _mix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _unit(seed, sample, site, purpose):
    h = _mix64(np.uint64(seed))
    h = _mix64(h + np.uint64(sample))
    h = _mix64(h + np.uint64(site * 4 + purpose))
    return np.float64(h >> np.uint64(11)) * _INV53


@njit(cache=True, parallel=True)
def sample_sweep(site_mats, seed, count, codes):
    n = site_mats.shape[0]
    amax = site_mats.shape[3]
    for j in prange(count):
        w = np.zeros(amax, dtype=np.complex128)
        u0 = np.zeros(amax, dtype=np.complex128)
        u1 = np.zeros(amax, dtype=np.complex128)
        w[0] = 1.0
        for l in range(n):
            b = int(_unit(seed, j, l, 0) * 3.0)
            for d in range(amax):
                u0[d] = 0.0
                u1[d] = 0.0
            for g in range(amax):
                wg = w[g]
                for d in range(amax):
                    u0[d] += wg * site_mats[l, b, 0, g, d]
                    u1[d] += wg * site_mats[l, b, 1, g, d]
            p0 = 0.0
            p1 = 0.0
            for d in range(amax):
                re0, im0 = u0[d].real, u0[d].imag
                re1, im1 = u1[d].real, u1[d].imag
                p0 += re0 * re0 + im0 * im0
                p1 += re1 * re1 + im1 * im1
            bit = 1 if _unit(seed, j, l, 1) * (p0 + p1) >= p0 else 0
            if bit == 1:
                scale = 1.0 / np.sqrt(p1)
                for d in range(amax):
                    w[d] = u1[d] * scale
            else:
                scale = 1.0 / np.sqrt(p0)
                for d in range(amax):
                    w[d] = u0[d] * scale
            codes[j, l] = 2 * b + bit


@njit(cache=True, parallel=True)
def obs_value_table(codes, factors, n_obs, coeffs, obs_of_string, ptr, sites, paulis):
    count = codes.shape[0]
    table = np.zeros((count, n_obs))
    for j in prange(count):
        for s in range(len(coeffs)):
            v = coeffs[s]
            for t in range(ptr[s], ptr[s + 1]):
                v = v * factors[codes[j, sites[t]], paulis[t]]
            table[j, obs_of_string[s]] += v
    return table

"""Counter-based pseudo-random streams (splitmix64 finalizer).

Every random decision in the measurement simulator is a pure function of
``(seed, sample index, site index, purpose)``, so results are independent of
worker count and evaluation order.  Three consistent implementations live
here: plain-Python integers (reference and low-volume use), vectorized
numpy ``uint64``, and the scalar form the numba kernels inline.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer on plain Python integers."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def unit(seed: int, sample: int, site: int, purpose: int) -> float:
    """Uniform deviate in ``[0, 1)`` keyed by the full counter tuple."""
    h = mix64(seed & _MASK)
    h = mix64(h + sample)
    h = mix64(h + site * 4 + purpose)
    return (h >> 11) * _INV53


def unit_array(seed: int, samples: np.ndarray, site: int, purpose: int) -> np.ndarray:
    """Vectorized ``unit`` over an array of sample indices."""
    golden = np.uint64(_GOLDEN)
    mix1 = np.uint64(_MIX1)
    mix2 = np.uint64(_MIX2)

    def _mix(z: np.ndarray) -> np.ndarray:
        z = z + golden
        z = (z ^ (z >> np.uint64(30))) * mix1
        z = (z ^ (z >> np.uint64(27))) * mix2
        return z ^ (z >> np.uint64(31))

    h = _mix(np.full(len(samples), np.uint64(seed & _MASK)))
    h = _mix(h + samples.astype(np.uint64))
    h = _mix(h + np.uint64(site * 4 + purpose))
    return (h >> np.uint64(11)).astype(np.float64) * _INV53


class KeyedStream:
    """Sequential uniform stream keyed by a seed and an integer path.

    Used for deterministic configuration-time draws (sketch families); the
    heavy per-sample streams use ``unit`` / ``unit_array`` directly.
    """

    def __init__(self, seed: int, *path: int) -> None:
        state = mix64(seed & _MASK)
        for part in path:
            state = mix64(state + part)
        self._state = state
        self._counter = 0

    def unit(self) -> float:
        self._counter += 1
        return (mix64(self._state + self._counter) >> 11) * _INV53

    def integer(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)``."""
        return min(int(self.unit() * bound), bound - 1)

    def sign(self) -> float:
        return 1.0 if self.unit() < 0.5 else -1.0

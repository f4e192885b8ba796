"""Kernel-lane selection: numba-jitted hot loops with a pure-numpy fallback.

The environment variable ``SHADOWTT_BACKEND`` picks the lane: ``numba``
(default when numba imports), ``numpy``, or ``auto``.  Both lanes perform
floating-point accumulation in the same order, so sampled batches and
per-sample value tables are bit-identical across lanes; which lane runs is
purely a speed choice.
"""

from __future__ import annotations

import os

ENV_VAR = "SHADOWTT_BACKEND"

_numba_ok: bool | None = None


def have_numba() -> bool:
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def active_backend(override: str | None = None) -> str:
    """Resolve the kernel lane: explicit override > env var > auto-detect."""
    choice = (override or os.environ.get(ENV_VAR, "auto") or "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if have_numba() else "numpy"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not have_numba():
            raise RuntimeError("numba backend requested but numba is not importable")
        return "numba"
    raise ValueError(f"unknown backend {choice!r} (use 'auto', 'numba' or 'numpy')")


def set_workers(workers: int) -> None:
    """Cap numba's thread pool; results never depend on this."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if have_numba():
        import numba

        numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))

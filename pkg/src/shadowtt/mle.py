"""Maximum-likelihood MPS training on Pauli measurement records.

The loss is the negative log-likelihood of the recorded outcomes under the
Born rule, plus the log of the state norm so the objective is invariant
under rescaling:

    L(phi) = -(1/B) sum_j log |<b_j| U_j |phi>|^2 + log <phi|phi>.

Optimization sweeps one site at a time in mixed canonical form (forward
then backward per sweep), taking a plain gradient step on the centered
component.  The gradient convention is the Wirtinger derivative with
respect to the conjugated component, so a step along its negative always
descends; the real-parameter derivative is twice its real/imaginary parts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from shadowtt.mps import MPS, canonicalize, mps_inner
from shadowtt.shadows import ShadowBatch, ShadowSample, _EIGVECS

#: Amplitudes below this magnitude are clamped out of the loss and gradient.
AMPLITUDE_FLOOR = 1e-150


@dataclass
class MLEConfig:
    """Training knobs for the one-site sweep."""

    learning_rate: float = 0.1
    max_sweeps: int = 100
    target_nll: float | None = None
    bond: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0.0:
            raise ValueError("learning rate must be nonnegative")
        if self.max_sweeps < 1 or self.bond < 1:
            raise ValueError("max_sweeps and bond must be >= 1")


def _bras(batch: ShadowBatch) -> list[np.ndarray]:
    """Per-site (count, 2) rotated basis bras ``<b| U`` for every sample."""
    bases = batch.codes // 2
    bits = batch.codes % 2
    return [_EIGVECS[bases[:, l], bits[:, l]].conj() for l in range(batch.n)]


def amplitude(phi: MPS, sample: ShadowSample) -> complex:
    """Exact ``<b| U |phi>`` for one measurement record."""
    vec = np.ones(1, dtype=complex)
    for l, comp in enumerate(phi.components):
        bra = _EIGVECS[sample.bases[l], sample.bits[l]].conj()
        vec = vec @ (bra[0] * comp[:, 0, :] + bra[1] * comp[:, 1, :])
    return complex(vec[0])


def _amplitudes(components: list[np.ndarray], bras: list[np.ndarray]) -> np.ndarray:
    """All-sample amplitudes via a batched left-to-right sweep."""
    vec = np.ones((bras[0].shape[0], 1), dtype=complex)
    for comp, bra in zip(components, bras):
        vec = np.einsum("ja,asb,js->jb", vec, comp, bra, optimize=True)
    return vec[:, 0]


def _log_probs(amps: np.ndarray) -> tuple[np.ndarray, int]:
    clamped = int(np.sum(np.abs(amps) < AMPLITUDE_FLOOR))
    probs = np.maximum(np.abs(amps) ** 2, AMPLITUDE_FLOOR**2)
    return np.log(probs), clamped


def nll(phi: MPS, batch: ShadowBatch) -> float:
    """Negative log-likelihood; exactly invariant under rescaling of ``phi``."""
    if phi.n != batch.n:
        raise ValueError("site count mismatch")
    logp, clamped = _log_probs(_amplitudes(phi.components, _bras(batch)))
    if clamped:
        warnings.warn(f"{clamped} amplitudes clamped at {AMPLITUDE_FLOOR}", stacklevel=2)
    norm_sq = mps_inner(phi, phi).real
    return float(-np.mean(logp) + np.log(norm_sq))


def _norm_envs(components: list[np.ndarray], site: int) -> tuple[np.ndarray, np.ndarray]:
    """Left/right transfer environments of ``<phi|phi>`` around one site."""
    left = np.ones((1, 1), dtype=complex)
    for comp in components[:site]:
        left = np.einsum("ab,ajc,bjd->cd", left, comp.conj(), comp, optimize=True)
    right = np.ones((1, 1), dtype=complex)
    for comp in reversed(components[site + 1 :]):
        right = np.einsum("ajb,cjd,bd->ac", comp.conj(), comp, right, optimize=True)
    return left, right


def _data_gradient(
    comp: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
    bra: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Amplitudes and the data term of the gradient at the centered site."""
    amps = np.einsum("ja,asb,js,jb->j", left, comp, bra, right, optimize=True)
    small = np.abs(amps) < AMPLITUDE_FLOOR
    inv = np.where(small, 0.0, 1.0 / np.conj(np.where(small, 1.0, amps)))
    grad = -np.einsum("ja,js,jb,j->asb", left.conj(), bra.conj(), right.conj(), inv, optimize=True)
    return amps, grad / amps.shape[0], int(np.sum(small))


def nll_gradient(phi: MPS, batch: ShadowBatch, site: int) -> np.ndarray:
    """Wirtinger gradient dL/d(conj F) of the 1-based ``site`` component.

    Valid in any gauge (the norm term contracts explicit transfer
    environments); in mixed canonical form centered at ``site`` the norm
    term reduces to ``F / ||phi||^2``.  Clamped amplitudes are excluded
    from the data sum with a warning.
    """
    if not 1 <= site <= phi.n:
        raise ValueError(f"site {site} outside [1, {phi.n}]")
    bras = _bras(batch)
    comps = phi.components
    left_amp = np.ones((batch.count, 1), dtype=complex)
    for l in range(site - 1):
        left_amp = np.einsum("ja,asb,js->jb", left_amp, comps[l], bras[l], optimize=True)
    right_amp = np.ones((batch.count, 1), dtype=complex)
    for l in range(phi.n - 1, site - 1, -1):
        right_amp = np.einsum("asb,js,jb->ja", comps[l], bras[l], right_amp, optimize=True)
    _, data_grad, clamped = _data_gradient(comps[site - 1], left_amp, right_amp, bras[site - 1])
    if clamped:
        warnings.warn(f"{clamped} amplitudes excluded from gradient", stacklevel=2)
    env_l, env_r = _norm_envs(comps, site - 1)
    norm_sq = float(
        np.einsum("ab,ajc,bjd,cd->", env_l, comps[site - 1].conj(), comps[site - 1], env_r).real
    )
    norm_grad = np.einsum("ab,bjd,cd->ajc", env_l, comps[site - 1], env_r, optimize=True)
    return data_grad + norm_grad / norm_sq


def _shift_right(comps: list[np.ndarray], i: int) -> None:
    a, _, b = comps[i].shape
    q, r = np.linalg.qr(comps[i].reshape(a * 2, b))
    comps[i] = q.reshape(a, 2, q.shape[1])
    comps[i + 1] = np.einsum("ab,bjc->ajc", r, comps[i + 1])


def _shift_left(comps: list[np.ndarray], i: int) -> None:
    a, _, b = comps[i].shape
    q, r = np.linalg.qr(comps[i].reshape(a, 2 * b).conj().T)
    comps[i] = q.conj().T.reshape(q.shape[1], 2, b)
    comps[i - 1] = np.einsum("ajb,cb->ajc", comps[i - 1], r.conj())


def train(phi0: MPS, batch: ShadowBatch, cfg: MLEConfig) -> tuple[MPS, list[tuple[int, int, float]]]:
    """One-site sweep optimization of the NLL (forward then backward per sweep).

    Returns the final state and the per-update trace of
    ``(sweep, site, nll)`` rows.  Stops early once the loss reaches
    ``cfg.target_nll``; a non-finite loss aborts with a warning, returning
    the trace accumulated so far.
    """
    if phi0.n != batch.n:
        raise ValueError("site count mismatch")
    n = phi0.n
    eta = cfg.learning_rate
    comps = [c.copy() for c in canonicalize(phi0, 1).components]
    comps[0] = comps[0] / np.linalg.norm(comps[0])
    bras = _bras(batch)
    count = batch.count
    trace: list[tuple[int, int, float]] = []
    clamp_total = 0

    # Right amplitude caches for the coming forward pass (center at site 0).
    right_cache: list[np.ndarray | None] = [None] * (n + 1)
    right_cache[n] = np.ones((count, 1), dtype=complex)
    for l in range(n - 1, 0, -1):
        right_cache[l] = np.einsum(
            "asb,js,jb->ja", comps[l], bras[l], right_cache[l + 1], optimize=True
        )

    def update_site(i: int, left: np.ndarray, right: np.ndarray, sweep: int) -> float:
        nonlocal clamp_total
        _, data_grad, clamped = _data_gradient(comps[i], left, right, bras[i])
        clamp_total += clamped
        norm_sq = float(np.sum(np.abs(comps[i]) ** 2))
        grad = data_grad + comps[i] / norm_sq
        comps[i] = comps[i] - eta * grad
        amps = np.einsum("ja,asb,js,jb->j", left, comps[i], bras[i], right, optimize=True)
        logp, clamped = _log_probs(amps)
        clamp_total += clamped
        value = float(-np.mean(logp) + np.log(np.sum(np.abs(comps[i]) ** 2)))
        trace.append((sweep, i + 1, value))
        return value

    done = False
    for sweep in range(1, cfg.max_sweeps + 1):
        left_cache: list[np.ndarray] = [np.ones((count, 1), dtype=complex)]
        for i in range(n):
            value = update_site(i, left_cache[i], right_cache[i + 1], sweep)
            if not np.isfinite(value):
                warnings.warn(f"non-finite NLL at sweep {sweep}, site {i + 1}; aborting")
                done = True
                break
            if cfg.target_nll is not None and value <= cfg.target_nll:
                done = True
                break
            if i < n - 1:
                _shift_right(comps, i)
                left_cache.append(
                    np.einsum("ja,asb,js->jb", left_cache[i], comps[i], bras[i], optimize=True)
                )
        if done:
            break
        for i in range(n - 1, -1, -1):
            value = update_site(i, left_cache[i], right_cache[i + 1], sweep)
            if not np.isfinite(value):
                warnings.warn(f"non-finite NLL at sweep {sweep}, site {i + 1}; aborting")
                done = True
                break
            if cfg.target_nll is not None and value <= cfg.target_nll:
                done = True
                break
            if i > 0:
                _shift_left(comps, i)
                right_cache[i] = np.einsum(
                    "asb,js,jb->ja", comps[i], bras[i], right_cache[i + 1], optimize=True
                )
        if done:
            break
    if clamp_total:
        warnings.warn(f"{clamp_total} clamped amplitudes during training")
    return MPS(comps), trace

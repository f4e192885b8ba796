"""Numerical diagnostics behind the recovery error bounds.

Two device families live here, both consumed by the verification suite:

* the identity-gauge form of a coefficient train relative to a sketch
  family (the gauge in which each interior component solves
  ``G_k . Z_k = B_k`` directly), together with the stability constants
  ``c_Z`` and ``c_G`` of that system;
* train-perturbation helpers: merged dense evaluation, the unfolding
  pseudoinverse constant ``c_F``, and the relative-error bound it implies.

The tomography pipeline itself never uses the identity gauge; it exists so
the componentwise error bound can be exercised in its native setting.
"""

from __future__ import annotations

import numpy as np

from shadowtt.linalg import least_squares
from shadowtt.paulitt import TTCoeff
from shadowtt.sketch import SketchFamily, SketchMoments, tt_moments, tt_sketch_matrices


def identity_gauge(tt: TTCoeff, family: SketchFamily) -> tuple[list[np.ndarray], SketchMoments]:
    """Gauge-transform a train so every left sketched factor is the identity.

    Requires square, invertible left factors (sketch sizes equal to the true
    ranks).  Returns the transformed components together with the exact
    moments; in this gauge ``B_k`` equals ``G_k`` contracted with ``Z_k``
    (plain ``B_n = G_n`` at the right boundary).
    """
    a_left, _ = tt_sketch_matrices(tt, family)
    n = tt.n
    for cut, mat in enumerate(a_left):
        if mat.shape[0] != mat.shape[1]:
            raise ValueError(f"cut {cut}: left factor {mat.shape} is not square")
        if np.linalg.cond(mat) > 1e10:
            raise ValueError(f"cut {cut}: left factor numerically singular")
    inverses = [np.linalg.inv(mat) for mat in a_left]
    comps = []
    for s, g in enumerate(tt.components):
        out = g
        if s > 0:
            out = np.einsum("za,aib->zib", a_left[s - 1], out)
        if s < n - 1:
            out = np.einsum("aib,bm->aim", out, inverses[s])
        comps.append(out)
    return comps, tt_moments(tt, family)


def stability_constants(components: list[np.ndarray], z: list[np.ndarray], ranks: list[int]):
    """Stability constants of the sketched systems: ``c_Z`` from the kept
    singular values of each cross-Gram matrix, ``c_G`` from component norms."""
    c_z = 1.0
    for cut, mat in enumerate(z):
        svals = np.linalg.svd(mat, compute_uv=False)
        c_z = max(c_z, 2.0 / float(svals[ranks[cut] - 1]))
    c_g = max(1.0, max(float(np.linalg.norm(g)) for g in components))
    return c_z, c_g


def component_error_bound(c_z: float, c_g: float, eps1: float, eps2: float) -> float:
    """Right-hand side of the componentwise bound on ``||G_hat - G||_F^2``."""
    return 2.0 * c_z**2 * (c_g**2 * eps1**2 + eps2**2)


def solve_identity_gauge(
    g_true: list[np.ndarray], z: list[np.ndarray], b: list[np.ndarray]
) -> list[np.ndarray]:
    """Slice-wise least-squares recovery in the identity gauge.

    Interior and left-boundary sites solve ``X . Z_k = B_k`` row-block-wise;
    the right boundary is the moment itself.
    """
    n = len(g_true)
    out = []
    for s in range(n):
        if s == n - 1:
            out.append(b[s].reshape(g_true[s].shape))
            continue
        flat = b[s].reshape(-1, b[s].shape[-1])
        g = least_squares(z[s], flat)
        out.append(g.reshape(g_true[s].shape))
    return out


def tt_dense(components: list[np.ndarray]) -> np.ndarray:
    """Dense array of a small train with arbitrary physical dimensions."""
    acc = np.ones((1, 1))
    for comp in components:
        acc = np.einsum("pa,aib->pib", acc, comp).reshape(-1, comp.shape[2])
    dims = tuple(c.shape[1] for c in components)
    return acc[:, 0].reshape(dims)


def unfolding_pinv_constant(components: list[np.ndarray]) -> float:
    """Max pseudoinverse norm over middle-index unfoldings ``F_k(i; (a, b))``.

    Each unfolding must have full column rank (physical dimension at least
    the bond product); raises otherwise since the perturbation bound does
    not apply.
    """
    worst = 0.0
    for k, comp in enumerate(components):
        a, m, b = comp.shape
        mat = comp.transpose(1, 0, 2).reshape(m, a * b)
        if m < a * b:
            raise ValueError(f"site {k + 1}: physical dim {m} below bond product {a * b}")
        smin = float(np.linalg.svd(mat, compute_uv=False)[-1])
        if smin <= 0.0:
            raise ValueError(f"site {k + 1}: unfolding is rank deficient")
        worst = max(worst, 1.0 / smin)
    return worst


def perturbation_ratio(
    components: list[np.ndarray], perturbed: list[np.ndarray]
) -> float:
    """Relative Frobenius error ``||D - D~||_F / ||D||_F`` via dense evaluation."""
    base = tt_dense(components)
    return float(np.linalg.norm(tt_dense(perturbed) - base) / np.linalg.norm(base))

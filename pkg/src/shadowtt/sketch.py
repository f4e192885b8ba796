"""Tensor-train recovery of the coefficient tensor from sketched moments.

The recovery pipeline estimates, for every cut of the chain, a cross-Gram
matrix ``Z`` (left observables against right observables) and, for every
site, a three-index moment tensor ``B`` (left observables, middle Pauli
index, right observables).  An SVD of each ``Z`` fixes the internal gauge
and yields per-cut factors; each site component then solves a small
two-sided least-squares system against its ``B``.  Moments can come either
from a shadow trace table (the estimated path) or from exact expectation
values on a known state (the noiseless consistency path).

Sketch observables are weighted sums of low-weight Pauli strings on their
side of the cut, with total weight at most 1, so every required estimate is
a bounded-variance local observable.  Two constructors are provided: a
random windowed family and a deterministic family of all 1- and 2-local
strings.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from shadowtt import _kernels_numpy
from shadowtt._rng import KeyedStream
from shadowtt.backend import active_backend
from shadowtt.linalg import least_squares, truncated_svd
from shadowtt.mps import MPS, mps_expectation
from shadowtt.paulitt import TTCoeff, mps_to_tt_coeff
from shadowtt.pauli import LABELS, PauliString, product_string
from shadowtt.shadows import STRING_FACTORS, TRACE_TABLE, TraceTable

#: Default relative singular-value threshold for rank selection.
RANK_THRESHOLD = 1e-2

#: Cuts whose kept spectrum dips below this relative level get reduced.
ILL_CONDITION_LEVEL = 1e-6

Observable = list[PauliString]


@dataclass
class SketchFamily:
    """Implicit sketch tensors: per cut, left and right observable lists.

    Cut ``c`` (0-based, between 1-based sites ``c + 1`` and ``c + 2``)
    carries ``r_tilde[c]`` observables per side.  Left observables act on
    sites ``<= c + 1``, right observables on sites ``>= c + 2``; each is a
    weighted Pauli-string list of total weight at most 1.
    """

    n: int
    left_obs: list[list[Observable]]
    right_obs: list[list[Observable]]
    window: int
    seed: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("sketching needs at least two sites")
        if len(self.left_obs) != self.n - 1 or len(self.right_obs) != self.n - 1:
            raise ValueError("expected one observable list per cut and side")
        for cut in range(self.n - 1):
            for obs in self.left_obs[cut]:
                self._check_observable(obs, max_site=cut + 1)
            for obs in self.right_obs[cut]:
                self._check_observable(obs, min_site=cut + 2)

    def _check_observable(
        self, obs: Observable, max_site: int | None = None, min_site: int | None = None
    ) -> None:
        weight = 0.0
        for p in obs:
            p.validate_sites(self.n)
            for site in p.support:
                if max_site is not None and site > max_site:
                    raise ValueError(f"string crosses its cut: site {site} > {max_site}")
                if min_site is not None and site < min_site:
                    raise ValueError(f"string crosses its cut: site {site} < {min_site}")
            weight += abs(p.coefficient)
        if weight > 1.0 + 1e-12:
            raise ValueError(f"observable weight {weight} exceeds 1")

    @property
    def r_tilde(self) -> list[int]:
        """Right-side sketch sizes per cut (the default family is square; a
        cut may carry fewer left observables when its window is truncated)."""
        return [len(obs) for obs in self.right_obs]


def _random_observable(
    window_sites: list[int], stream: KeyedStream, strings: int, seen: set
) -> Observable:
    """A weight-1 combination of ``strings`` distinct non-identity strings.

    Draws are redrawn (boundedly) while their sign class - the string set
    with signs canonicalized up to a global flip - repeats an earlier
    observable of the same cut and side; linearly dependent duplicates would
    otherwise degrade the cross-Gram conditioning on small windows.
    """
    span = 4 ** len(window_sites) - 1
    for _ in range(64):
        picks: list[int] = []
        while len(picks) < strings:
            draw = stream.integer(span) + 1
            if draw not in picks:
                picks.append(draw)
        signs = [stream.sign() for _ in picks]
        order = np.argsort(picks)
        flip = signs[order[0]]
        key = (
            tuple(picks[i] for i in order),
            tuple(flip * signs[i] for i in order),
        )
        if key not in seen:
            seen.add(key)
            break
    obs = []
    for code, sign in zip(picks, signs):
        support = {}
        for site in window_sites:
            code, digit = divmod(code, 4)
            if digit:
                support[site] = LABELS[digit]
        obs.append(PauliString(support, sign / strings))
    return obs


def default_sketch_family(
    n: int, r_tilde: int | list[int], window: int, seed: int
) -> SketchFamily:
    """Identity-anchored random local sketch family.

    Per cut and side, observable 0 is the identity (weight 1) and the rest
    are random sign-weighted combinations of three distinct non-identity
    Pauli strings supported within ``window`` sites of the cut, normalized
    to total weight 1.  Deterministic in ``seed``.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    sizes = [r_tilde] * (n - 1) if isinstance(r_tilde, int) else list(r_tilde)
    if len(sizes) != n - 1:
        raise ValueError("need one sketch size per cut")
    for size in sizes:
        if size < 1 or size > 4**window:
            raise ValueError(f"sketch size {size} outside [1, 4^window]")
    left, right = [], []
    for cut in range(n - 1):
        left_sites = list(range(max(1, cut + 2 - window), cut + 2))
        right_sites = list(range(cut + 2, min(n, cut + 1 + window) + 1))
        left_cut, right_cut = [], []
        seen_left: set = set()
        seen_right: set = set()
        for zeta in range(sizes[cut]):
            if zeta == 0:
                left_cut.append([PauliString({}, 1.0)])
                right_cut.append([PauliString({}, 1.0)])
            else:
                left_cut.append(
                    _random_observable(left_sites, KeyedStream(seed, cut, 0, zeta), 3, seen_left)
                )
                right_cut.append(
                    _random_observable(right_sites, KeyedStream(seed, cut, 1, zeta), 3, seen_right)
                )
        left.append(left_cut)
        right.append(right_cut)
    return SketchFamily(n=n, left_obs=left, right_obs=right, window=window, seed=seed)


def two_local_sketch_family(n: int, pair_range: int = 1, seed: int = 0) -> SketchFamily:
    """Deterministic sketch family of unit-weight 1- and 2-local strings.

    Per cut and side: the identity, every single-site Pauli anywhere in the
    half chain, and every two-site string on pairs separated by at most
    ``pair_range``.  Each observable is one weight-1 string, so every moment
    entry stays a bounded-variance local estimate while long-range two-point
    structure enters the linear systems explicitly.  Sketch sizes grow
    linearly with the half-chain length, which is fine at exact-oracle scale.
    """
    if pair_range < 1:
        raise ValueError("pair_range must be >= 1")

    def side(sites: list[int]) -> list[Observable]:
        obs: list[Observable] = [[PauliString({}, 1.0)]]
        for s in sites:
            for label in ("X", "Y", "Z"):
                obs.append([PauliString({s: label}, 1.0)])
        for i, a in enumerate(sites):
            for b in sites[i + 1 :]:
                if b - a > pair_range:
                    break
                for la in ("X", "Y", "Z"):
                    for lb in ("X", "Y", "Z"):
                        obs.append([PauliString({a: la, b: lb}, 1.0)])
        return obs

    left = [side(list(range(1, cut + 2))) for cut in range(n - 1)]
    right = [side(list(range(cut + 2, n + 1))) for cut in range(n - 1)]
    return SketchFamily(n=n, left_obs=left, right_obs=right, window=pair_range, seed=seed)


@dataclass
class SketchMoments:
    """Estimated (or exact) moments, optionally with per-cut SVD factors.

    ``b[s]`` has shape ``(r~_{s-1}, 4, r~_s)`` with the boundary sites
    dropping their missing axis; ``z[c]`` is ``(r~_c, r~_c)``.  After
    factorization, ``a_left[c] @ a_right[c]`` is the best rank-``ranks[c]``
    approximation of ``z[c]`` with ``a_left`` orthonormal.
    """

    n: int
    b: list[np.ndarray]
    z: list[np.ndarray]
    spectra: list[np.ndarray] | None = None
    a_left: list[np.ndarray] | None = None
    a_right: list[np.ndarray] | None = None
    ranks: list[int] | None = None
    warnings: list[str] = field(default_factory=list)


def _middle_string(site: int, idx: int) -> PauliString:
    return PauliString({} if idx == 0 else {site + 1: LABELS[idx]}, 1.0)


def exact_moments(psi: MPS, family: SketchFamily) -> SketchMoments:
    """Infinite-sample moments via exact MPS expectations (oracle path).

    Every entry is a sum over string pairs of ``<psi| L sigma~ R |psi>``;
    the middle Pauli carries its ``1/sqrt(2)`` normalization explicitly.
    """
    if psi.n != family.n:
        raise ValueError("site count mismatch")
    n = psi.n

    def pair_sum(left: Observable, mid: PauliString, right: Observable, scale: float) -> float:
        total = 0.0
        for p in left:
            for q in right:
                total += scale * mps_expectation(psi, product_string(p, mid, q))
        return total

    identity = [PauliString({}, 1.0)]
    z = []
    for cut in range(n - 1):
        lo, ro = family.left_obs[cut], family.right_obs[cut]
        z.append(
            np.array(
                [[pair_sum(l, PauliString({}), r, 1.0) for r in ro] for l in lo]
            )
        )
    b = []
    for s in range(n):
        lo = family.left_obs[s - 1] if s > 0 else [identity]
        ro = family.right_obs[s] if s < n - 1 else [identity]
        block = np.array(
            [
                [
                    [
                        pair_sum(l, _middle_string(s, i), r, 1.0 / np.sqrt(2.0))
                        for r in ro
                    ]
                    for i in range(4)
                ]
                for l in lo
            ]
        )
        if s == 0:
            block = block[0]
        elif s == n - 1:
            block = block[:, :, 0]
        b.append(block)
    return SketchMoments(n=n, b=b, z=z)


def _family_arrays(observables: list[Observable], n: int):
    """Flatten one side of one cut into the kernel string encoding."""
    coeffs, owner, ptr, sites, paulis = [], [], [0], [], []
    for o, obs in enumerate(observables):
        for p in obs:
            coeffs.append(p.coefficient)
            owner.append(o)
            for site, idx in p.sorted_support():
                sites.append(site - 1)
                paulis.append(idx)
            ptr.append(len(sites))
    return (
        np.asarray(coeffs, dtype=np.float64),
        np.asarray(owner, dtype=np.int64),
        np.asarray(ptr, dtype=np.int64),
        np.asarray(sites, dtype=np.int64),
        np.asarray(paulis, dtype=np.int64),
    )


def _value_tables(table: TraceTable, family: SketchFamily, backend: str | None):
    """Per-sample per-observable value tables for every cut and side."""
    lane = active_backend(backend)
    if lane == "numba":
        from shadowtt import _kernels_numba as kernels
    else:
        kernels = _kernels_numpy
    vl, vr = [], []
    for cut in range(family.n - 1):
        for side, out in ((family.left_obs[cut], vl), (family.right_obs[cut], vr)):
            coeffs, owner, ptr, sites, paulis = _family_arrays(side, family.n)
            out.append(
                kernels.obs_value_table(
                    table.codes, STRING_FACTORS, len(side), coeffs, owner, ptr, sites, paulis
                )
            )
    return vl, vr


def _grouped(values: np.ndarray, w: int) -> np.ndarray:
    return values.reshape(w, values.shape[0] // w, *values.shape[1:])


def estimate_moments(
    table: TraceTable,
    family: SketchFamily,
    median_of_means: bool = False,
    backend: str | None = None,
) -> SketchMoments:
    """Moments from a shadow trace table.

    Per-sample observable values factor across the cut (disjoint supports),
    so each moment entry is a mean of elementwise products of two value
    columns; with ``median_of_means`` the median over the batch's contiguous
    group means replaces the grand mean.
    """
    if table.n != family.n:
        raise ValueError("site count mismatch")
    n = family.n
    w = table.w_groups if median_of_means else 1
    vl, vr = _value_tables(table, family, backend)
    m = table.count // w

    def aggregate(stacked: np.ndarray) -> np.ndarray:
        return stacked[0] if w == 1 else np.median(stacked, axis=0)

    z = []
    for cut in range(n - 1):
        lg, rg = _grouped(vl[cut], w), _grouped(vr[cut], w)
        zg = np.stack([lg[g].T @ rg[g] for g in range(w)]) / m
        z.append(aggregate(zg))
    b = []
    mids = TRACE_TABLE[table.codes]  # (count, n, 4): normalized middle-site traces
    for s in range(n):
        mid = _grouped(mids[:, s, :], w)
        if s == 0:
            bg = np.stack([mid[g].T @ _grouped(vr[0], w)[g] for g in range(w)]) / m
        elif s == n - 1:
            bg = np.stack([_grouped(vl[n - 2], w)[g].T @ mid[g] for g in range(w)]) / m
        else:
            lg, rg = _grouped(vl[s - 1], w), _grouped(vr[s], w)
            bg = (
                np.stack(
                    [
                        np.stack(
                            [(lg[g] * mid[g][:, i : i + 1]).T @ rg[g] for i in range(4)],
                            axis=1,
                        )
                        for g in range(w)
                    ]
                )
                / m
            )
        b.append(aggregate(bg))
    return SketchMoments(n=n, b=b, z=z)


def factorize_cuts(
    moments: SketchMoments,
    ranks: list[int] | None = None,
    threshold: float = RANK_THRESHOLD,
) -> SketchMoments:
    """Per-cut SVD factorization ``Z ~ a_left @ a_right`` in the SVD gauge.

    Target ranks are taken from ``ranks`` when given, otherwise from the
    relative singular-value threshold.  A cut whose kept spectrum falls
    below ``ILL_CONDITION_LEVEL * s_1`` is reduced further and flagged,
    since solving at full rank would amplify noise without bound.
    """
    n = moments.n
    spectra, a_left, a_right, chosen, notes = [], [], [], [], []
    for cut in range(n - 1):
        z = moments.z[cut]
        svals = np.linalg.svd(z, compute_uv=False)
        spectra.append(svals)
        if ranks is not None:
            r = int(ranks[cut])
            if not 1 <= r <= min(z.shape):
                raise ValueError(f"cut {cut}: rank {r} out of range for {z.shape}")
        else:
            r = max(1, int(np.sum(svals >= threshold * svals[0])))
        while r > 1 and svals[r - 1] < ILL_CONDITION_LEVEL * svals[0]:
            r -= 1
            notes.append(f"cut {cut}: ill-conditioned, rank reduced to {r}")
        result = truncated_svd(z, r)
        a_left.append(result.left_factor)
        a_right.append(result.singular_values[:, None] * result.right_factor)
        chosen.append(r)
    return SketchMoments(
        n=n,
        b=moments.b,
        z=moments.z,
        spectra=spectra,
        a_left=a_left,
        a_right=a_right,
        ranks=chosen,
        warnings=list(moments.warnings) + notes,
    )


def solve_components(moments: SketchMoments) -> tuple[TTCoeff, list[float]]:
    """Recover every train component from the factored moments.

    Interior sites apply the left factor's transpose first (exact, since the
    SVD gauge makes it orthonormal) and then a right least-squares solve;
    the boundary sites reduce to single-sided systems.  Returns the train
    and the per-site residuals of the full bilinear systems.
    """
    if moments.a_left is None or moments.a_right is None:
        raise ValueError("factorize_cuts must run before solve_components")
    n = moments.n
    comps, residuals = [], []
    for s in range(n):
        b = moments.b[s]
        if s == 0:
            g = least_squares(moments.a_right[0], b)
            residuals.append(float(np.linalg.norm(g @ moments.a_right[0] - b)))
            comps.append(g.reshape(1, 4, -1))
        elif s == n - 1:
            u = moments.a_left[n - 2]
            g = u.T @ b
            residuals.append(float(np.linalg.norm(u @ g - b)))
            comps.append(g.reshape(g.shape[0], 4, 1))
        else:
            u = moments.a_left[s - 1]
            y = np.einsum("zt,zim->tim", u, b)
            rows = y.shape[0] * 4
            g = least_squares(moments.a_right[s], y.reshape(rows, -1))
            g = g.reshape(y.shape[0], 4, -1)
            pred = np.einsum("zt,tim,mu->ziu", u, g, moments.a_right[s])
            residuals.append(float(np.linalg.norm(pred - b)))
            comps.append(g)
    return TTCoeff(comps), residuals


@dataclass
class TomographyReport:
    """Recovered train plus the diagnostics the solve produced along the way."""

    recovered: TTCoeff
    singular_values: list[np.ndarray]
    residuals: list[float]
    ranks: list[int]
    warnings: list[str]
    c_z: float | None = None
    c_g: float | None = None
    family_info: dict | None = None


def tt_sketch_matrices(tt: TTCoeff, family: SketchFamily):
    """Exact sketched half-chain factors of a known coefficient train.

    Returns per cut the pair ``(A_left, A_right)`` with
    ``A_left[c] = S_left . C_left`` of shape ``(r~_c, r_c)`` and
    ``A_right[c] = C_right . S_right`` of shape ``(r_c, r~_c)``.
    """
    if tt.n != family.n:
        raise ValueError("site count mismatch")
    n = tt.n
    a_left, a_right = [], []
    for cut in range(n - 1):
        rows = []
        for obs in family.left_obs[cut]:
            acc = np.zeros(tt.components[cut].shape[2])
            for p in obs:
                vec = np.ones(1)
                idx = p.indices()
                for l in range(cut + 1):
                    vec = vec @ tt.components[l][:, idx.get(l + 1, 0), :]
                acc = acc + p.coefficient * 2.0 ** ((cut + 1) / 2.0) * vec
            rows.append(acc)
        a_left.append(np.array(rows))
        cols = []
        for obs in family.right_obs[cut]:
            acc = np.zeros(tt.components[cut + 1].shape[0])
            for p in obs:
                vec = np.ones(1)
                idx = p.indices()
                for l in range(n - 1, cut, -1):
                    vec = tt.components[l][:, idx.get(l + 1, 0), :] @ vec
                acc = acc + p.coefficient * 2.0 ** ((n - cut - 1) / 2.0) * vec
            cols.append(acc)
        a_right.append(np.array(cols).T)
    return a_left, a_right


def tt_moments(tt: TTCoeff, family: SketchFamily) -> SketchMoments:
    """Exact moments of a known train, contracted through the train itself.

    Fast equivalent of ``exact_moments`` for diagnostics; the two paths are
    cross-checked in the test suite.
    """
    a_left, a_right = tt_sketch_matrices(tt, family)
    n = tt.n
    z = [a_left[c] @ a_right[c] for c in range(n - 1)]
    b = []
    for s in range(n):
        g = tt.components[s]
        if s == 0:
            b.append(np.einsum("aib,bm->im", g, a_right[0]))
        elif s == n - 1:
            b.append(np.einsum("za,aib->zi", a_left[n - 2], g))
        else:
            b.append(np.einsum("za,aib,bm->zim", a_left[s - 1], g, a_right[s]))
    return SketchMoments(n=n, b=b, z=z)


def _diagnostics(truth: MPS, family: SketchFamily, ranks: list[int]):
    tt = mps_to_tt_coeff(truth)
    exact = tt_moments(tt, family)
    margins = []
    for cut, z in enumerate(exact.z):
        svals = np.linalg.svd(z, compute_uv=False)
        margins.append(float(svals[min(ranks[cut], len(svals)) - 1]))
    c_z = max(1.0, max(2.0 / s for s in margins)) if all(s > 0.0 for s in margins) else None
    c_g = max(1.0, max(float(np.linalg.norm(g)) for g in tt.components))
    return c_z, c_g


def _assemble_report(
    factored: SketchMoments, family: SketchFamily, truth: MPS | None
) -> TomographyReport:
    recovered, residuals = solve_components(factored)
    c_z = c_g = None
    if truth is not None:
        c_z, c_g = _diagnostics(truth, family, factored.ranks)
    return TomographyReport(
        recovered=recovered,
        singular_values=factored.spectra,
        residuals=residuals,
        ranks=factored.ranks,
        warnings=factored.warnings,
        c_z=c_z,
        c_g=c_g,
        family_info={
            "source": "package-default random local family",
            "window": family.window,
            "seed": family.seed,
            "r_tilde": family.r_tilde,
        },
    )


def sketch_tomography(
    table: TraceTable,
    family: SketchFamily,
    ranks: list[int] | None = None,
    threshold: float = RANK_THRESHOLD,
    median_of_means: bool = False,
    truth: MPS | None = None,
    backend: str | None = None,
) -> TomographyReport:
    """Full pipeline on estimated moments: estimate, factorize, solve."""
    moments = estimate_moments(table, family, median_of_means, backend)
    factored = factorize_cuts(moments, ranks, threshold)
    return _assemble_report(factored, family, truth)


def sketch_tomography_exact(
    psi: MPS,
    family: SketchFamily,
    ranks: list[int] | None = None,
    threshold: float = RANK_THRESHOLD,
) -> TomographyReport:
    """Noiseless pipeline: exact moments of a known state, then factorize and solve.

    Moments are contracted through the state's coefficient train, which is
    exact and fast; ``exact_moments`` computes the same numbers through raw
    expectation values and serves as the independent cross-check at small n.
    """
    moments = tt_moments(mps_to_tt_coeff(psi), family)
    factored = factorize_cuts(moments, ranks, threshold)
    return _assemble_report(factored, family, psi)

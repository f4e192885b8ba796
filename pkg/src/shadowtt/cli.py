"""Experiment driver: state generation, measurement simulation, recovery,
likelihood training and evaluation, wired through JSON configs.

Every command is a pure function of its config and input files; reruns with
the same inputs produce byte-identical outputs regardless of ``--workers``.
Timing information goes to stderr only, never into output files.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from shadowtt import fileio
from shadowtt.backend import set_workers
from shadowtt.config import ExperimentConfig, load_config
from shadowtt.hamiltonians import exact_ground_state, heisenberg_1d, tfim_1d
from shadowtt.mle import MLEConfig, nll, train
from shadowtt.mps import MPS, mps_expectation, mps_to_statevector, normalize, random_mps
from shadowtt.paulitt import (
    TTCoeff,
    mps_to_tt_coeff,
    tt_entry,
    tt_frobenius_distance,
    tt_inner,
    tt_pauli_expectation,
    tt_renyi2,
)
from shadowtt.pauli import PauliString
from shadowtt.shadows import build_trace_table, sample_shadows, shadow_weighted_estimate
from shadowtt.sketch import (
    default_sketch_family,
    sketch_tomography,
    sketch_tomography_exact,
    two_local_sketch_family,
)

#: Offset separating scaling-run shadow streams from state seeds.
SCALING_SHADOW_OFFSET = 1_000_003

WeightedObs = list[tuple[float, PauliString]]


def _progress(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# Observable grammar
# ---------------------------------------------------------------------------


def parse_observable(spec: str, n: int) -> WeightedObs:
    """Parse an observable id into a weighted Pauli-string list.

    Supported forms: ``corr:i,j`` (isotropic two-point), ``zz:i,j``,
    ``xstring:k`` (X product on sites 1..k), ``zxz:k`` (boundary ZZ dressed
    with an X string), and ``pauli:1X,3Z`` (explicit string).
    """
    kind, _, arg = spec.partition(":")
    if kind == "corr":
        i, j = (int(x) for x in arg.split(","))
        return [(1.0 / 3.0, PauliString({i: axis, j: axis})) for axis in ("X", "Y", "Z")]
    if kind == "zz":
        i, j = (int(x) for x in arg.split(","))
        return [(1.0, PauliString({i: "Z", j: "Z"}))]
    if kind == "xstring":
        k = int(arg)
        if not 1 <= k <= n:
            raise ValueError(f"xstring length {k} outside [1, {n}]")
        return [(1.0, PauliString({i: "X" for i in range(1, k + 1)}))]
    if kind == "zxz":
        k = int(arg)
        if not 3 <= k <= n:
            raise ValueError(f"zxz length {k} outside [3, {n}]")
        support = {1: "Z", n: "Z"}
        support.update({i: "X" for i in range(2, k) if i != n})
        return [(1.0, PauliString(support))]
    if kind == "pauli":
        support = {}
        for token in arg.split(","):
            token = token.strip()
            support[int(token[:-1])] = token[-1]
        return [(1.0, PauliString(support))]
    raise ValueError(f"unknown observable id {spec!r}")


def _renyi_subsystems(setting, n: int) -> list[tuple[int, ...]]:
    if setting == "none":
        return []
    if setting == "all<=2":
        singles = [(i,) for i in range(1, n + 1)]
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        return singles + pairs
    return [tuple(sorted(int(s) for s in sites)) for sites in setting]


def _exact_renyi(psi: MPS, sites: tuple[int, ...]) -> float:
    """Dense partial-trace purity of a pure state (oracle-grade path)."""
    vec = mps_to_statevector(psi)
    axes = [s - 1 for s in sites] + [k for k in range(psi.n) if k + 1 not in sites]
    m = vec.reshape((2,) * psi.n).transpose(axes).reshape(2 ** len(sites), -1)
    rho = m @ m.conj().T
    return float(-np.log(max(float(np.sum(np.abs(rho) ** 2)), 1e-300)))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _build_state(cfg: ExperimentConfig):
    model = cfg.model
    if model.kind == "random-mps":
        psi = random_mps(model.n, model.bond, model.seed)
        meta = {"model": "random-mps", "n": model.n, "bond": model.bond, "seed": model.seed}
        return psi, meta
    if model.kind == "heisenberg-1d":
        ham = heisenberg_1d(model.n, model.periodic)
        label = "heisenberg-1d"
    else:
        ham = tfim_1d(model.n, model.J, model.h)
        label = "tfim-1d"
    energy, psi, gap = exact_ground_state(ham, with_gap=True)
    psi = normalize(psi)
    meta = {
        "model": label,
        "n": model.n,
        "periodic": model.periodic,
        "J": model.J,
        "h": model.h,
        "energy": energy,
        "gap": gap,
        "degenerate": bool(gap < 1e-9),
        "terms": len(ham.terms),
    }
    return psi, meta


def cmd_gen_state(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.model.seed = args.seed
    psi, meta = _build_state(cfg)
    meta["bonds"] = psi.bonds
    fileio.save_mps(psi, args.out, meta=meta)
    _progress(f"gen-state: wrote {args.out} (bonds {psi.bonds})")
    return 0


def cmd_shadow(args) -> int:
    cfg = load_config(args.config)
    if cfg.shadow is None:
        raise ValueError("config has no shadow section")
    if not args.state:
        raise ValueError("shadow needs --state")
    seed = cfg.shadow.seed if args.seed is None else args.seed
    psi = fileio.load_mps(args.state)
    start = time.perf_counter()
    batch = sample_shadows(psi, cfg.shadow.count, cfg.shadow.w_groups, seed)
    fileio.save_shadow(batch, args.out)
    _progress(f"shadow: {cfg.shadow.count} samples in {time.perf_counter() - start:.2f}s")
    return 0


def _family_for(cfg: ExperimentConfig, n: int, seed_override: int | None):
    sk = cfg.sketch
    if sk is None:
        raise ValueError("config has no sketch section")
    seed = sk.seed if seed_override is None else seed_override
    if sk.family == "two-local":
        return two_local_sketch_family(n, pair_range=sk.window, seed=seed), sk
    return default_sketch_family(n, sk.r_tilde, sk.window, seed), sk


def cmd_tomo(args) -> int:
    cfg = load_config(args.config)
    truth = fileio.load_mps(args.state) if args.state else None
    start = time.perf_counter()
    if args.noiseless:
        if truth is None:
            raise ValueError("--noiseless needs --state")
        family, sk = _family_for(cfg, truth.n, args.seed)
        report = sketch_tomography_exact(truth, family, sk.ranks, sk.rank_threshold)
    else:
        if not args.shadow:
            raise ValueError("tomo needs --shadow (or --noiseless with --state)")
        batch = fileio.load_shadow(args.shadow)
        family, sk = _family_for(cfg, batch.n, args.seed)
        report = sketch_tomography(
            build_trace_table(batch),
            family,
            sk.ranks,
            sk.rank_threshold,
            sk.median_of_means,
            truth=truth,
        )
    fileio.save_report(report, args.out)
    for note in report.warnings:
        _progress(f"tomo: warning: {note}")
    _progress(f"tomo: ranks {report.ranks} in {time.perf_counter() - start:.2f}s")
    return 0


def cmd_mle(args) -> int:
    cfg = load_config(args.config)
    mle_cfg = cfg.mle if cfg.mle is not None else MLEConfig()
    if args.seed is not None:
        mle_cfg = MLEConfig(
            learning_rate=mle_cfg.learning_rate,
            max_sweeps=mle_cfg.max_sweeps,
            target_nll=mle_cfg.target_nll,
            bond=mle_cfg.bond,
            seed=args.seed,
        )
    if not args.state or not args.shadow:
        raise ValueError("mle needs --state and --shadow")
    psi = fileio.load_mps(args.state)
    batch = fileio.load_shadow(args.shadow)
    target = mle_cfg.target_nll
    if target is None:
        target = nll(psi, batch)
        mle_cfg.target_nll = target
    phi0 = random_mps(psi.n, mle_cfg.bond, mle_cfg.seed)
    start = time.perf_counter()
    phi, trace = train(phi0, batch, mle_cfg)
    final = trace[-1][2] if trace else float("nan")
    meta = {
        "final_nll": final,
        "target_nll": target,
        "updates": len(trace),
        "seed": mle_cfg.seed,
        "bond": mle_cfg.bond,
        "learning_rate": mle_cfg.learning_rate,
        "reached_target": bool(trace and final <= target),
    }
    fileio.save_mps(phi, args.out, meta=meta)
    trace_path = args.trace or str(Path(args.out).with_suffix(".trace.csv"))
    fileio.write_csv(trace_path, ["sweep", "site", "nll"], trace)
    _progress(
        f"mle: nll {final:.4f} vs target {target:.4f} "
        f"after {len(trace)} updates in {time.perf_counter() - start:.1f}s"
    )
    return 0


def _sketch_trace(recovered: TTCoeff) -> float:
    return 2.0 ** (recovered.n / 2.0) * tt_entry(recovered, [0] * recovered.n)


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    if cfg.evaluation is None:
        raise ValueError("config has no evaluation section")
    if not args.state:
        raise ValueError("eval needs --state")
    psi = fileio.load_mps(args.state)
    n = psi.n
    table = None
    if args.shadow:
        batch = fileio.load_shadow(args.shadow)
        table = build_trace_table(batch)
    recovered = fileio.load_report(args.report).recovered if args.report else None
    phi = normalize(fileio.load_mps(args.mle)) if args.mle else None
    trace_val = _sketch_trace(recovered) if recovered is not None else None

    header = [
        "observable",
        "exact",
        "shadow",
        "sketch",
        "sketch_rescaled",
        "mle",
        "err_shadow",
        "err_sketch",
        "err_sketch_rescaled",
        "err_mle",
    ]
    rows = []

    def add_row(name, exact, shadow, sketch, sketch_rescaled, mle_val):
        errs = [
            None if v is None else abs(v - exact) for v in (shadow, sketch, sketch_rescaled, mle_val)
        ]
        rows.append([name, exact, shadow, sketch, sketch_rescaled, mle_val, *errs])

    for spec in cfg.evaluation.observables:
        obs = parse_observable(spec, n)
        exact = sum(w * mps_expectation(psi, p) for w, p in obs)
        shadow_val = (
            shadow_weighted_estimate(table, obs, median_of_means=table.w_groups > 1)
            if table is not None
            else None
        )
        sketch_val = sketch_rescaled = None
        if recovered is not None:
            sketch_val = sum(w * tt_pauli_expectation(recovered, p) for w, p in obs)
            if trace_val:
                sketch_rescaled = sketch_val / trace_val
        mle_val = sum(w * mps_expectation(phi, p) for w, p in obs) if phi is not None else None
        add_row(spec, exact, shadow_val, sketch_val, sketch_rescaled, mle_val)

    subsystems = _renyi_subsystems(cfg.evaluation.renyi_subsystems, n)
    if subsystems:
        phi_tt = mps_to_tt_coeff(phi) if phi is not None else None
        for sites in subsystems:
            name = "renyi:" + ",".join(str(s) for s in sites)
            exact = _exact_renyi(psi, sites)
            shadow_val = _shadow_renyi(table, sites, n) if table is not None else None
            sketch_val = sketch_rescaled = None
            if recovered is not None:
                sketch_val = tt_renyi2(recovered, sites)
                if trace_val and trace_val > 0:
                    sketch_rescaled = sketch_val + 2.0 * np.log(trace_val)
            mle_val = tt_renyi2(phi_tt, sites) if phi_tt is not None else None
            add_row(name, exact, shadow_val, sketch_val, sketch_rescaled, mle_val)

    fileio.write_csv(args.out, header, rows)
    _progress(f"eval: wrote {len(rows)} rows to {args.out}")
    return 0


def _shadow_renyi(table, sites: tuple[int, ...], n: int) -> float:
    """Plug-in purity from shadow-estimated local coefficients (small bias)."""
    from itertools import product as iproduct

    from shadowtt.pauli import LABELS
    from shadowtt.shadows import shadow_pauli_estimate

    purity = 0.0
    for labels in iproduct(range(4), repeat=len(sites)):
        support = {s: LABELS[i] for s, i in zip(sites, labels) if i}
        est = shadow_pauli_estimate(table, PauliString(support)) * 2.0 ** (-n / 2.0)
        purity += est * est
    purity *= 2.0 ** (n - len(sites))
    return float(-np.log(max(purity, 1e-300)))


def cmd_scaling(args) -> int:
    cfg = load_config(args.config)
    if cfg.scaling is None:
        raise ValueError("config has no scaling section")
    counts = sorted(cfg.scaling.counts)
    errors = {count: [] for count in counts}
    for seed in cfg.scaling.seeds:
        model = cfg.model
        if model.kind != "random-mps":
            raise ValueError("scaling sweeps are defined for random-mps targets")
        psi = random_mps(model.n, model.bond, seed)
        truth = mps_to_tt_coeff(psi)
        scale = float(np.sqrt(tt_inner(truth, truth)))
        family, sk = _family_for(cfg, model.n, None)
        for count in counts:
            batch = sample_shadows(psi, count, 1, seed + SCALING_SHADOW_OFFSET)
            report = sketch_tomography(
                build_trace_table(batch), family, sk.ranks, sk.rank_threshold
            )
            errors[count].append(tt_frobenius_distance(report.recovered, truth) / scale)
        _progress(f"scaling: seed {seed} done")
    means = [float(np.mean(errors[count])) for count in counts]
    slope = None
    if len(counts) > 1:
        slope = float(np.polyfit(np.log(counts), np.log(means), 1)[0])
    rows = [[count, mean, slope] for count, mean in zip(counts, means)]
    fileio.write_csv(args.out, ["count", "mean_frobenius_error", "slope"], rows)
    _progress(f"scaling: slope {slope}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shadowtt",
        description="Tensor-train tomography experiments from Pauli-measurement shadows",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, state=False, shadow=False):
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--seed", type=int, default=None, help="override the command's seed")
        p.add_argument("--workers", type=int, default=None, help="kernel threads (no effect on results)")
        if state:
            p.add_argument("--state", default=None, help="MPS JSON path")
        if shadow:
            p.add_argument("--shadow", default=None, help="shadow batch path")

    p = sub.add_parser("gen-state", help="write the target state as MPS JSON")
    common(p)
    p.set_defaults(func=cmd_gen_state)

    p = sub.add_parser("shadow", help="simulate random Pauli measurements")
    common(p, state=True)
    p.set_defaults(func=cmd_shadow)

    p = sub.add_parser("tomo", help="recover the coefficient train from shadows")
    common(p, state=True, shadow=True)
    p.add_argument("--noiseless", action="store_true", help="use exact moments of --state")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("mle", help="train a likelihood-maximizing MPS on the shadows")
    common(p, state=True, shadow=True)
    p.add_argument("--trace", default=None, help="NLL trace CSV path")
    p.set_defaults(func=cmd_mle)

    p = sub.add_parser("eval", help="tabulate observable predictions vs exact values")
    common(p, state=True, shadow=True)
    p.add_argument("--report", default=None, help="tomography report JSON")
    p.add_argument("--mle", default=None, help="trained MPS JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scaling", help="error-vs-count sweep with slope fit")
    common(p)
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers is not None:
        set_workers(args.workers)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

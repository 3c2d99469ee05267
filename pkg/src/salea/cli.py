"""Command-line entry point: run, sweep, drift, scan, verify, presets.

Flags mirror the usual symbols of this algorithm family (--c, --s, --F,
--lambda-init).  The master seed comes from --seed, falling back to the
SA_EA_SEED environment variable, then 0.  Exit codes: 0 success, 1 config
error or failed verification, 2 aborted run (hook violation).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import driftlab, harness, potentials
from .algorithm import AlgorithmParams, InitPolicy, run
from .bitstring import RngStream
from .driftlab import (
    estimate_drift,
    g1_scan_preset,
    g3_scan_preset,
    g4_scan_preset,
    scan_drift_region,
    verify_event_probabilities,
)
from .fitness import FunctionSpec, MonotonicityError, monotonicity_fuzz
from .harness import (
    SweepSpec,
    preset_F_sweep,
    preset_scaling_experiment,
    preset_threshold_sweep,
    run_sweep,
    sweep_from_json,
)
from .potentials import PotentialSpec, eval_h, sandwich_bounds

FUNCTION_CHOICES = ("onemax", "binary", "binary_value", "dynamic_binval", "hot_topic")
SCAN_PRESETS = {"g1": g1_scan_preset, "g3": g3_scan_preset, "g4": g4_scan_preset}
SWEEP_PRESETS = ("threshold", "f_sweep", "scaling")


def _default_workers() -> int:
    return os.cpu_count() or 1


def _seed_from(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SA_EA_SEED")
    return int(env) if env else 0


def _function_spec(args) -> FunctionSpec:
    if args.function == "hot_topic":
        return FunctionSpec(
            "hot_topic", L=args.L, alpha=args.alpha, beta=args.beta, epsilon=args.epsilon
        )
    return FunctionSpec(args.function)


def _add_function_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--function", choices=FUNCTION_CHOICES, default="onemax", help="benchmark function kind")
    p.add_argument("--L", type=int, default=100, help="hot_topic: number of levels")
    p.add_argument("--alpha", type=float, default=0.25, help="hot_topic: level set fraction")
    p.add_argument("--beta", type=float, default=0.05, help="hot_topic: inner set fraction")
    p.add_argument("--epsilon", type=float, default=0.05, help="hot_topic: zero tolerance fraction")


def _add_seed_flag(p: argparse.ArgumentParser) -> None:
    # accepted on every verb; SUPPRESS keeps an absent sub-flag from clobbering
    # a seed given before the verb
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="master seed (falls back to SA_EA_SEED, then 0)")


def _add_algo_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=100, help="problem dimension")
    p.add_argument("--c", type=float, default=1.0, help="mutation strength (per-bit rate c/n)")
    p.add_argument("--s", type=float, default=1.0, help="success rate parameter of the (1:s+1) rule")
    p.add_argument("--F", type=float, default=1.5, help="update strength, > 1")
    p.add_argument("--lambda-init", type=float, default=1.0, dest="lambda_init", help="initial offspring size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="salea", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="master seed (falls back to SA_EA_SEED, then 0)")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="single seeded run with a one-line summary")
    _add_seed_flag(p_run)
    _add_function_flags(p_run)
    _add_algo_flags(p_run)
    p_run.add_argument("--generation-cap", type=int, default=None, help="generation cap (default 500*n)")
    p_run.add_argument("--init", type=str, default="uniform", help="uniform | fixed_zeromax:K | explicit:BITS")
    p_run.add_argument("--trajectory-out", type=str, default=None, help="write sampled step records as CSV")

    p_sweep = sub.add_parser("sweep", help="run a sweep from a preset or a JSON config")
    _add_seed_flag(p_sweep)
    p_sweep.add_argument("--preset", choices=SWEEP_PRESETS, default=None, help="built-in sweep preset")
    p_sweep.add_argument("--config", type=str, default=None, help="JSON SweepSpec file")
    p_sweep.add_argument("--n", type=int, default=1000, help="dimension for presets")
    p_sweep.add_argument("--functions", type=str, default="onemax", help="comma list for the threshold preset")
    p_sweep.add_argument("--runs", type=int, default=None, help="override runs per cell")
    p_sweep.add_argument("--out", type=str, default="results", help="output directory for raw.csv / summary.csv")
    p_sweep.add_argument("--workers", type=int, default=_default_workers(), help="parallel worker processes")
    _add_function_flags(p_sweep)
    p_sweep.add_argument("--c", type=float, default=0.8, help="scaling preset: mutation strength")
    p_sweep.add_argument("--s", type=float, default=0.5, help="scaling preset: success rate")
    p_sweep.add_argument("--F", type=float, default=1.5, help="scaling preset: update strength")
    p_sweep.add_argument("--n-list", type=str, default="500,1000,2000", help="scaling preset: comma list of n")
    p_sweep.add_argument("--init", type=str, default="uniform", help="scaling preset: init policy")

    p_drift = sub.add_parser("drift", help="drift estimate at a single frozen state")
    _add_seed_flag(p_drift)
    _add_function_flags(p_drift)
    _add_algo_flags(p_drift)
    p_drift.add_argument("--Z", type=int, default=100, help="zeromax of the frozen state")
    p_drift.add_argument("--lam", "--lambda", type=float, default=4.0, dest="lam", help="frozen lambda")
    p_drift.add_argument("--family", choices=potentials.FAMILIES, default="G1", help="potential family")
    p_drift.add_argument("--K1", type=float, default=1.0, help="potential constant K1")
    p_drift.add_argument("--K2", type=float, default=1.0, help="potential constant K2")
    p_drift.add_argument("--K3", type=float, default=1.0, help="potential constant K3")
    p_drift.add_argument("--K4", type=float, default=20.0, help="potential constant K4")
    p_drift.add_argument("--trials", type=int, default=100_000, help="Monte-Carlo trials")
    p_drift.add_argument("--cap", type=float, default=None, help="optional truncation cap on the g-sample")

    p_scan = sub.add_parser("scan", help="drift-sign scan over a (Z, lambda) grid")
    _add_seed_flag(p_scan)
    p_scan.add_argument("--preset", choices=sorted(SCAN_PRESETS), default="g1", help="scan preset")
    p_scan.add_argument("--n", type=int, default=1000, help="dimension")
    p_scan.add_argument("--trials", type=int, default=100_000, help="base trials per cell")
    p_scan.add_argument("--confidence", type=float, default=0.95, help="verdict confidence level")
    p_scan.add_argument("--out", type=str, default="scan", help="output directory for cells.csv / verdicts.json")
    p_scan.add_argument("--workers", type=int, default=_default_workers(), help="parallel worker processes")

    p_verify = sub.add_parser("verify", help="closed-form vs Monte-Carlo and invariant suites")
    _add_seed_flag(p_verify)
    p_verify.add_argument("--trials", type=int, default=1_000_000, help="Monte-Carlo trials per grid point")
    p_verify.add_argument("--pairs", type=int, default=10_000, help="dominated pairs per function")
    p_verify.add_argument("--samples", type=int, default=100_000, help="random states per sandwich family")
    p_verify.add_argument("--fuzz-n", type=int, default=100, dest="fuzz_n", help="dimension for the fuzz suite")

    p_presets = sub.add_parser("presets", help="list built-in sweep and scan presets")
    _add_seed_flag(p_presets)
    return parser


def _cmd_run(args) -> int:
    spec = _function_spec(args)
    params = AlgorithmParams(
        n=args.n,
        c=args.c,
        s=args.s,
        F=args.F,
        lambda_init=args.lambda_init,
        generation_cap=args.generation_cap,
    )
    init = InitPolicy.parse(args.init)
    trajectory = "sampled" if args.trajectory_out else "none"
    result = run(params, spec, RngStream(_seed_from(args)), init=init, trajectory=trajectory)
    print(
        f"function={spec.kind} n={params.n} c={params.c} s={params.s} F={params.F} "
        f"seed={_seed_from(args)} generations={result.generations} "
        f"evaluations={result.evaluations} hit_cap={str(result.hit_cap).lower()} "
        f"final_zeromax={result.final_zeromax} success_generations={result.success_generations} "
        f"normalized_generations={result.generations / params.n}"
    )
    if args.trajectory_out:
        import csv as _csv

        from .algorithm import TRAJECTORY_COLUMNS

        with open(args.trajectory_out, "w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_COLUMNS)
            for rec in result.trajectory:
                writer.writerow(
                    [
                        rec.t,
                        rec.zeromax_before,
                        rec.zeromax_after,
                        repr(rec.lambda_before),
                        repr(rec.lambda_after),
                        rec.offspring_count,
                        "true" if rec.success else "false",
                    ]
                )
    return 0


def _cmd_sweep(args) -> int:
    if (args.preset is None) == (args.config is None):
        print("sweep: exactly one of --preset / --config is required", file=sys.stderr)
        return 1
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            spec = sweep_from_json(fh.read())
    elif args.preset == "threshold":
        functions = [f for f in args.functions.split(",") if f]
        spec = preset_threshold_sweep(args.n, functions, master_seed=_seed_from(args))
    elif args.preset == "f_sweep":
        spec = preset_F_sweep(args.n, master_seed=_seed_from(args))
    else:
        n_list = [int(v) for v in args.n_list.split(",") if v]
        spec = preset_scaling_experiment(
            _function_spec(args),
            c=args.c,
            s=args.s,
            F=args.F,
            n_list=n_list,
            init=InitPolicy.parse(args.init),
            master_seed=_seed_from(args),
        )
    if args.runs is not None:
        spec = replace(spec, runs_per_cell=args.runs)
    spec = replace(
        spec,
        raw_csv=os.path.join(args.out, "raw.csv"),
        summary_csv=os.path.join(args.out, "summary.csv"),
    )
    rows, summaries = run_sweep(spec, workers=args.workers)
    errors = sum(1 for r in rows if r.error)
    print(f"wrote {len(rows)} runs ({errors} errors) over {len(summaries)} cells to {args.out}")
    return 0


def _cmd_drift(args) -> int:
    spec = _function_spec(args)
    params = AlgorithmParams(n=args.n, c=args.c, s=args.s, F=args.F)
    pot = PotentialSpec(
        family=args.family, n=args.n, F=args.F, s=args.s, K1=args.K1, K2=args.K2, K3=args.K3, K4=args.K4
    )
    rng = RngStream(_seed_from(args))
    x = driftlab.representative_state(args.n, args.Z, rng.child("state"))
    triple = estimate_drift(x, args.lam, params, spec, pot, args.trials, rng.child("drift"), cap=args.cap)
    orient = "after-minus-before" if args.family == "G4" else "before-minus-after"
    print(
        f"family={args.family} orientation={orient} Z={args.Z} lambda={args.lam} trials={args.trials}\n"
        f"z_drift={triple.z.mean:.6g} +-{triple.z.std_error:.2g} "
        f"h_drift={triple.h.mean:.6g} +-{triple.h.std_error:.2g} "
        f"g_drift={triple.g.mean:.6g} +-{triple.g.std_error:.2g}"
    )
    return 0


def _cmd_scan(args) -> int:
    preset = SCAN_PRESETS[args.preset](n=args.n, trials=args.trials)
    report = scan_drift_region(
        preset["params"],
        preset["spec"],
        preset["pot"],
        preset["Z_grid"],
        preset["lambda_grid"],
        preset["trials"],
        RngStream(_seed_from(args)),
        confidence=args.confidence,
        workers=args.workers,
    )
    os.makedirs(args.out, exist_ok=True)
    report.to_csv(os.path.join(args.out, "cells.csv"))
    report.to_json(os.path.join(args.out, "verdicts.json"))
    passed = sum(c.verdict for c in report.cells)
    print(
        f"scan {args.preset}: {passed}/{len(report.cells)} cells with the predicted sign "
        f"at {args.confidence:.0%} confidence; wrote {args.out}/cells.csv and verdicts.json"
    )
    return 0


def _cmd_verify(args) -> int:
    rng = RngStream(_seed_from(args))
    ok = True

    report = verify_event_probabilities(None, args.trials, rng.child("events"))
    line = "pass" if report.all_pass else "FAIL"
    print(f"[{line}] event probabilities: {len(report.rows)} grid points, {args.trials} trials each")
    if report.b_exponent_range:
        lo, hi = report.b_exponent_range
        print(f"       fitted no-zero-flip exponents in [{lo:.4f}, {hi:.4f}] (two-sided bounds satisfiable)")
    ok &= report.all_pass

    for kind in FUNCTION_CHOICES:
        violations = monotonicity_fuzz(FunctionSpec(kind), args.fuzz_n, args.pairs, rng.child("fuzz", kind))
        line = "pass" if violations == 0 else "FAIL"
        print(f"[{line}] monotonicity fuzz {kind}: {violations} violations in {args.pairs} dominated pairs")
        ok &= violations == 0

    g = rng.child("sandwich").gen
    for family in ("G1", "G2", "G3"):
        pot = PotentialSpec(family=family, n=64, F=1.5, s=1.0, K1=1.0, K2=2.0, K3=0.5)
        lower_gap, upper_gap = sandwich_bounds(pot)
        bad = 0
        for _ in range(args.samples):
            z = int(g.integers(0, pot.n + 1))
            lam = float(g.uniform(1.0, 2.0 * pot.lambda_max))
            gval = z + eval_h(pot, lam)
            if not (gval - lower_gap <= z <= gval + upper_gap):
                bad += 1
        line = "pass" if bad == 0 else "FAIL"
        print(f"[{line}] sandwich {family}: {bad} violations in {args.samples} random states")
        ok &= bad == 0

    return 0 if ok else 1


def _cmd_presets(args) -> int:
    print("sweep presets:")
    print("  threshold  F=1.5, c=1, s grid over [0.5, 10] refined near [2.5, 4.5], 10 runs, 500n cap")
    print("  f_sweep    dynamic_binval, s=1.8, c in {0.98, 1.0}, F grid " + str(list(harness.F_SWEEP_GRID)))
    print("  scaling    fixed (function, c, s, F) over an n list; supports fixed_zeromax inits")
    print("scan presets:")
    for name, fn in sorted(SCAN_PRESETS.items()):
        preset = fn()
        pot = preset["pot"]
        print(
            f"  {name}  family={pot.family} s={preset['params'].s} c={preset['params'].c} "
            f"Z_grid={preset['Z_grid']} lambda_grid={preset['lambda_grid']}"
        )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; remap to the documented config-error code
        return 0 if exc.code == 0 else 1
    try:
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "sweep":
            return _cmd_sweep(args)
        if args.verb == "drift":
            return _cmd_drift(args)
        if args.verb == "scan":
            return _cmd_scan(args)
        if args.verb == "verify":
            return _cmd_verify(args)
        return _cmd_presets(args)
    except MonotonicityError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiment driver: parameter sweeps, seeded repeated runs, CSV persistence.

A sweep is the Cartesian product of (function, n, c, s, F) lists; each cell is
run ``runs_per_cell`` times.  Every (cell, run_index) derives its own random
stream from the master seed and the cell's identity (not its position), so
adding cells never reshuffles the randomness of existing runs, and results are
byte-identical regardless of worker count or execution order.

Capped runs contribute the cap value to the means; the cap-hit fraction column
keeps the censoring visible.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .algorithm import AlgorithmParams, InitPolicy, TimeBudgetExceeded, run
from .bitstring import RngStream, derive_stream_id
from .fitness import FunctionSpec, MonotonicityError, spec_from_dict, spec_to_dict

__all__ = [
    "SweepSpec",
    "RunResult",
    "CellSummary",
    "run_sweep",
    "preset_threshold_sweep",
    "preset_F_sweep",
    "preset_scaling_experiment",
    "write_raw_csv",
    "read_raw_csv",
    "write_summary_csv",
    "read_summary_csv",
    "summarize",
    "validate_rows",
    "sweep_to_json",
    "sweep_from_json",
    "RAW_COLUMNS",
    "SUMMARY_COLUMNS",
]

RAW_COLUMNS = [
    "function",
    "n",
    "c",
    "s",
    "F",
    "run_index",
    "seed",
    "init",
    "generations",
    "evaluations",
    "hit_cap",
    "final_zeromax",
    "success_generations",
    "normalized_generations",
    "error",
]

SUMMARY_COLUMNS = [
    "function",
    "n",
    "c",
    "s",
    "F",
    "runs",
    "mean_norm_generations",
    "std_norm_generations",
    "mean_evaluations",
    "cap_fraction",
]


@dataclass(frozen=True)
class SweepSpec:
    """A sweep over the product of the parameter lists.

    The single-function field of simpler setups generalizes to a tuple here:
    threshold figures sweep several benchmarks in one batch and the raw CSV
    carries a function column.
    """

    functions: tuple[FunctionSpec, ...]
    n_list: tuple[int, ...]
    c_list: tuple[float, ...]
    s_list: tuple[float, ...]
    F_list: tuple[float, ...]
    runs_per_cell: int = 10
    generation_cap_multiplier: float = 500.0
    master_seed: int = 0
    init: InitPolicy = field(default_factory=InitPolicy.uniform)
    lambda_init: float = 1.0
    raw_csv: str | None = None
    summary_csv: str | None = None
    run_seconds_budget: float | None = None

    def __post_init__(self):
        if self.runs_per_cell < 1:
            raise ValueError(f"runs_per_cell must be >= 1, got {self.runs_per_cell}")
        if self.generation_cap_multiplier < 0:
            raise ValueError("generation_cap_multiplier must be >= 0")
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "c_list", tuple(float(c) for c in self.c_list))
        object.__setattr__(self, "s_list", tuple(float(s) for s in self.s_list))
        object.__setattr__(self, "F_list", tuple(float(F) for F in self.F_list))

    def cells(self) -> list[tuple[FunctionSpec, int, float, float, float]]:
        return list(product(self.functions, self.n_list, self.c_list, self.s_list, self.F_list))


@dataclass(frozen=True)
class RunResult:
    """One raw CSV row: cell identity plus the run outcome."""

    function: str
    n: int
    c: float
    s: float
    F: float
    run_index: int
    seed: int
    init: str
    generations: int
    evaluations: int
    hit_cap: bool
    final_zeromax: int
    success_generations: int
    normalized_generations: float
    error: str = ""


@dataclass(frozen=True)
class CellSummary:
    function: str
    n: int
    c: float
    s: float
    F: float
    runs: int
    mean_norm_generations: float
    std_norm_generations: float
    mean_evaluations: float
    cap_fraction: float


def _cell_seed(master_seed: int, spec: FunctionSpec, n: int, c: float, s: float, F: float, run_index: int) -> int:
    # identity-based, so inserting new cells leaves existing streams untouched
    return derive_stream_id("run", spec.kind, n, c, s, F, run_index)


def _execute_run(args) -> RunResult:
    (spec, n, c, s, F, run_index, master_seed, cap_multiplier, init, lambda_init, budget) = args
    sid = _cell_seed(master_seed, spec, n, c, s, F, run_index)
    params = AlgorithmParams(
        n=n, c=c, s=s, F=F, lambda_init=lambda_init, generation_cap=int(cap_multiplier * n)
    )
    base = dict(
        function=spec.kind,
        n=n,
        c=c,
        s=s,
        F=F,
        run_index=run_index,
        seed=sid,
        init=init.label(),
    )
    try:
        result = run(
            params,
            spec,
            RngStream(master_seed, sid),
            init=init,
            trajectory="none",
            time_budget=budget,
        )
    except (MonotonicityError, TimeBudgetExceeded) as exc:
        return RunResult(
            **base,
            generations=0,
            evaluations=0,
            hit_cap=False,
            final_zeromax=-1,
            success_generations=0,
            normalized_generations=math.nan,
            error=f"{type(exc).__name__}: {exc}",
        )
    return RunResult(
        **base,
        generations=result.generations,
        evaluations=result.evaluations,
        hit_cap=result.hit_cap,
        final_zeromax=result.final_zeromax,
        success_generations=result.success_generations,
        normalized_generations=result.generations / n,
    )


def run_sweep(spec: SweepSpec, workers: int | None = None) -> tuple[list[RunResult], list[CellSummary]]:
    """Execute all (cell, run) tasks and optionally persist raw and summary CSVs.

    Individual run failures (hook aborts, budget hits) are recorded in the
    error column and the sweep continues.
    """
    tasks = [
        (
            fn,
            n,
            c,
            s,
            F,
            run_index,
            spec.master_seed,
            spec.generation_cap_multiplier,
            spec.init,
            spec.lambda_init,
            spec.run_seconds_budget,
        )
        for (fn, n, c, s, F) in spec.cells()
        for run_index in range(spec.runs_per_cell)
    ]
    workers = workers if workers is not None else 1
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_execute_run, tasks, chunksize=1))
    else:
        rows = [_execute_run(t) for t in tasks]
    summaries = summarize(rows)
    if spec.raw_csv:
        write_raw_csv(spec.raw_csv, rows)
    if spec.summary_csv:
        write_summary_csv(spec.summary_csv, summaries)
    return rows, summaries


def summarize(rows: list[RunResult]) -> list[CellSummary]:
    """Per-cell aggregation in first-appearance order; error rows are excluded.

    Standard deviation uses the unbiased (runs-1) estimator; a single run
    yields nan.
    """
    order: list[tuple] = []
    groups: dict[tuple, list[RunResult]] = {}
    for row in rows:
        if row.error:
            continue
        key = (row.function, row.n, row.c, row.s, row.F)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        members = groups[key]
        norm = [r.normalized_generations for r in members]
        k = len(members)
        mean = sum(norm) / k
        if k > 1:
            std = math.sqrt(sum((v - mean) ** 2 for v in norm) / (k - 1))
        else:
            std = math.nan
        out.append(
            CellSummary(
                function=key[0],
                n=key[1],
                c=key[2],
                s=key[3],
                F=key[4],
                runs=k,
                mean_norm_generations=mean,
                std_norm_generations=std,
                mean_evaluations=sum(r.evaluations for r in members) / k,
                cap_fraction=sum(r.hit_cap for r in members) / k,
            )
        )
    return out


def validate_rows(rows: list[RunResult], generation_cap_multiplier: float | None = None) -> None:
    """Re-check the row invariants (done on every load)."""
    for row in rows:
        if row.error:
            continue
        if row.evaluations < row.generations:
            raise ValueError(f"row {row}: evaluations < generations")
        if not math.isclose(row.normalized_generations, row.generations / row.n):
            raise ValueError(f"row {row}: normalized_generations mismatch")
        if row.hit_cap:
            if generation_cap_multiplier is not None and row.generations != int(
                generation_cap_multiplier * row.n
            ):
                raise ValueError(f"row {row}: hit_cap but generations != cap")
        else:
            if row.final_zeromax != 0:
                raise ValueError(f"row {row}: not capped but final_zeromax != 0")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_raw_csv(path: str, rows: list[RunResult]) -> None:
    _ensure_dir(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RAW_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, col)) for col in RAW_COLUMNS])


def read_raw_csv(path: str, generation_cap_multiplier: float | None = None) -> list[RunResult]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != RAW_COLUMNS:
            raise ValueError(f"raw CSV header mismatch: expected {RAW_COLUMNS}, got {header}")
        rows = []
        for rec in reader:
            d = dict(zip(RAW_COLUMNS, rec))
            rows.append(
                RunResult(
                    function=d["function"],
                    n=int(d["n"]),
                    c=float(d["c"]),
                    s=float(d["s"]),
                    F=float(d["F"]),
                    run_index=int(d["run_index"]),
                    seed=int(d["seed"]),
                    init=d["init"],
                    generations=int(d["generations"]),
                    evaluations=int(d["evaluations"]),
                    hit_cap=d["hit_cap"] == "true",
                    final_zeromax=int(d["final_zeromax"]),
                    success_generations=int(d["success_generations"]),
                    normalized_generations=float(d["normalized_generations"]),
                    error=d["error"],
                )
            )
    validate_rows(rows, generation_cap_multiplier)
    return rows


def write_summary_csv(path: str, summaries: list[CellSummary]) -> None:
    _ensure_dir(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            writer.writerow([_fmt(getattr(s, col)) for col in SUMMARY_COLUMNS])


def read_summary_csv(path: str) -> list[CellSummary]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SUMMARY_COLUMNS:
            raise ValueError(f"summary CSV header mismatch: expected {SUMMARY_COLUMNS}, got {header}")
        out = []
        for rec in reader:
            d = dict(zip(SUMMARY_COLUMNS, rec))
            out.append(
                CellSummary(
                    function=d["function"],
                    n=int(d["n"]),
                    c=float(d["c"]),
                    s=float(d["s"]),
                    F=float(d["F"]),
                    runs=int(d["runs"]),
                    mean_norm_generations=float(d["mean_norm_generations"]),
                    std_norm_generations=float(d["std_norm_generations"]),
                    mean_evaluations=float(d["mean_evaluations"]),
                    cap_fraction=float(d["cap_fraction"]),
                )
            )
    return out


def _ensure_dir(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# -- config file --------------------------------------------------------------

_SWEEP_KEYS = {
    "functions",
    "n_list",
    "c_list",
    "s_list",
    "F_list",
    "runs_per_cell",
    "generation_cap_multiplier",
    "master_seed",
    "init",
    "lambda_init",
    "raw_csv",
    "summary_csv",
    "run_seconds_budget",
}


def sweep_to_json(spec: SweepSpec) -> str:
    d = {
        "functions": [spec_to_dict(f) for f in spec.functions],
        "n_list": list(spec.n_list),
        "c_list": list(spec.c_list),
        "s_list": list(spec.s_list),
        "F_list": list(spec.F_list),
        "runs_per_cell": spec.runs_per_cell,
        "generation_cap_multiplier": spec.generation_cap_multiplier,
        "master_seed": spec.master_seed,
        "init": spec.init.label(),
        "lambda_init": spec.lambda_init,
        "raw_csv": spec.raw_csv,
        "summary_csv": spec.summary_csv,
        "run_seconds_budget": spec.run_seconds_budget,
    }
    return json.dumps(d, indent=2)


def sweep_from_json(text: str) -> SweepSpec:
    d = json.loads(text)
    unknown = set(d) - _SWEEP_KEYS
    if unknown:
        raise ValueError(f"unknown sweep config key {sorted(unknown)[0]!r}")
    missing = {"functions", "n_list", "c_list", "s_list", "F_list"} - set(d)
    if missing:
        raise ValueError(f"sweep config missing key {sorted(missing)[0]!r}")
    kwargs = dict(d)
    kwargs["functions"] = tuple(spec_from_dict(f) for f in d["functions"])
    if "init" in kwargs:
        kwargs["init"] = InitPolicy.parse(kwargs["init"])
    return SweepSpec(**kwargs)


# -- presets -------------------------------------------------------------------

THRESHOLD_S_GRID = (
    0.5,
    1.0,
    1.5,
    2.0,
    2.5,
    2.7,
    2.9,
    3.0,
    3.1,
    3.2,
    3.3,
    3.4,
    3.5,
    3.6,
    3.8,
    4.0,
    4.2,
    4.5,
    5.0,
    6.0,
    8.0,
    10.0,
)

F_SWEEP_GRID = (1.1, 1.5, 2.0, 4.0, 6.25, 8.0, 16.0, 32.0)


def _as_specs(functions) -> tuple[FunctionSpec, ...]:
    out = []
    for f in functions:
        out.append(f if isinstance(f, FunctionSpec) else FunctionSpec(str(f)))
    return tuple(out)


def preset_threshold_sweep(n: int, functions=("onemax",), master_seed: int = 0) -> SweepSpec:
    """Success-rate threshold configuration: F=1.5, c=1, s over [0.5, 10]
    with refinement near the transition window [2.5, 4.5]."""
    return SweepSpec(
        functions=_as_specs(functions),
        n_list=(n,),
        c_list=(1.0,),
        s_list=THRESHOLD_S_GRID,
        F_list=(1.5,),
        runs_per_cell=10,
        generation_cap_multiplier=500.0,
        master_seed=master_seed,
        init=InitPolicy.uniform(),
        lambda_init=1.0,
    )


def preset_F_sweep(n: int, master_seed: int = 0) -> SweepSpec:
    """Update-strength sweep on dynamic binval at s=1.8, geometric F grid
    including the 6.25 cell where a dip has been reported for c=0.98."""
    return SweepSpec(
        functions=(FunctionSpec("dynamic_binval"),),
        n_list=(n,),
        c_list=(0.98, 1.0),
        s_list=(1.8,),
        F_list=F_SWEEP_GRID,
        runs_per_cell=10,
        generation_cap_multiplier=500.0,
        master_seed=master_seed,
        init=InitPolicy.uniform(),
        lambda_init=1.0,
    )


def preset_scaling_experiment(
    function,
    c: float,
    s: float,
    F: float,
    n_list,
    init: InitPolicy | None = None,
    master_seed: int = 0,
) -> SweepSpec:
    """One algorithm cell over several n, for generation/evaluation scaling ratios."""
    return SweepSpec(
        functions=_as_specs([function]),
        n_list=tuple(n_list),
        c_list=(c,),
        s_list=(s,),
        F_list=(F,),
        runs_per_cell=10,
        generation_cap_multiplier=500.0,
        master_seed=master_seed,
        init=init or InitPolicy.uniform(),
        lambda_init=1.0,
    )

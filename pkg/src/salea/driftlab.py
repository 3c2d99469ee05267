"""Monte-Carlo drift laboratory.

Estimates one-step drifts of zeromax, of the lambda-penalty h, and of the
potential g = zeromax + h from a frozen state (x, lambda), locates the target
offspring count lambda* of the success rule, scans (Z, lambda) regions for
drift signs, and cross-checks the closed-form event probabilities against
simulation.

Sign convention: estimates report before-minus-after (positive = progress)
for families G1..G3, and after-minus-before for G4, whose theory predicts the
potential to *grow* in the failure region.  The per-trial identity
g-sample = Z-sample + h-sample holds exactly under either orientation.

Dynamic environments are resampled independently per trial: the frozen state
is (x, lambda), not the environment.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .algorithm import AlgorithmParams, _generation, round_offspring
from .bitstring import RngStream, SearchPoint, sample_flip_sets
from .fitness import FitnessInstance, FunctionSpec, make_instance
from .potentials import PotentialSpec, eval_h, prob_A_bar, prob_B_bar

__all__ = [
    "DriftEstimate",
    "DriftTriple",
    "ProbEstimate",
    "LambdaStarResult",
    "CellResult",
    "DriftScanReport",
    "EventProbRow",
    "EventProbReport",
    "estimate_drift",
    "estimate_success_prob",
    "find_lambda_star",
    "representative_state",
    "scan_drift_region",
    "verify_event_probabilities",
    "g1_scan_preset",
    "g3_scan_preset",
    "g4_scan_preset",
    "DEFAULT_EVENT_GRID",
    "SCAN_CSV_COLUMNS",
]


@dataclass(frozen=True)
class DriftEstimate:
    mean: float
    std_error: float
    trials: int
    confidence: float = 0.95
    truncation_cap: float | None = None

    def ci_half_width(self) -> float:
        z = NormalDist().inv_cdf(0.5 + self.confidence / 2.0)
        return z * self.std_error


@dataclass(frozen=True)
class DriftTriple:
    """Z-, H-, and G-drift estimated from the same trials."""

    z: DriftEstimate
    h: DriftEstimate
    g: DriftEstimate


@dataclass(frozen=True)
class ProbEstimate:
    mean: float
    std_error: float
    trials: int


def _single_estimate(samples: np.ndarray, confidence: float, cap: float | None = None) -> DriftEstimate:
    n = samples.size
    std = float(samples.std(ddof=1)) if n > 1 else 0.0
    return DriftEstimate(
        mean=float(samples.mean()),
        std_error=std / math.sqrt(n),
        trials=n,
        confidence=confidence,
        truncation_cap=cap,
    )


def estimate_drift(
    x: SearchPoint,
    lam: float,
    params: AlgorithmParams,
    spec: FunctionSpec,
    pot: PotentialSpec,
    trials: int,
    rng: RngStream,
    cap: float | None = None,
    confidence: float = 0.95,
    keep_samples: bool = False,
):
    """Monte-Carlo one-step drift triple from the frozen state (x, lambda).

    Each trial runs one independent generation (fresh environment for dynamic
    kinds) and records the potential change.  With ``cap`` set, the g-sample
    is truncated to min(cap, sample) before averaging (the truncated drift
    used for concentration arguments).  ``keep_samples`` additionally returns
    the raw (z, h, success) arrays for instrumentation.
    """
    z0 = x.n - x.ones
    if z0 < 1:
        raise ValueError("estimate_drift requires zeromax(x) >= 1")
    if trials < 1000:
        raise ValueError(f"trials must be >= 1000, got {trials}")
    sign = -1.0 if pot.family == "G4" else 1.0
    base = make_instance(spec, params.n, rng.child("instance"))
    rng_env = rng.child("env")
    rng_algo = rng.child("algo")
    growth = params.F ** (1.0 / params.s)
    h0 = eval_h(pot, lam)

    z_samples = np.empty(trials)
    h_samples = np.empty(trials)
    successes = np.empty(trials, dtype=bool)
    for i in range(trials):
        inst = base.advanced(i, x, rng_env)
        _, ones_after, lam_after, _, success = _generation(
            x.bits, x.ones, lam, inst, params, rng_algo, growth
        )
        z_samples[i] = sign * (z0 - (params.n - ones_after))
        h_samples[i] = sign * (h0 - eval_h(pot, lam_after))
        successes[i] = success

    g_samples = z_samples + h_samples
    if cap is not None:
        g_samples = np.minimum(cap, g_samples)
    triple = DriftTriple(
        z=_single_estimate(z_samples, confidence),
        h=_single_estimate(h_samples, confidence),
        g=_single_estimate(g_samples, confidence, cap),
    )
    if keep_samples:
        return triple, (z_samples, h_samples, successes)
    return triple


def _success_trials(
    x: SearchPoint,
    offspring: int,
    params: AlgorithmParams,
    base: FitnessInstance,
    trials: int,
    rng_env: RngStream,
    rng_algo: RngStream,
) -> int:
    """Number of trials in which the best of `offspring` children strictly beats x."""
    hits = 0
    g = rng_algo
    for i in range(trials):
        inst = base.advanced(i, x, rng_env)
        counts, positions = sample_flip_sets(params.n, params.c, offspring, g)
        keys = inst.child_keys(x.bits, counts, positions)
        best = keys.max() if isinstance(keys, np.ndarray) else max(keys)
        hits += best > inst.key(x.bits)
    return hits


def estimate_success_prob(
    x: SearchPoint,
    lam: float,
    params: AlgorithmParams,
    spec: FunctionSpec,
    trials: int,
    rng: RngStream,
) -> ProbEstimate:
    """Fraction of trials where the best of round(lambda) children strictly beats x."""
    if x.n - x.ones < 1:
        raise ValueError("estimate_success_prob requires zeromax(x) >= 1")
    base = make_instance(spec, params.n, rng.child("instance"))
    hits = _success_trials(
        x, round_offspring(lam), params, base, trials, rng.child("env"), rng.child("algo")
    )
    p = hits / trials
    return ProbEstimate(mean=p, std_error=math.sqrt(p * (1.0 - p) / trials), trials=trials)


@dataclass(frozen=True)
class LambdaStarResult:
    value: int
    boundary: bool
    target: float
    probes: dict[int, float] = field(default_factory=dict, compare=False)


def find_lambda_star(
    x: SearchPoint,
    params: AlgorithmParams,
    spec: FunctionSpec,
    tol: float,
    rng: RngStream,
    confidence: float = 0.95,
    max_offspring: int = 10**7,
) -> LambdaStarResult:
    """Smallest integer offspring count whose success probability reaches 1/(s+1).

    Doubling then binary search; each probe uses enough trials for a CI
    half-width <= tol.  When already p(1) >= 1/(s+1) the boundary flag is set
    and 1 is returned.
    """
    if not (0.0 < tol < 0.5):
        raise ValueError(f"tol must be in (0, 0.5), got {tol}")
    target = 1.0 / (params.s + 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    trials = max(100, math.ceil((z * 0.5 / tol) ** 2))
    base = make_instance(spec, params.n, rng.child("instance"))
    probes: dict[int, float] = {}

    def probe(m: int) -> float:
        if m not in probes:
            hits = _success_trials(
                x, m, params, base, trials, rng.child("env", m), rng.child("algo", m)
            )
            probes[m] = hits / trials
        return probes[m]

    if probe(1) >= target:
        return LambdaStarResult(value=1, boundary=True, target=target, probes=probes)
    lo, hi = 1, 2
    while probe(hi) < target:
        lo, hi = hi, hi * 2
        if hi > max_offspring:
            raise RuntimeError(f"lambda* search exceeded {max_offspring} offspring")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid) >= target:
            hi = mid
        else:
            lo = mid
    return LambdaStarResult(value=hi, boundary=False, target=target, probes=probes)


@dataclass(frozen=True)
class CellResult:
    Z: int
    lam: float
    trials: int
    z_drift: DriftEstimate
    h_drift: DriftEstimate
    g_drift: DriftEstimate
    verdict: bool
    margin_sigmas: float
    representatives: int = 1


SCAN_CSV_COLUMNS = [
    "family",
    "function",
    "n",
    "c",
    "s",
    "F",
    "Z",
    "lambda",
    "trials",
    "z_drift",
    "z_se",
    "h_drift",
    "h_se",
    "g_drift",
    "g_se",
    "verdict",
]


@dataclass
class DriftScanReport:
    family: str
    function: str
    params: AlgorithmParams
    pot: PotentialSpec
    confidence: float
    cells: list[CellResult]

    @property
    def all_pass(self) -> bool:
        return all(cell.verdict for cell in self.cells)

    def rows(self) -> list[dict]:
        out = []
        for cell in self.cells:
            out.append(
                {
                    "family": self.family,
                    "function": self.function,
                    "n": self.params.n,
                    "c": self.params.c,
                    "s": self.params.s,
                    "F": self.params.F,
                    "Z": cell.Z,
                    "lambda": cell.lam,
                    "trials": cell.trials,
                    "z_drift": cell.z_drift.mean,
                    "z_se": cell.z_drift.std_error,
                    "h_drift": cell.h_drift.mean,
                    "h_se": cell.h_drift.std_error,
                    "g_drift": cell.g_drift.mean,
                    "g_se": cell.g_drift.std_error,
                    "verdict": cell.verdict,
                }
            )
        return out

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=SCAN_CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in self.rows():
                row = dict(row)
                row["verdict"] = "true" if row["verdict"] else "false"
                writer.writerow(row)

    def to_json(self, path: str) -> None:
        summary = {
            "family": self.family,
            "function": self.function,
            "confidence": self.confidence,
            "orientation": "reversed (after-minus-before)" if self.family == "G4" else "progress (before-minus-after)",
            "cells": len(self.cells),
            "passed": sum(c.verdict for c in self.cells),
            "all_pass": self.all_pass,
            "failures": [
                {"Z": c.Z, "lambda": c.lam, "g_drift": c.g_drift.mean, "g_se": c.g_drift.std_error}
                for c in self.cells
                if not c.verdict
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)


def representative_state(n: int, Z: int, rng: RngStream) -> SearchPoint:
    """All-ones with Z uniformly random positions zeroed."""
    bits = np.ones(n, dtype=np.uint8)
    if Z:
        bits[rng.gen.choice(n, size=Z, replace=False)] = 0
    return SearchPoint(bits, _ones=n - Z)


def _scan_cell(args) -> CellResult:
    (params, spec, pot, Z, lam, trials, confidence, representatives, escalation_budget, cap, master, sid) = args
    rng = RngStream(master, sid)
    probe_instance = make_instance(spec, params.n, rng.child("sym-probe"))
    reps = 1 if probe_instance.symmetric else representatives
    z_one_sided = NormalDist().inv_cdf(confidence)
    worst: tuple[float, DriftTriple, int] | None = None
    for r in range(reps):
        x = representative_state(params.n, Z, rng.child("rep", r))
        t = trials
        factor = 1
        while True:
            triple = estimate_drift(
                x, lam, params, spec, pot, t, rng.child("est", r, factor), cap=cap, confidence=confidence
            )
            g = triple.g
            # escalate while the verdict sits within one sigma of zero
            if abs(g.mean) < g.std_error and factor * 4 <= escalation_budget:
                factor *= 4
                t = trials * factor
                continue
            break
        if g.std_error > 0:
            margin = g.mean / g.std_error
        else:
            margin = math.inf if g.mean > 0 else -math.inf
        if worst is None or margin < worst[0]:
            worst = (margin, triple, t)
    margin, triple, t = worst
    verdict = triple.g.mean - z_one_sided * triple.g.std_error > 0.0
    return CellResult(
        Z=Z,
        lam=lam,
        trials=t,
        z_drift=triple.z,
        h_drift=triple.h,
        g_drift=triple.g,
        verdict=verdict,
        margin_sigmas=float(margin),
        representatives=reps,
    )


def scan_drift_region(
    params: AlgorithmParams,
    spec: FunctionSpec,
    pot: PotentialSpec,
    Z_grid: list[int],
    lambda_grid: list[float],
    trials: int,
    rng: RngStream,
    confidence: float = 0.95,
    representatives: int = 16,
    escalation_budget: int = 16,
    cap: float | None = None,
    workers: int = 1,
) -> DriftScanReport:
    """Per-cell drift estimates over a (Z, lambda) grid with sign verdicts.

    Symmetric kinds use one representative state per Z; others sample
    ``representatives`` random states and report the worst verdict.  Cells
    whose estimate lies within one sigma of zero escalate trials by 4x up to
    ``escalation_budget`` times the base count.  Output is independent of
    ``workers``.
    """
    for Z in Z_grid:
        if not (1 <= Z <= params.n):
            raise ValueError(f"Z grid entries must lie in [1, n], got {Z}")
    for lam in lambda_grid:
        if lam < 1.0:
            raise ValueError(f"lambda grid entries must be >= 1, got {lam}")
    tasks = [
        (
            params,
            spec,
            pot,
            int(Z),
            float(lam),
            trials,
            confidence,
            representatives,
            escalation_budget,
            cap,
            rng.master_seed,
            rng.child("cell", int(Z), float(lam)).stream_id,
        )
        for Z in Z_grid
        for lam in lambda_grid
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_scan_cell, tasks))
    else:
        cells = [_scan_cell(t) for t in tasks]
    return DriftScanReport(
        family=pot.family,
        function=spec.kind,
        params=params,
        pot=pot,
        confidence=confidence,
        cells=cells,
    )


# -- closed-form event probabilities vs simulation ---------------------------


@dataclass(frozen=True)
class EventProbRow:
    n: int
    Z: int
    c: float
    offspring: int
    a_closed: float
    a_mc: float
    a_se: float
    a_ok: bool
    b_closed: float
    b_mc: float
    b_se: float
    b_ok: bool
    a_exponent: float | None
    b_exponent: float | None


@dataclass
class EventProbReport:
    rows: list[EventProbRow]
    trials: int

    @property
    def all_pass(self) -> bool:
        return all(r.a_ok and r.b_ok for r in self.rows)

    @property
    def b_exponent_range(self) -> tuple[float, float] | None:
        fits = [r.b_exponent for r in self.rows if r.b_exponent is not None]
        if not fits:
            return None
        return (min(fits), max(fits))


DEFAULT_EVENT_GRID = [
    (n, Z, c, m)
    for n in (4, 10, 50)
    for Z in (1, n // 2, n)
    for c in (0.5, 1.0)
    for m in (1, 2, 10)
]


def _mc_event_probs(n: int, Z: int, c: float, m: int, trials: int, g: np.random.Generator):
    """Simulate the two events by drawing per-child flip counts in chunks."""
    p = c / n
    a_hits = 0
    b_hits = 0
    chunk_rows = max(1, 2_000_000 // m)
    done = 0
    while done < trials:
        rows = min(chunk_rows, trials - done)
        one_flips = g.binomial(n - Z, p, size=(rows, m))
        zero_flips = g.binomial(Z, p, size=(rows, m))
        a_hits += int((one_flips >= 1).all(axis=1).sum())
        b_hits += int((zero_flips == 0).all(axis=1).sum())
        done += rows
    return a_hits / trials, b_hits / trials


def verify_event_probabilities(
    grid: list[tuple[int, int, float, int]] | None,
    trials: int,
    rng: RngStream,
) -> EventProbReport:
    """Check the closed forms against simulation within 4 binomial standard errors.

    Also fits the exponent of Pr[no zero-bit flipped] = exp(-b * offspring * Z / n)
    per row, whose finite positive range witnesses that two-sided exponential
    bounds are satisfiable.
    """
    grid = DEFAULT_EVENT_GRID if grid is None else grid
    rows = []
    for (n, Z, c, m) in grid:
        a_closed = prob_A_bar(n, Z, c, m)
        b_closed = prob_B_bar(n, Z, c, m)
        g = rng.child("event", n, Z, c, m).gen
        a_mc, b_mc = _mc_event_probs(n, Z, c, m, trials, g)
        # standard error under the claimed value, so rare events are testable
        a_se = math.sqrt(a_closed * (1.0 - a_closed) / trials)
        b_se = math.sqrt(b_closed * (1.0 - b_closed) / trials)
        a_exp = -math.log(a_closed) / m if 0.0 < a_closed < 1.0 else None
        b_exp = -math.log(b_closed) * n / (m * Z) if Z >= 1 and 0.0 < b_closed < 1.0 else None
        rows.append(
            EventProbRow(
                n=n,
                Z=Z,
                c=c,
                offspring=m,
                a_closed=a_closed,
                a_mc=a_mc,
                a_se=a_se,
                a_ok=abs(a_closed - a_mc) <= 4.0 * a_se,
                b_closed=b_closed,
                b_mc=b_mc,
                b_se=b_se,
                b_ok=abs(b_closed - b_mc) <= 4.0 * b_se,
                a_exponent=a_exp,
                b_exponent=b_exp,
            )
        )
    return EventProbReport(rows=rows, trials=trials)


# -- presets ------------------------------------------------------------------


def g1_scan_preset(n: int = 1000, trials: int = 100_000) -> dict:
    """Small-s region: positive progress-drift of G1 expected on every cell."""
    params = AlgorithmParams(n=n, c=0.8, s=0.1, F=1.5)
    spec = FunctionSpec("onemax")
    pot = PotentialSpec(family="G1", n=n, F=params.F, s=params.s, K1=1.0)
    Z_grid = sorted({1, max(1, n // 100), max(1, n // 10), n // 2, (9 * n) // 10})
    lambda_grid = [float(2**k) for k in range(10)]
    return {
        "params": params,
        "spec": spec,
        "pot": pot,
        "Z_grid": Z_grid,
        "lambda_grid": lambda_grid,
        "trials": trials,
    }


def g3_scan_preset(n: int = 1000, trials: int = 100_000, region_epsilon: float = 0.05) -> dict:
    """Near-optimum region Z <= 2*epsilon*n: positive G3 drift expected even at large s."""
    params = AlgorithmParams(n=n, c=0.8, s=30.0, F=1.5)
    spec = FunctionSpec("onemax")
    pot = PotentialSpec(family="G3", n=n, F=params.F, s=params.s, K1=1.0, K2=1.0, K3=1.0)
    z_hi = max(1, int(2 * region_epsilon * n))
    Z_grid = sorted({1, max(1, z_hi // 10), max(1, z_hi // 4), max(1, z_hi // 2), z_hi})
    lambda_grid = [1.0, 2.0, 4.0, 8.0, 16.0]
    return {
        "params": params,
        "spec": spec,
        "pot": pot,
        "Z_grid": Z_grid,
        "lambda_grid": lambda_grid,
        "trials": trials,
    }


def g4_scan_preset(
    n: int = 1000,
    trials: int = 100_000,
    z_lo_frac: float = 0.45,
    z_hi_frac: float = 0.50,
) -> dict:
    """Large-s failure region: positive reversed drift of G4 expected on every cell.

    The lambda grid starts at F: at lambda = 1 the success branch cannot gain
    (max(1, lambda/F) floors at 1), so the reversal only shows for lambda >= F
    at this preset's finite s.
    """
    params = AlgorithmParams(n=n, c=0.8, s=30.0, F=1.5)
    spec = FunctionSpec("onemax")
    pot = PotentialSpec(family="G4", n=n, F=params.F, s=params.s, K4=20.0)
    lo, hi = int(z_lo_frac * n), int(z_hi_frac * n)
    step = max(1, n // 100)
    Z_grid = list(range(lo, hi + 1, step))
    lambda_grid = [1.5, 2.0, 3.0, 4.0]
    return {
        "params": params,
        "spec": spec,
        "pot": pot,
        "Z_grid": Z_grid,
        "lambda_grid": lambda_grid,
        "trials": trials,
    }

"""The self-adjusting (1,lambda)-EA with the (1:s+1)-success rule.

One generation: draw round(lambda) mutants of the parent, pick a uniformly
random fittest one, and replace the parent with it unconditionally (comma
selection).  On a strict improvement lambda shrinks to max(1, lambda/F);
otherwise it grows to lambda * F^(1/s).  The offspring count is the closest
integer to lambda, with .5 rounding away from zero.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bitstring import RngStream, SearchPoint, new_random, sample_flip_sets, apply_flips
from .fitness import FitnessInstance, FunctionSpec, make_instance

__all__ = [
    "AlgorithmParams",
    "AlgorithmState",
    "StepRecord",
    "InitPolicy",
    "RunResult",
    "TimeBudgetExceeded",
    "round_offspring",
    "update_lambda",
    "step",
    "run",
]


class TimeBudgetExceeded(RuntimeError):
    """Raised when a run outlives its optional wall-clock budget."""


@dataclass(frozen=True)
class AlgorithmParams:
    """Static configuration: dimension, mutation strength, and the success rule.

    generation_cap defaults to 500*n; generation_cap=0 is allowed and makes a
    run return immediately (degenerate but useful for edge tests).
    """

    n: int
    c: float
    s: float
    F: float
    lambda_init: float = 1.0
    generation_cap: int | None = None
    evaluation_cap: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (0.0 < self.c <= self.n):
            raise ValueError(f"c must satisfy 0 < c <= n, got c={self.c}")
        if self.s <= 0.0:
            raise ValueError(f"s must be > 0, got {self.s}")
        if self.F <= 1.0:
            raise ValueError(f"F must be > 1, got {self.F}")
        if self.lambda_init < 1.0:
            raise ValueError(f"lambda_init must be >= 1, got {self.lambda_init}")
        if self.generation_cap is None:
            object.__setattr__(self, "generation_cap", 500 * self.n)
        elif self.generation_cap < 0:
            raise ValueError(f"generation_cap must be >= 0, got {self.generation_cap}")
        if self.evaluation_cap is not None and self.evaluation_cap < 1:
            raise ValueError(f"evaluation_cap must be >= 1, got {self.evaluation_cap}")


@dataclass
class AlgorithmState:
    """Evolving state: parent, offspring-size parameter, and counters.

    ``zeromax`` caches zeromax(x); ``best_zeromax`` is the running minimum over
    all generations so far.
    """

    x: SearchPoint
    lam: float
    t: int = 0
    evaluations: int = 0
    best_zeromax: int | None = None
    last_success: bool = False
    zeromax: int = field(init=False)

    def __post_init__(self):
        self.zeromax = self.x.n - self.x.ones
        if self.best_zeromax is None:
            self.best_zeromax = self.zeromax


@dataclass(frozen=True)
class StepRecord:
    t: int
    zeromax_before: int
    zeromax_after: int
    lambda_before: float
    lambda_after: float
    offspring_count: int
    success: bool


TRAJECTORY_COLUMNS = [
    "t",
    "zeromax_before",
    "zeromax_after",
    "lambda_before",
    "lambda_after",
    "offspring_count",
    "success",
]


@dataclass(frozen=True)
class InitPolicy:
    """How x^0 is chosen: uniform random, all-ones with k random zeros, or explicit."""

    kind: str
    zeros: int = 0
    bits: tuple[int, ...] | None = None

    @staticmethod
    def uniform() -> "InitPolicy":
        return InitPolicy("uniform")

    @staticmethod
    def fixed_zeromax(k: int) -> "InitPolicy":
        if k < 0:
            raise ValueError(f"fixed_zeromax needs k >= 0, got {k}")
        return InitPolicy("fixed_zeromax", zeros=k)

    @staticmethod
    def explicit(x: SearchPoint | str) -> "InitPolicy":
        point = SearchPoint.from_string(x) if isinstance(x, str) else x
        return InitPolicy("explicit", bits=tuple(int(b) for b in point.bits))

    def build(self, n: int, rng: RngStream) -> SearchPoint:
        if self.kind == "uniform":
            return new_random(n, rng)
        if self.kind == "fixed_zeromax":
            if self.zeros > n:
                raise ValueError(f"fixed_zeromax k={self.zeros} exceeds n={n}")
            bits = np.ones(n, dtype=np.uint8)
            if self.zeros:
                bits[rng.gen.choice(n, size=self.zeros, replace=False)] = 0
            return SearchPoint(bits, _ones=n - self.zeros)
        if self.kind == "explicit":
            if len(self.bits) != n:
                raise ValueError(f"explicit init has length {len(self.bits)}, expected n={n}")
            return SearchPoint(self.bits)
        raise ValueError(f"unknown init policy {self.kind!r}")

    def label(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        if self.kind == "fixed_zeromax":
            return f"fixed_zeromax:{self.zeros}"
        return "explicit:" + "".join(str(b) for b in self.bits)

    @staticmethod
    def parse(text: str) -> "InitPolicy":
        if text == "uniform":
            return InitPolicy.uniform()
        if text.startswith("fixed_zeromax:"):
            return InitPolicy.fixed_zeromax(int(text.split(":", 1)[1]))
        if text.startswith("explicit:"):
            return InitPolicy.explicit(text.split(":", 1)[1])
        raise ValueError(f"unknown init policy {text!r}")


def round_offspring(lam: float) -> int:
    """Closest integer to lambda; ties at .5 round away from zero."""
    if lam < 1.0:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    return int(math.floor(lam + 0.5))


def update_lambda(lam: float, success: bool, F: float, s: float) -> float:
    """Success rule: shrink to max(1, lambda/F) on success, grow by F^(1/s) otherwise."""
    if lam < 1.0:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    if F <= 1.0:
        raise ValueError(f"F must be > 1, got {F}")
    if s <= 0.0:
        raise ValueError(f"s must be > 0, got {s}")
    if success:
        return max(1.0, lam / F)
    return lam * F ** (1.0 / s)


def _pick_best(keys, rng: RngStream) -> tuple[int, object]:
    """Index of a uniformly random element of the argmax set, and the max key."""
    if isinstance(keys, np.ndarray):
        top = keys.max()
        ties = np.flatnonzero(keys == top)
        if ties.size == 1:
            return int(ties[0]), top
        return int(ties[rng.gen.integers(ties.size)]), top
    top = max(keys)
    ties = [j for j, k in enumerate(keys) if k == top]
    if len(ties) == 1:
        return ties[0], top
    return ties[int(rng.gen.integers(len(ties)))], top


def _generation(
    bits: np.ndarray,
    ones: int,
    lam: float,
    instance: FitnessInstance,
    params: AlgorithmParams,
    rng: RngStream,
    growth: float,
) -> tuple[np.ndarray, int, float, int, bool]:
    """One comma-selection generation on raw state; returns (bits', ones', lambda', m, success)."""
    m = round_offspring(lam)
    counts, positions = sample_flip_sets(params.n, params.c, m, rng)
    keys = instance.child_keys_from_ones(bits, ones, counts, positions)
    if m == 1:
        best, best_key = 0, keys[0]
    else:
        best, best_key = _pick_best(keys, rng)
    success = best_key > instance.key_from_ones(bits, ones)

    k = int(counts[best])
    if k:
        start = int(counts[:best].sum()) if best else 0
        flips = positions[start : start + k]
        flipped_ones = int(bits[flips].sum())
        bits = apply_flips(bits, flips)
        ones = ones + (k - flipped_ones) - flipped_ones
    if success:
        lam = max(1.0, lam / params.F)
    else:
        lam = lam * growth
    return bits, ones, lam, m, success


def step(
    state: AlgorithmState,
    instance: FitnessInstance,
    params: AlgorithmParams,
    rng: RngStream,
) -> tuple[AlgorithmState, StepRecord]:
    """Advance the chain by one generation; requires the parent is not yet optimal.

    The selected child replaces the parent even on ties and regressions.
    lambda is never clamped beyond the rule's floor at 1.
    """
    if state.zeromax == 0:
        raise ValueError("step requires zeromax(x) > 0; the chain is already at the optimum")
    growth = params.F ** (1.0 / params.s)
    bits, ones, lam, m, success = _generation(
        state.x.bits, state.x.ones, state.lam, instance, params, rng, growth
    )
    x_new = SearchPoint(bits, _ones=ones)
    z_after = params.n - ones
    record = StepRecord(
        t=state.t,
        zeromax_before=state.zeromax,
        zeromax_after=z_after,
        lambda_before=state.lam,
        lambda_after=lam,
        offspring_count=m,
        success=success,
    )
    new_state = AlgorithmState(
        x=x_new,
        lam=lam,
        t=state.t + 1,
        evaluations=state.evaluations + m,
        best_zeromax=min(state.best_zeromax, z_after),
        last_success=success,
    )
    return new_state, record


@dataclass
class RunResult:
    """Outcome of a full run.  Hitting a cap is a normal outcome, not an error."""

    generations: int
    evaluations: int
    hit_cap: bool
    final_zeromax: int
    final_lambda: float
    success_generations: int
    init_zeromax: int
    final_x: SearchPoint
    trajectory: list[StepRecord]


def run(
    params: AlgorithmParams,
    spec: FunctionSpec,
    seed: RngStream,
    init: InitPolicy | None = None,
    trajectory: str = "sampled",
    time_budget: float | None = None,
) -> RunResult:
    """Full optimization loop: advance the environment, then step, until done.

    Stops at the optimum or at the generation/evaluation cap.  ``trajectory``
    is one of "none", "sampled" (every ceil(n/100)-th step plus every success
    step, bounding log size on long failing runs), or "full".

    Randomness is split into independent sub-streams (init / algorithm /
    environment), so e.g. a hook environment consuming extra draws does not
    perturb the mutation sequence.  Identical (params, spec, seed, init) give
    identical results.
    """
    if trajectory not in ("none", "sampled", "full"):
        raise ValueError(f"unknown trajectory mode {trajectory!r}")
    init = init or InitPolicy.uniform()
    rng_init = seed.child("init")
    rng_algo = seed.child("algo")
    rng_env = seed.child("env")

    x = init.build(params.n, rng_init)
    instance = make_instance(spec, params.n, seed.child("instance"))
    bits, ones = x.bits, x.ones
    init_z = params.n - ones
    lam = float(params.lambda_init)
    growth = params.F ** (1.0 / params.s)
    sample_every = max(1, math.ceil(params.n / 100))
    records: list[StepRecord] = []
    evaluations = 0
    successes = 0
    t = 0
    start = time.monotonic() if time_budget is not None else 0.0

    while params.n - ones > 0 and t < params.generation_cap:
        if params.evaluation_cap is not None and evaluations >= params.evaluation_cap:
            break
        if time_budget is not None and t % 4096 == 0 and time.monotonic() - start > time_budget:
            raise TimeBudgetExceeded(f"run exceeded time budget of {time_budget}s at generation {t}")
        # only hook environments look at the parent; skip the copy otherwise
        current = SearchPoint(bits, _ones=ones) if instance.needs_parent else None
        instance = instance.advanced(t, current, rng_env)
        z_before = params.n - ones
        lam_before = lam
        bits, ones, lam, m, success = _generation(bits, ones, lam, instance, params, rng_algo, growth)
        evaluations += m
        successes += success
        if trajectory == "full" or (trajectory == "sampled" and (success or t % sample_every == 0)):
            records.append(
                StepRecord(t, z_before, params.n - ones, lam_before, lam, m, success)
            )
        t += 1

    final_z = params.n - ones
    return RunResult(
        generations=t,
        evaluations=evaluations,
        hit_cap=final_z > 0,
        final_zeromax=final_z,
        final_lambda=lam,
        success_generations=successes,
        init_zeromax=init_z,
        final_x=SearchPoint(bits, _ones=ones),
        trajectory=records,
    )

"""Potential functions g(x, lambda) = zeromax(x) + h(lambda) and exact event probabilities.

Four penalty families over lambda, all defined against lambda_max = F^(1/s) * n:

* G1: h = -K1 * min(0, log_F(lambda/lambda_max))        (log penalty, zero above lambda_max)
* G2: h =  K2 * max(0, 1/lambda - 1/lambda_max)         (harmonic penalty)
* G3: h =  G1's term + K2 * exp(-K3 * lambda)           (log penalty plus short-range boost)
* G4: h = -K4 * log_F(lambda * F)^2                     (negative, used with reversed drift)

G1-G3 sandwich zeromax: g - lower_gap <= zeromax <= g with a closed-form gap.
G4 has no sandwich; its gap grows with lambda.

The constants K1-K4 are existential in the analysis this mirrors; the defaults
here (K1=K2=K3=1, K4=20) are scan parameters, not ground truth, and every one
is overridable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bitstring import SearchPoint

__all__ = [
    "FAMILIES",
    "PotentialSpec",
    "eval_h",
    "eval_g",
    "eval_g_z",
    "sandwich_bounds",
    "prob_A_bar",
    "prob_B_bar",
    "success_prob_lower_bound",
]

FAMILIES = ("G1", "G2", "G3", "G4")


@dataclass(frozen=True)
class PotentialSpec:
    """Family selector plus the constants the family reads.

    K1..K3 are namespaced per family: G3's K1/K2/K3 are unrelated to G1's K1
    and G2's K2 even though the symbols coincide.  lambda_max is always
    recomputed from (F, s, n), never stored.
    """

    family: str
    n: int
    F: float
    s: float
    K1: float = 1.0
    K2: float = 1.0
    K3: float = 1.0
    K4: float = 20.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}; expected one of {FAMILIES}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.F <= 1.0:
            raise ValueError(f"F must be > 1, got {self.F}")
        if self.s <= 0.0:
            raise ValueError(f"s must be > 0, got {self.s}")
        for name in ("K1", "K2", "K3", "K4"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def lambda_max(self) -> float:
        return self.F ** (1.0 / self.s) * self.n


def _log_f(value: float, F: float) -> float:
    return math.log(value) / math.log(F)


def eval_h(spec: PotentialSpec, lam: float) -> float:
    """Penalty term of the selected family at lambda >= 1."""
    if lam < 1.0:
        raise ValueError(f"lambda must be >= 1, got {lam}")
    if spec.family == "G1":
        return -spec.K1 * min(0.0, _log_f(lam / spec.lambda_max, spec.F))
    if spec.family == "G2":
        return spec.K2 * max(0.0, 1.0 / lam - 1.0 / spec.lambda_max)
    if spec.family == "G3":
        log_part = -spec.K1 * min(0.0, _log_f(lam / spec.lambda_max, spec.F))
        return log_part + spec.K2 * math.exp(-spec.K3 * lam)
    return -spec.K4 * (_log_f(lam, spec.F) + 1.0) ** 2


def eval_g(spec: PotentialSpec, x: SearchPoint, lam: float) -> float:
    """zeromax(x) + h(lambda)."""
    return (x.n - x.ones) + eval_h(spec, lam)


def eval_g_z(spec: PotentialSpec, z: int, lam: float) -> float:
    """As eval_g, for a state known only through its zeromax value."""
    return z + eval_h(spec, lam)


def sandwich_bounds(spec: PotentialSpec) -> tuple[float, float]:
    """(lower_gap, upper_gap) with g - lower_gap <= zeromax <= g + upper_gap.

    upper_gap is 0 for all supported families (h is non-negative).  G4 is
    rejected: its |g - zeromax| is unbounded in lambda.
    """
    if spec.family == "G1":
        return spec.K1 * _log_f(spec.lambda_max, spec.F), 0.0
    if spec.family == "G2":
        return spec.K2 * (1.0 - 1.0 / spec.lambda_max), 0.0
    if spec.family == "G3":
        return spec.K1 * _log_f(spec.lambda_max, spec.F) + spec.K2, 0.0
    raise ValueError("G4 has no sandwich bounds; |g4 - zeromax| is unbounded in lambda")


def _check_event_args(n: int, Z: int, c: float, offspring: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0 <= Z <= n):
        raise ValueError(f"Z must satisfy 0 <= Z <= n, got Z={Z} n={n}")
    if not (0.0 < c <= n):
        raise ValueError(f"c must satisfy 0 < c <= n, got {c}")
    if offspring < 1:
        raise ValueError(f"offspring must be >= 1, got {offspring}")


def prob_A_bar(n: int, Z: int, c: float, offspring: int) -> float:
    """Probability that every one of `offspring` children flips at least one one-bit.

    A single child keeps all n-Z one-bits with probability (1-c/n)^(n-Z);
    children are independent.
    """
    _check_event_args(n, Z, c, offspring)
    per_child_keeps = (1.0 - c / n) ** (n - Z)
    return (1.0 - per_child_keeps) ** offspring


def prob_B_bar(n: int, Z: int, c: float, offspring: int) -> float:
    """Probability that no child flips any zero-bit: (1-c/n)^(Z*offspring)."""
    _check_event_args(n, Z, c, offspring)
    return (1.0 - c / n) ** (Z * offspring)


def success_prob_lower_bound(n: int, Z: int, c: float, offspring: int) -> float:
    """Certified lower bound 1 - exp(-c*e^(-c)*offspring*Z/(2n)) on the
    per-generation success probability, valid for every monotone instance.

    Requires Z >= 1 and 0 < c <= 1 (the certification breaks outside that
    range).
    """
    _check_event_args(n, Z, c, offspring)
    if Z < 1:
        raise ValueError("the success bound requires Z >= 1")
    if c > 1.0:
        raise ValueError(f"the success bound is certified only for c <= 1, got c={c}")
    return 1.0 - math.exp(-0.5 * c * math.exp(-c) * offspring * Z / n)

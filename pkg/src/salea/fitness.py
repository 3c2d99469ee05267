"""Strictly monotone benchmark functions behind a comparison-oracle interface.

Every kind induces, for each generation, a strict total preorder on bitstrings
that is consistent with bitwise domination and has the all-ones string as its
unique maximum.  Orders are exposed through sortable *keys* rather than
mandatory numeric values: binary-value weights 2^(n-1) overflow any fixed-width
numeric long before the dimensions used here, and selection only needs order.

Kinds:

* ``onemax``          -- number of one-bits.
* ``binary``          -- first half of the bits weighted n, second half weighted 1.
* ``binary_value``    -- bit i carries weight 2^(n-1-i); the first bit is the most
                         significant, so ``101`` compares like the numeral 5.
* ``dynamic_binval``  -- binary_value through a fresh uniform position permutation
                         every generation.
* ``hot_topic``       -- a leveled construction with parameters (L, alpha, beta,
                         epsilon): per level i a random A_i of size floor(alpha*n)
                         with B_i inside it of size floor(beta*n); the level of x is
                         the largest i whose A_i contains fewer than epsilon*beta*n
                         zeros, and the key is (level, ones in B_(level+1), ones
                         elsewhere) compared lexicographically.
* ``adversarial_hook`` -- a user strategy called with (t, x_t) each generation that
                         must return a valid monotone instance; validity is
                         spot-checked on random dominated pairs.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bitstring import RngStream, SearchPoint, new_random

__all__ = [
    "Comparison",
    "FunctionSpec",
    "FitnessInstance",
    "MonotonicityError",
    "make_instance",
    "advance",
    "compare",
    "value",
    "is_optimum",
    "monotonicity_fuzz",
    "spec_to_dict",
    "spec_from_dict",
    "instance_to_dict",
    "instance_from_dict",
    "KINDS",
]

KINDS = ("onemax", "binary", "binary_value", "dynamic_binval", "hot_topic", "adversarial_hook")


class Comparison(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class MonotonicityError(RuntimeError):
    """An adversarial hook produced an order violating strict monotonicity."""


@dataclass(frozen=True)
class FunctionSpec:
    """Which benchmark to build, with kind-specific parameters.

    ``L, alpha, beta, epsilon`` apply to hot_topic only; ``hook`` and
    ``hook_checks`` to adversarial_hook only.
    """

    kind: str
    L: int = 100
    alpha: float = 0.25
    beta: float = 0.05
    epsilon: float = 0.05
    hook: Callable[[int, SearchPoint], "FitnessInstance"] | None = field(
        default=None, compare=False
    )
    hook_checks: int = 32

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "hot_topic":
            if not (0.0 < self.beta <= self.alpha < 1.0):
                raise ValueError(
                    f"hot_topic requires 0 < beta <= alpha < 1, got alpha={self.alpha} beta={self.beta}"
                )
            if not (0.0 < self.epsilon < 1.0):
                raise ValueError(f"hot_topic requires 0 < epsilon < 1, got epsilon={self.epsilon}")
            if self.L < 1:
                raise ValueError(f"hot_topic requires L >= 1, got L={self.L}")
        if self.kind == "adversarial_hook" and not callable(self.hook):
            raise ValueError("adversarial_hook requires a callable hook(t, x) -> FitnessInstance")

    @property
    def name(self) -> str:
        return self.kind


def spec_to_dict(spec: FunctionSpec) -> dict:
    if spec.kind == "adversarial_hook":
        raise ValueError("adversarial_hook specs are not serializable (they carry a callable)")
    d = {"kind": spec.kind}
    if spec.kind == "hot_topic":
        d.update(L=spec.L, alpha=spec.alpha, beta=spec.beta, epsilon=spec.epsilon)
    return d


def spec_from_dict(d: dict) -> FunctionSpec:
    known = {"kind", "L", "alpha", "beta", "epsilon"}
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown function spec key {sorted(unknown)[0]!r}")
    return FunctionSpec(**d)


class FitnessInstance:
    """One generation of a monotone function, exposed as a comparison oracle.

    Instances are immutable; :meth:`advanced` returns a fresh instance for the
    next generation.  ``symmetric`` marks kinds whose behaviour on a state
    depends on the zeromax level only (used by drift scans to decide how many
    representative states per level to sample).
    """

    kind = "abstract"
    symmetric = False
    needs_parent = False  # True when advanced() actually reads x_t

    def __init__(self, spec: FunctionSpec, n: int):
        self.spec = spec
        self.n = n

    # -- order ----------------------------------------------------------

    def key(self, bits: np.ndarray):
        """Sortable key; key(x) > key(y) iff x is fitter this generation."""
        raise NotImplementedError

    def child_keys(self, parent_bits: np.ndarray, counts: np.ndarray, positions: np.ndarray):
        """Keys of mutants given as flip sets (see ``sample_flip_sets``).

        Default path materializes each child; kinds override with batched or
        incremental evaluation.  Must equal ``[key(child_j)]`` exactly.
        """
        return [self.key(child) for child in _materialize(parent_bits, counts, positions)]

    # -- lifecycle and values --------------------------------------------

    def key_from_ones(self, bits: np.ndarray, ones: int):
        """As key(), given the known one-bit count (O(1) for onemax)."""
        return self.key(bits)

    def child_keys_from_ones(self, parent_bits: np.ndarray, ones: int, counts, positions):
        """As child_keys(), given the known one-bit count of the parent."""
        return self.child_keys(parent_bits, counts, positions)

    def advanced(self, t: int, x: SearchPoint, rng: RngStream) -> "FitnessInstance":
        return self

    def value(self, bits: np.ndarray):
        """Numeric fitness when representable, else None; ordering matches key."""
        return None

    def state_dict(self) -> dict:
        return {}


def _materialize(parent_bits: np.ndarray, counts: np.ndarray, positions: np.ndarray) -> np.ndarray:
    m = counts.size
    children = np.repeat(parent_bits[None, :], m, axis=0)
    if positions.size:
        rows = np.repeat(np.arange(m), counts)
        children[rows, positions] ^= 1
    return children


def _delta_keys(base: int, weights: np.ndarray | None, parent_bits, counts, positions):
    """base + sum over flips of w(pos) * (+1 if 0->1 else -1), per child."""
    m = counts.size
    if positions.size == 0:
        if m <= 8:
            return [base] * m
        return np.full(m, base, dtype=np.int64)
    if m <= 8:
        # small batches dominate run time; plain loops beat numpy dispatch here
        keys = []
        start = 0
        for j in range(m):
            k = int(counts[j])
            delta = 0
            for i in range(start, start + k):
                pos = positions[i]
                sign = 1 - 2 * int(parent_bits[pos])
                delta += sign * int(weights[pos]) if weights is not None else sign
            keys.append(base + delta)
            start += k
        return keys
    signs = 1 - 2 * parent_bits[positions].astype(np.int64)
    if weights is not None:
        signs = signs * weights[positions]
    rows = np.repeat(np.arange(m), counts)
    deltas = np.bincount(rows, weights=signs, minlength=m)
    return base + deltas.astype(np.int64)


def _packed_rows(matrix: np.ndarray) -> list[bytes]:
    packed = np.packbits(matrix, axis=1)
    return [row.tobytes() for row in packed]


class OneMaxInstance(FitnessInstance):
    kind = "onemax"
    symmetric = True

    def key(self, bits):
        return int(bits.sum())

    def key_from_ones(self, bits, ones):
        return ones

    def child_keys(self, parent_bits, counts, positions):
        return _delta_keys(int(parent_bits.sum()), None, parent_bits, counts, positions)

    def child_keys_from_ones(self, parent_bits, ones, counts, positions):
        return _delta_keys(ones, None, parent_bits, counts, positions)

    def value(self, bits):
        return int(bits.sum())


class BinaryInstance(FitnessInstance):
    kind = "binary"
    symmetric = False

    def __init__(self, spec, n):
        super().__init__(spec, n)
        w = np.ones(n, dtype=np.int64)
        w[: n // 2] = n
        self._weights = w

    def key(self, bits):
        return int(bits.astype(np.int64) @ self._weights)

    def child_keys(self, parent_bits, counts, positions):
        return _delta_keys(self.key(parent_bits), self._weights, parent_bits, counts, positions)

    def value(self, bits):
        return self.key(bits)


class BinaryValueInstance(FitnessInstance):
    kind = "binary_value"
    symmetric = False

    def key(self, bits):
        return np.packbits(bits).tobytes()

    def child_keys(self, parent_bits, counts, positions):
        return _packed_rows(_materialize(parent_bits, counts, positions))

    def value(self, bits):
        if self.n > 64:
            return None
        out = 0
        for b in bits:
            out = (out << 1) | int(b)
        return out


class DynamicBinValInstance(FitnessInstance):
    kind = "dynamic_binval"
    # a fresh uniform permutation is drawn per generation (and per drift trial),
    # so behaviour on a state depends on its zeromax level only
    symmetric = True

    def __init__(self, spec, n, order: np.ndarray):
        super().__init__(spec, n)
        self.order = order  # positions sorted by descending weight

    def key(self, bits):
        return np.packbits(bits[self.order]).tobytes()

    def child_keys(self, parent_bits, counts, positions):
        children = _materialize(parent_bits, counts, positions)
        return _packed_rows(children[:, self.order])

    def advanced(self, t, x, rng):
        return DynamicBinValInstance(self.spec, self.n, rng.gen.permutation(self.n))

    def value(self, bits):
        if self.n > 64:
            return None
        out = 0
        for pos in self.order:
            out = (out << 1) | int(bits[pos])
        return out

    def state_dict(self):
        return {"order": self.order.tolist()}


class HotTopicInstance(FitnessInstance):
    kind = "hot_topic"
    symmetric = False

    def __init__(self, spec, n, a_sets: list[np.ndarray], b_sets: list[np.ndarray]):
        super().__init__(spec, n)
        self.a_sets = a_sets
        self.b_sets = b_sets
        self.threshold = spec.epsilon * spec.beta * n
        mask = np.zeros((spec.L, n), dtype=np.uint8)
        for i, a in enumerate(a_sets):
            mask[i, a] = 1
        self._a_mask = mask

    @classmethod
    def fresh(cls, spec, n, rng):
        size_a = int(spec.alpha * n)
        size_b = int(spec.beta * n)
        if size_a < 1:
            raise ValueError(f"hot_topic needs floor(alpha*n) >= 1, got alpha={spec.alpha} n={n}")
        a_sets, b_sets = [], []
        for _ in range(spec.L):
            a = np.sort(rng.gen.choice(n, size=size_a, replace=False))
            b = np.sort(rng.gen.choice(a, size=size_b, replace=False)) if size_b else np.empty(0, dtype=np.int64)
            a_sets.append(a.astype(np.int64))
            b_sets.append(b.astype(np.int64))
        return cls(spec, n, a_sets, b_sets)

    def _levels(self, zero_counts: np.ndarray) -> np.ndarray:
        # zero_counts: (..., L); level = largest 1-based index below threshold, else 0
        hit = zero_counts < self.threshold
        idx = np.arange(1, self.spec.L + 1)
        return (hit * idx).max(axis=-1)

    def _key_parts(self, bits, level: int) -> tuple[int, int, int]:
        ones = int(bits.sum())
        if level < self.spec.L:
            inside = int(bits[self.b_sets[level]].sum()) if self.b_sets[level].size else 0
        else:
            inside = 0  # B_(L+1) is empty
        return (level, inside, ones - inside)

    def key(self, bits):
        zeros = (1 - bits).astype(np.int64)
        zero_counts = self._a_mask @ zeros
        return self._key_parts(bits, int(self._levels(zero_counts)))

    def child_keys(self, parent_bits, counts, positions):
        children = _materialize(parent_bits, counts, positions)
        zero_counts = (1 - children).astype(np.int64) @ self._a_mask.T.astype(np.int64)
        levels = self._levels(zero_counts)
        return [self._key_parts(children[j], int(levels[j])) for j in range(counts.size)]

    def value(self, bits):
        level, inside, outside = self.key(bits)
        base = self.n + 1
        return (level * base + inside) * base + outside

    def state_dict(self):
        return {
            "A": [a.tolist() for a in self.a_sets],
            "B": [b.tolist() for b in self.b_sets],
        }


class AdversarialHookInstance(FitnessInstance):
    kind = "adversarial_hook"
    symmetric = False
    needs_parent = True

    def __init__(self, spec, n, inner: FitnessInstance | None = None):
        super().__init__(spec, n)
        self.inner = inner

    def _require_inner(self) -> FitnessInstance:
        if self.inner is None:
            raise RuntimeError("adversarial_hook instance is usable only after the first advance")
        return self.inner

    def key(self, bits):
        return self._require_inner().key(bits)

    def child_keys(self, parent_bits, counts, positions):
        return self._require_inner().child_keys(parent_bits, counts, positions)

    def value(self, bits):
        return self._require_inner().value(bits)

    def advanced(self, t, x, rng):
        inner = self.spec.hook(t, x)
        if not isinstance(inner, FitnessInstance):
            raise MonotonicityError(f"hook returned {type(inner).__name__}, not a FitnessInstance")
        if inner.n != self.n:
            raise MonotonicityError(f"hook returned an instance of dimension {inner.n}, expected {self.n}")
        _spot_check_monotone(inner, self.spec.hook_checks, t, rng)
        return AdversarialHookInstance(self.spec, self.n, inner)


def _spot_check_monotone(instance: FitnessInstance, checks: int, t: int, rng: RngStream) -> None:
    # full verification is exponential; k random dominated pairs catch gross breakage
    n = instance.n
    g = rng.gen
    for _ in range(checks):
        bits = g.integers(0, 2, size=n, dtype=np.uint8)
        ones = np.flatnonzero(bits)
        if ones.size == 0:
            bits[g.integers(n)] = 1
            ones = np.flatnonzero(bits)
        k = int(g.integers(1, ones.size + 1))
        drop = g.choice(ones, size=k, replace=False)
        dominated = bits.copy()
        dominated[drop] = 0
        if not instance.key(bits) > instance.key(dominated):
            raise MonotonicityError(
                f"hook order at generation {t} is not strictly monotone: "
                f"a dominated point did not compare below its dominator"
            )


def make_instance(spec: FunctionSpec, n: int, rng: RngStream) -> FitnessInstance:
    """Build an instance ready for generation t=0; static kinds carry no state."""
    if n < 2:
        raise ValueError(f"fitness instances require n >= 2, got n={n}")
    if spec.kind == "onemax":
        return OneMaxInstance(spec, n)
    if spec.kind == "binary":
        return BinaryInstance(spec, n)
    if spec.kind == "binary_value":
        return BinaryValueInstance(spec, n)
    if spec.kind == "dynamic_binval":
        return DynamicBinValInstance(spec, n, rng.gen.permutation(n))
    if spec.kind == "hot_topic":
        return HotTopicInstance.fresh(spec, n, rng)
    return AdversarialHookInstance(spec, n)


def advance(instance: FitnessInstance, t: int, x_t: SearchPoint, rng: RngStream) -> FitnessInstance:
    """Next-generation instance; called once per generation before offspring evaluation."""
    return instance.advanced(t, x_t, rng)


def _check_dim(instance: FitnessInstance, x: SearchPoint) -> None:
    if x.n != instance.n:
        raise ValueError(f"dimension mismatch: point has n={x.n}, instance has n={instance.n}")


def compare(instance: FitnessInstance, y1: SearchPoint, y2: SearchPoint) -> Comparison:
    _check_dim(instance, y1)
    _check_dim(instance, y2)
    k1, k2 = instance.key(y1.bits), instance.key(y2.bits)
    if k1 > k2:
        return Comparison.GREATER
    if k1 < k2:
        return Comparison.LESS
    return Comparison.EQUAL


def value(instance: FitnessInstance, x: SearchPoint):
    _check_dim(instance, x)
    return instance.value(x.bits)


def is_optimum(instance: FitnessInstance, x: SearchPoint) -> bool:
    _check_dim(instance, x)
    return x.ones == x.n


def monotonicity_fuzz(
    spec: FunctionSpec,
    n: int,
    pairs: int,
    rng: RngStream,
    generations: int = 4,
) -> int:
    """Count violations of compare(x, dominated(x)) == GREATER over random pairs.

    Pairs are spread over `generations` sampled generations (dynamic kinds are
    advanced in between).  Returns 0 for a correct implementation.
    """
    instance = make_instance(spec, n, rng.child("make"))
    g = rng.gen
    violations = 0
    per_gen = max(1, pairs // generations)
    for gen in range(generations):
        instance = instance.advanced(gen, new_random(n, rng.child("adv", gen)), rng.child("env", gen))
        for _ in range(per_gen):
            bits = g.integers(0, 2, size=n, dtype=np.uint8)
            ones = np.flatnonzero(bits)
            if ones.size == 0:
                bits[g.integers(n)] = 1
                ones = np.flatnonzero(bits)
            k = int(g.integers(1, ones.size + 1))
            drop = g.choice(ones, size=k, replace=False)
            dominated = bits.copy()
            dominated[drop] = 0
            if not instance.key(bits) > instance.key(dominated):
                violations += 1
    return violations


def instance_to_dict(instance: FitnessInstance) -> dict:
    """Replay dump: spec, dimension, and per-generation hidden state."""
    return {
        "spec": spec_to_dict(instance.spec),
        "n": instance.n,
        "state": instance.state_dict(),
    }


def instance_from_dict(d: dict) -> FitnessInstance:
    spec = spec_from_dict(d["spec"])
    n = int(d["n"])
    state = d.get("state", {})
    if spec.kind == "dynamic_binval":
        return DynamicBinValInstance(spec, n, np.asarray(state["order"], dtype=np.int64))
    if spec.kind == "hot_topic":
        a_sets = [np.asarray(a, dtype=np.int64) for a in state["A"]]
        b_sets = [np.asarray(b, dtype=np.int64) for b in state["B"]]
        return HotTopicInstance(spec, n, a_sets, b_sets)
    return make_instance(spec, n, RngStream(0))


def instance_to_json(instance: FitnessInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh)


def instance_from_json(path: str) -> FitnessInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))

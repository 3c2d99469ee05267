"""Bitstring genotypes, addressable random streams, and standard bit mutation."""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = [
    "RngStream",
    "SearchPoint",
    "derive_stream_id",
    "new_random",
    "mutate",
    "zeromax",
    "sample_flip_sets",
    "apply_flips",
]


def derive_stream_id(*parts) -> int:
    """Map a label tuple to a stable 64-bit stream id.

    The mapping is pure (no global state), so concurrent executors can derive
    the stream for (run, role, index) without coordination.
    """
    text = "/".join(repr(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


class RngStream:
    """Counter-based random stream addressed by (master_seed, stream_id).

    Two streams with the same address replay byte-identical outputs; distinct
    stream ids give statistically independent streams (Philox keyed through
    numpy's SeedSequence).  A stream is owned by exactly one consumer at a
    time; share addresses, not stream objects.
    """

    __slots__ = ("master_seed", "stream_id", "gen")

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence((self.master_seed, self.stream_id))
        self.gen = np.random.Generator(np.random.Philox(seq))

    def child(self, *parts) -> "RngStream":
        """Derive an independent stream for a named role, e.g. ``child("env")``."""
        return RngStream(self.master_seed, derive_stream_id(self.stream_id, *parts))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


class SearchPoint:
    """Immutable bitstring over {0,1}^n.

    ``bits[0]`` is the first character of the string notation, e.g.
    ``SearchPoint.from_string("101")`` has bits (1, 0, 1).
    """

    __slots__ = ("bits", "ones")

    def __init__(self, bits, _ones: int | None = None):
        arr = np.array(bits, dtype=np.uint8, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("bits must be a non-empty one-dimensional sequence")
        if _ones is None:
            if int(arr.max()) > 1:
                raise ValueError("bits must contain only 0 and 1")
            _ones = int(arr.sum())
        arr.setflags(write=False)
        self.bits = arr
        self.ones = _ones

    @property
    def n(self) -> int:
        return self.bits.size

    @classmethod
    def from_string(cls, text: str) -> "SearchPoint":
        return cls([int(ch) for ch in text])

    def to_string(self) -> str:
        return "".join(str(int(b)) for b in self.bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SearchPoint):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool((self.bits == other.bits).all())

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __repr__(self) -> str:
        s = self.to_string()
        if len(s) > 32:
            s = s[:32] + "..."
        return f"SearchPoint({s}, n={self.n})"


def new_random(n: int, rng: RngStream) -> SearchPoint:
    """Uniform random bitstring: each bit independently 1 with probability 1/2."""
    if n < 1:
        raise ValueError(f"dimension n must be >= 1, got {n}")
    bits = rng.gen.integers(0, 2, size=n, dtype=np.uint8)
    return SearchPoint(bits, _ones=int(bits.sum()))


def zeromax(x: SearchPoint) -> int:
    """Number of zero-bits; 0 exactly at the all-ones optimum."""
    return x.n - x.ones


# shared immutable returns for the single-mutation fast path
_NO_POSITIONS = np.empty(0, dtype=np.int64)
_NO_POSITIONS.setflags(write=False)
_ONE_ZERO = np.zeros(1, dtype=np.int64)
_ONE_ZERO.setflags(write=False)
_ONE_ONE = np.ones(1, dtype=np.int64)
_ONE_ONE.setflags(write=False)


def sample_flip_sets(n: int, c: float, m: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Draw the flipped positions for m independent standard bit mutations.

    Each of the n bits flips independently with probability c/n.  Returns
    ``(counts, positions)`` where ``counts[j]`` is the number of flips in
    mutation j and ``positions`` concatenates the per-mutation position sets
    in order.  Positions within one mutation are distinct.

    For c/n < 0.1 the flip count is drawn from Binomial(n, c/n) and positions
    are then chosen uniformly without replacement, which is distributionally
    identical to per-bit sampling but does not touch all n bits.
    """
    if not (0.0 < c <= n):
        raise ValueError(f"mutation strength must satisfy 0 < c <= n, got c={c} for n={n}")
    if m < 1:
        raise ValueError(f"number of mutations must be >= 1, got {m}")
    p = c / n
    g = rng.gen
    if p < 0.1 and m == 1:
        k = int(g.binomial(n, p))
        if k == 0:
            return _ONE_ZERO, _NO_POSITIONS
        if k == 1:
            return _ONE_ONE, g.integers(0, n, size=1)
        return np.array([k], dtype=np.int64), _distinct(n, k, g)
    if p < 0.1:
        counts = g.binomial(n, p, size=m)
        total = int(counts.sum())
        positions = np.empty(total, dtype=np.int64)
        if total == 0:
            return counts, positions
        offsets = np.concatenate(([0], np.cumsum(counts)))
        singles = np.flatnonzero(counts == 1)
        if singles.size:
            positions[offsets[singles]] = g.integers(0, n, size=singles.size)
        pairs = np.flatnonzero(counts == 2)
        if pairs.size:
            draws = g.integers(0, n, size=(pairs.size, 2))
            clash = draws[:, 0] == draws[:, 1]
            while clash.any():
                draws[clash] = g.integers(0, n, size=(int(clash.sum()), 2))
                clash = draws[:, 0] == draws[:, 1]
            positions[offsets[pairs]] = draws[:, 0]
            positions[offsets[pairs] + 1] = draws[:, 1]
        for j in np.flatnonzero(counts >= 3):
            k = int(counts[j])
            positions[offsets[j] : offsets[j] + k] = _distinct(n, k, g)
        return counts, positions
    flips = g.random((m, n)) < p
    rows, cols = np.nonzero(flips)
    counts = np.bincount(rows, minlength=m).astype(np.int64)
    return counts, cols.astype(np.int64)


def _distinct(n: int, k: int, g: np.random.Generator) -> np.ndarray:
    """k distinct positions, uniform over k-subsets; rejection is cheap for k << n."""
    if k > n // 2:
        return g.permutation(n)[:k]
    picks = g.integers(0, n, size=k)
    while len(set(picks.tolist())) != k:
        picks = g.integers(0, n, size=k)
    return picks


def apply_flips(bits: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Fresh writable copy of ``bits`` with the given positions flipped."""
    out = bits.copy()
    out[positions] ^= 1
    return out


def mutate(x: SearchPoint, c: float, rng: RngStream) -> SearchPoint:
    """Flip each bit of x independently with probability c/n; x is unmodified."""
    counts, positions = sample_flip_sets(x.n, c, 1, rng)
    k = int(counts[0])
    if k == 0:
        return x
    flipped_ones = int(x.bits[positions].sum())
    new_ones = x.ones + (k - flipped_ones) - flipped_ones
    return SearchPoint(apply_flips(x.bits, positions), _ones=new_ones)

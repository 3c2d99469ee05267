import math

import numpy as np
import pytest
from scipy import stats

from salea.bitstring import (
    RngStream,
    SearchPoint,
    apply_flips,
    mutate,
    new_random,
    sample_flip_sets,
    zeromax,
)


def test_new_random_rejects_n_zero():
    with pytest.raises(ValueError):
        new_random(0, RngStream(0))


def test_new_random_single_bit_is_fair():
    rng = RngStream(11)
    ones = sum(new_random(1, rng).ones for _ in range(100_000))
    assert 0.49 <= ones / 100_000 <= 0.51


def test_new_random_mean_onemax():
    rng = RngStream(12)
    mean = sum(new_random(1000, rng).ones for _ in range(1000)) / 1000
    assert 450 <= mean <= 550


def test_rng_replay_is_byte_identical():
    a = RngStream(99, 7).gen.bytes(64)
    b = RngStream(99, 7).gen.bytes(64)
    assert a == b
    assert RngStream(99, 8).gen.bytes(64) != a
    # derived child streams replay too
    assert RngStream(99, 7).child("env").gen.bytes(16) == RngStream(99, 7).child("env").gen.bytes(16)


def test_new_random_replay():
    assert new_random(64, RngStream(5)) == new_random(64, RngStream(5))


def test_searchpoint_basics():
    x = SearchPoint.from_string("10110")
    assert x.n == 5 and x.ones == 3
    assert zeromax(x) == 2
    assert x.to_string() == "10110"
    assert x == SearchPoint([1, 0, 1, 1, 0])
    assert hash(x) == hash(SearchPoint.from_string("10110"))
    with pytest.raises(ValueError):
        SearchPoint([0, 1, 2])
    with pytest.raises(ValueError):
        SearchPoint([])
    with pytest.raises(ValueError):
        x.bits[0] = 0


def test_zeromax_examples():
    assert zeromax(SearchPoint.from_string("11111111")) == 0
    assert zeromax(SearchPoint.from_string("00000000")) == 8
    assert zeromax(SearchPoint.from_string("10110")) == 2


def test_zeromax_onemax_partition():
    rng = RngStream(3)
    for _ in range(50):
        x = new_random(33, rng)
        assert zeromax(x) + x.ones == x.n


def test_mutate_validates_c():
    x = SearchPoint.from_string("1010")
    with pytest.raises(ValueError):
        mutate(x, 0.0, RngStream(0))
    with pytest.raises(ValueError):
        mutate(x, 4.5, RngStream(0))


def test_mutate_vanishing_c_never_flips():
    rng = RngStream(21)
    x = new_random(10, rng)
    for _ in range(10_000):
        assert mutate(x, 1e-9, rng) == x


def test_mutate_identity_probability_closed_form():
    # Pr[y = x] = (1 - 1/100)^100, cross-checked by simulation at 4 sigma
    n, c, trials = 100, 1.0, 1_000_000
    p_exact = (1.0 - c / n) ** n
    assert math.isclose(p_exact, 0.3660323, abs_tol=5e-7)
    rng = RngStream(22)
    x = new_random(n, rng)
    identical = sum(mutate(x, c, rng) == x for k in range(trials))
    se = math.sqrt(p_exact * (1 - p_exact) / trials)
    assert abs(identical / trials - p_exact) <= 4 * se


def test_mutate_leaves_parent_unmodified():
    rng = RngStream(8)
    x = new_random(40, rng)
    before = x.bits.copy()
    for _ in range(200):
        mutate(x, 4.0, rng)
    assert (x.bits == before).all()


def test_flip_count_matches_binomial():
    # n=50, c=2: flip counts over 1e5 draws fit Binomial(50, 0.04)
    n, c, draws = 50, 2.0, 100_000
    rng = RngStream(23)
    counts, _ = sample_flip_sets(n, c, draws, rng)
    max_k = 7
    observed = np.bincount(np.minimum(counts, max_k), minlength=max_k + 1)
    pmf = stats.binom.pmf(np.arange(max_k), n, c / n)
    expected = np.append(pmf, 1.0 - pmf.sum()) * draws
    result = stats.chisquare(observed, expected)
    assert result.pvalue >= 0.01


def test_per_position_flip_frequency_binomial_path():
    # p = c/n < 0.1 exercises the count-then-positions sampler
    n, c, draws = 20, 1.0, 100_000
    counts, positions = sample_flip_sets(n, c, draws, RngStream(24))
    freq = np.bincount(positions, minlength=n) / draws
    p = c / n
    tol = 4 * math.sqrt(p * (1 - p) / draws)
    assert (np.abs(freq - p) <= tol).all()


def test_per_position_flip_frequency_bernoulli_path():
    n, c, draws = 10, 2.0, 100_000
    counts, positions = sample_flip_sets(n, c, draws, RngStream(25))
    freq = np.bincount(positions, minlength=n) / draws
    p = c / n
    tol = 4 * math.sqrt(p * (1 - p) / draws)
    assert (np.abs(freq - p) <= tol).all()


def test_per_position_flip_frequency_single_mutation_path():
    # the m=1 fast path used by the run loop has the same marginals
    n, c, draws = 20, 1.0, 20_000
    hits = np.zeros(n)
    rng = RngStream(26)
    for _ in range(draws):
        _, positions = sample_flip_sets(n, c, 1, rng)
        hits[positions] += 1
    p = c / n
    tol = 4 * math.sqrt(p * (1 - p) / draws)
    assert (np.abs(hits / draws - p) <= tol).all()


def test_positions_distinct_within_mutation():
    rng = RngStream(27)
    for c, n in ((0.9, 10), (4.0, 10), (2.0, 40)):
        counts, positions = sample_flip_sets(n, c, 2000, rng)
        start = 0
        for k in counts:
            seg = positions[start : start + k]
            assert len(set(seg.tolist())) == int(k)
            start += int(k)


def test_zeromax_delta_equals_flip_imbalance():
    # zeromax(mutated) - zeromax(x) == (#one-bits flipped) - (#zero-bits flipped)
    rng = RngStream(28)
    x = new_random(60, rng)
    for _ in range(2000):
        counts, positions = sample_flip_sets(x.n, 1.5, 1, rng)
        ones_flipped = int(x.bits[positions].sum())
        zeros_flipped = int(counts[0]) - ones_flipped
        y = SearchPoint(apply_flips(x.bits, positions))
        assert zeromax(y) - zeromax(x) == ones_flipped - zeros_flipped


def test_mutate_ones_bookkeeping_matches_recount():
    rng = RngStream(29)
    x = new_random(35, rng)
    for _ in range(500):
        y = mutate(x, 3.0, rng)
        assert y.ones == int(y.bits.sum())
        x = y

import math

import numpy as np
import pytest

from salea.bitstring import RngStream, SearchPoint
from salea.potentials import (
    PotentialSpec,
    eval_g,
    eval_h,
    prob_A_bar,
    prob_B_bar,
    sandwich_bounds,
    success_prob_lower_bound,
)


def _spec(family, **kw):
    base = dict(n=8, F=2.0, s=1.0, K1=1.0, K2=1.0, K3=1.0, K4=20.0)
    base.update(kw)
    return PotentialSpec(family=family, **base)


def test_lambda_max_is_recomputed():
    spec = _spec("G1")
    assert spec.lambda_max == 2.0 ** (1.0 / 1.0) * 8 == 16.0
    assert _spec("G1", s=0.5).lambda_max == 4.0 * 8


def test_spec_validation():
    for bad in (
        dict(family="G5"),
        dict(family="G1", F=1.0),
        dict(family="G1", s=0.0),
        dict(family="G1", n=0),
        dict(family="G1", K1=0.0),
    ):
        kw = dict(n=8, F=2.0, s=1.0)
        kw.update(bad)
        with pytest.raises(ValueError):
            PotentialSpec(**kw)


def test_eval_h_rejects_small_lambda():
    with pytest.raises(ValueError):
        eval_h(_spec("G1"), 0.5)


def test_h1_examples():
    spec = _spec("G1")  # lambda_max = 16
    assert eval_h(spec, 16.0) == 0.0
    assert eval_h(spec, 40.0) == 0.0
    assert math.isclose(eval_h(spec, 1.0), 4.0)  # log2(16)


def test_h2_h3_h4_formulas():
    g2 = _spec("G2", K2=2.0)
    assert math.isclose(eval_h(g2, 1.0), 2.0 * (1.0 - 1.0 / 16.0))
    assert eval_h(g2, 16.0) == 0.0
    assert eval_h(g2, 100.0) == 0.0

    g3 = _spec("G3", K1=1.0, K2=3.0, K3=0.5)
    assert math.isclose(eval_h(g3, 1.0), 4.0 + 3.0 * math.exp(-0.5))
    assert math.isclose(eval_h(g3, 16.0), 3.0 * math.exp(-8.0))

    g4 = _spec("G4", K4=7.0)
    assert math.isclose(eval_h(g4, 1.0), -7.0)  # log_F(F) = 1
    assert math.isclose(eval_h(g4, 2.0), -7.0 * (1.0 + 1.0) ** 2)


def test_eval_g_examples():
    spec = _spec("G1")
    x3 = SearchPoint.from_string("11111000")  # zeromax 3
    assert math.isclose(eval_g(spec, x3, 1.0), 3.0 + 4.0)
    assert eval_g(spec, x3, 20.0) == 3.0  # above lambda_max the penalty vanishes
    g2 = _spec("G2")
    optimum = SearchPoint.from_string("11111111")
    assert eval_g(g2, optimum, g2.lambda_max) == 0.0


def test_sandwich_bound_examples():
    lo, hi = sandwich_bounds(_spec("G1"))
    assert math.isclose(lo, 4.0) and hi == 0.0
    lo, hi = sandwich_bounds(_spec("G2", K2=2.0))
    assert math.isclose(lo, 2.0 * (1.0 - 1.0 / 16.0)) and hi == 0.0
    lo, hi = sandwich_bounds(_spec("G3", K1=1.0, K2=3.0))
    assert math.isclose(lo, 4.0 + 3.0) and hi == 0.0
    with pytest.raises(ValueError):
        sandwich_bounds(_spec("G4"))


def test_sandwich_holds_on_random_states():
    rng = RngStream(1).gen
    for family in ("G1", "G2", "G3"):
        spec = _spec(family, n=64, F=1.5, s=0.7, K1=1.3, K2=2.1, K3=0.4)
        lo, hi = sandwich_bounds(spec)
        for _ in range(10_000):
            z = int(rng.integers(0, 65))
            lam = float(rng.uniform(1.0, 2.0 * spec.lambda_max))
            g = z + eval_h(spec, lam)
            assert g - lo <= z <= g + hi


def test_h_monotone_and_single_update_bound():
    lams = np.linspace(1.0, 40.0, 400)
    for family in ("G1", "G2", "G3"):
        spec = _spec(family, K1=1.7, K2=2.0, K3=0.8)
        values = [eval_h(spec, l) for l in lams]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
    g1 = _spec("G1", K1=1.7)
    for lam in lams:
        assert eval_h(g1, lam) - eval_h(g1, lam * g1.F) <= g1.K1 + 1e-12


def test_prob_A_bar_examples():
    assert prob_A_bar(4, 4, 1.0, 3) == 0.0  # all-zeros parent: event impossible
    assert math.isclose(prob_A_bar(4, 2, 1.0, 1), 1.0 - (0.75) ** 2)
    assert math.isclose(prob_A_bar(4, 2, 1.0, 1), 0.4375)
    values = [prob_A_bar(10, 2, 1.0, m) for m in (1, 2, 5, 20, 100)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-6


def test_prob_B_bar_examples():
    assert prob_B_bar(4, 0, 1.0, 5) == 1.0
    assert math.isclose(prob_B_bar(4, 2, 1.0, 1), 0.5625)
    assert math.isclose(prob_B_bar(10, 10, 0.5, 2), 0.95**20)
    assert math.isclose(prob_B_bar(10, 10, 0.5, 2), 0.358486, abs_tol=1e-6)


def test_prob_B_bar_strictly_decreasing():
    assert prob_B_bar(20, 5, 1.0, 2) > prob_B_bar(20, 6, 1.0, 2)
    assert prob_B_bar(20, 5, 0.5, 2) > prob_B_bar(20, 5, 0.9, 2)
    assert prob_B_bar(20, 5, 1.0, 2) > prob_B_bar(20, 5, 1.0, 3)


def test_event_prob_domain_errors():
    with pytest.raises(ValueError):
        prob_A_bar(4, 5, 1.0, 1)
    with pytest.raises(ValueError):
        prob_A_bar(4, 2, 0.0, 1)
    with pytest.raises(ValueError):
        prob_B_bar(4, 2, 1.0, 0)
    with pytest.raises(ValueError):
        success_prob_lower_bound(4, 0, 1.0, 1)
    with pytest.raises(ValueError):
        success_prob_lower_bound(4, 2, 1.5, 1)


def test_event_probs_match_per_bit_simulation():
    # independent oracle: actual per-bit Bernoulli mutation of a Z-zero parent
    rng = RngStream(2).gen
    trials = 1_000_000
    for (n, Z, c, m) in ((4, 2, 1.0, 1), (10, 5, 0.5, 2)):
        p = c / n
        flips = rng.random((trials, m, n)) < p
        one_mask = np.zeros(n, dtype=bool)
        one_mask[Z:] = True  # bits [Z:] are the parent's ones
        one_flips = flips[:, :, one_mask].sum(axis=2)
        zero_flips = flips[:, :, ~one_mask].sum(axis=2)
        a_bar = (one_flips >= 1).all(axis=1).mean()
        b_bar = (zero_flips == 0).all(axis=1).mean()
        for closed, mc in ((prob_A_bar(n, Z, c, m), a_bar), (prob_B_bar(n, Z, c, m), b_bar)):
            se = math.sqrt(max(mc * (1 - mc), 1e-12) / trials)
            assert abs(closed - mc) <= 4 * se


def test_success_lower_bound_formula_and_limits():
    v = success_prob_lower_bound(4, 4, 1.0, 1)
    assert math.isclose(v, 1.0 - math.exp(-0.5 * math.exp(-1.0)))
    assert abs(v - 0.168) < 1e-3
    assert success_prob_lower_bound(100, 50, 1.0, 10**6) > 1.0 - 1e-12
    assert success_prob_lower_bound(100, 50, 1.0, 10) > success_prob_lower_bound(100, 50, 1.0, 1)


def test_success_lower_bound_is_below_empirical_rate():
    from salea.algorithm import AlgorithmParams
    from salea.driftlab import estimate_success_prob
    from salea.fitness import FunctionSpec

    n, Z, lam, c = 100, 50, 5.0, 1.0
    bits = np.ones(n, dtype=np.uint8)
    bits[:Z] = 0
    x = SearchPoint(bits)
    params = AlgorithmParams(n=n, c=c, s=1.0, F=1.5)
    est = estimate_success_prob(x, lam, params, FunctionSpec("onemax"), 100_000, RngStream(3))
    bound = success_prob_lower_bound(n, Z, c, 5)
    assert bound <= est.mean + 4 * est.std_error
    assert bound <= est.mean  # comfortably below in practice

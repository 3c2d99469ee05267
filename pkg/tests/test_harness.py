import math

import pytest

from salea.algorithm import InitPolicy
from salea.fitness import FitnessInstance, FunctionSpec, make_instance
from salea.bitstring import RngStream
from salea.harness import (
    RAW_COLUMNS,
    SUMMARY_COLUMNS,
    CellSummary,
    RunResult,
    SweepSpec,
    preset_F_sweep,
    preset_scaling_experiment,
    preset_threshold_sweep,
    read_raw_csv,
    read_summary_csv,
    run_sweep,
    summarize,
    sweep_from_json,
    sweep_to_json,
    validate_rows,
    write_raw_csv,
    write_summary_csv,
)


def _tiny_sweep(**kw):
    base = dict(
        functions=(FunctionSpec("onemax"),),
        n_list=(10,),
        c_list=(1.0,),
        s_list=(0.5,),
        F_list=(1.5,),
        runs_per_cell=2,
        master_seed=1,
    )
    base.update(kw)
    return SweepSpec(**base)


def test_trivial_sweep_shapes_and_aggregation():
    rows, summaries = run_sweep(_tiny_sweep())
    assert len(rows) == 2 and len(summaries) == 1
    s = summaries[0]
    assert s.runs == 2
    expected_mean = (rows[0].normalized_generations + rows[1].normalized_generations) / 2
    assert math.isclose(s.mean_norm_generations, expected_mean)
    assert {r.run_index for r in rows} == {0, 1}
    assert rows[0].seed != rows[1].seed


def test_mean_and_std_of_two_and_four():
    rows = [
        RunResult("onemax", 10, 1.0, 0.5, 1.5, i, i, "uniform", g, g, False, 0, 1, g / 10)
        for i, g in enumerate((20, 40))
    ]
    s = summarize(rows)[0]
    assert math.isclose(s.mean_norm_generations, 3.0)
    assert math.isclose(s.std_norm_generations, math.sqrt(2.0))
    single = summarize(rows[:1])[0]
    assert math.isnan(single.std_norm_generations)


def test_rerun_same_master_seed_is_byte_identical(tmp_path):
    paths = []
    for tag in ("a", "b"):
        spec = _tiny_sweep(
            raw_csv=str(tmp_path / f"raw_{tag}.csv"),
            summary_csv=str(tmp_path / f"summary_{tag}.csv"),
        )
        run_sweep(spec)
        paths.append((tmp_path / f"raw_{tag}.csv", tmp_path / f"summary_{tag}.csv"))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()


def test_worker_count_does_not_change_output():
    spec = _tiny_sweep(n_list=(10, 12), runs_per_cell=3)
    rows1, sum1 = run_sweep(spec, workers=1)
    rows2, sum2 = run_sweep(spec, workers=2)
    assert rows1 == rows2 and sum1 == sum2


def test_adding_cells_preserves_existing_streams():
    rows_small, _ = run_sweep(_tiny_sweep())
    rows_big, _ = run_sweep(_tiny_sweep(n_list=(10, 14)))
    small_cell = [r for r in rows_big if r.n == 10]
    assert small_cell == rows_small


def test_csv_round_trip(tmp_path):
    spec = _tiny_sweep(
        raw_csv=str(tmp_path / "raw.csv"), summary_csv=str(tmp_path / "summary.csv")
    )
    rows, summaries = run_sweep(spec)
    assert read_raw_csv(str(tmp_path / "raw.csv"), spec.generation_cap_multiplier) == rows
    assert read_summary_csv(str(tmp_path / "summary.csv")) == summaries
    header = (tmp_path / "raw.csv").read_text().splitlines()[0]
    assert header == ",".join(RAW_COLUMNS)
    header = (tmp_path / "summary.csv").read_text().splitlines()[0]
    assert header == ",".join(SUMMARY_COLUMNS)


def test_summaries_recomputed_from_raw_match(tmp_path):
    spec = _tiny_sweep(
        n_list=(10, 12),
        runs_per_cell=3,
        raw_csv=str(tmp_path / "raw.csv"),
        summary_csv=str(tmp_path / "summary.csv"),
    )
    _, emitted = run_sweep(spec)
    recomputed = summarize(read_raw_csv(str(tmp_path / "raw.csv")))
    assert recomputed == emitted


def test_validate_rows_catches_violations():
    good = RunResult("onemax", 10, 1.0, 0.5, 1.5, 0, 1, "uniform", 20, 40, False, 0, 3, 2.0)
    validate_rows([good])
    bad_final = RunResult("onemax", 10, 1.0, 0.5, 1.5, 0, 1, "uniform", 20, 40, False, 2, 3, 2.0)
    with pytest.raises(ValueError):
        validate_rows([bad_final])
    bad_evals = RunResult("onemax", 10, 1.0, 0.5, 1.5, 0, 1, "uniform", 20, 10, False, 0, 3, 2.0)
    with pytest.raises(ValueError):
        validate_rows([bad_evals])
    capped = RunResult("onemax", 10, 1.0, 0.5, 1.5, 0, 1, "uniform", 600, 700, True, 4, 3, 60.0)
    with pytest.raises(ValueError):
        validate_rows([capped], generation_cap_multiplier=500.0)


def test_raw_csv_header_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("function,n\nonemax,10\n")
    with pytest.raises(ValueError, match="header mismatch"):
        read_raw_csv(str(path))


def test_config_round_trip_and_unknown_keys():
    spec = _tiny_sweep(init=InitPolicy.fixed_zeromax(3))
    assert sweep_from_json(sweep_to_json(spec)) == spec
    with pytest.raises(ValueError, match="unknown sweep config key 'turbo'"):
        sweep_from_json('{"functions": [{"kind": "onemax"}], "n_list": [10], "c_list": [1.0], "s_list": [1.0], "F_list": [1.5], "turbo": true}')
    with pytest.raises(ValueError, match="missing key"):
        sweep_from_json('{"functions": [{"kind": "onemax"}]}')


def test_hook_failure_recorded_and_sweep_continues():
    class Broken(FitnessInstance):
        kind = "broken"

        def key(self, bits):
            return -int(bits.sum())

    def flaky_hook(t, x):
        return Broken(FunctionSpec("onemax"), 12)

    spec = SweepSpec(
        functions=(FunctionSpec("adversarial_hook", hook=flaky_hook), FunctionSpec("onemax")),
        n_list=(12,),
        c_list=(1.0,),
        s_list=(0.5,),
        F_list=(1.5,),
        runs_per_cell=2,
        master_seed=3,
    )
    rows, summaries = run_sweep(spec)
    hook_rows = [r for r in rows if r.function == "adversarial_hook"]
    clean_rows = [r for r in rows if r.function == "onemax"]
    assert all("MonotonicityError" in r.error for r in hook_rows)
    assert all(not r.error and r.final_zeromax == 0 for r in clean_rows)
    assert {s.function for s in summaries} == {"onemax"}


def test_time_budget_flag_records_error_and_continues():
    # failing regime with an (effectively) zero budget: every run aborts with
    # an error row instead of crashing the sweep
    spec = SweepSpec(
        functions=(FunctionSpec("onemax"),),
        n_list=(300,),
        c_list=(1.0,),
        s_list=(30.0,),
        F_list=(1.5,),
        runs_per_cell=2,
        master_seed=9,
        run_seconds_budget=1e-9,
    )
    rows, summaries = run_sweep(spec)
    assert all("TimeBudgetExceeded" in r.error for r in rows)
    assert summaries == []


def test_aggregation_is_permutation_invariant():
    rows, summaries = run_sweep(_tiny_sweep(n_list=(10, 12), runs_per_cell=4))
    reversed_summaries = summarize(list(reversed(rows)))
    by_cell = {(s.function, s.n, s.c, s.s, s.F): s for s in summaries}
    assert len(reversed_summaries) == len(summaries)
    for s in reversed_summaries:
        ref = by_cell[(s.function, s.n, s.c, s.s, s.F)]
        assert math.isclose(s.mean_norm_generations, ref.mean_norm_generations)
        assert math.isclose(s.mean_evaluations, ref.mean_evaluations)
        assert s.cap_fraction == ref.cap_fraction


def test_preset_threshold_sweep_grid():
    spec = preset_threshold_sweep(2000, ["onemax", "binary"])
    assert spec.F_list == (1.5,) and spec.c_list == (1.0,)
    assert min(spec.s_list) == 0.5 and max(spec.s_list) == 10.0
    window = [s for s in spec.s_list if 2.5 <= s <= 4.5]
    assert len(window) >= 10  # refinement near the transition
    assert 3.4 in spec.s_list
    assert spec.runs_per_cell == 10 and spec.generation_cap_multiplier == 500.0
    assert spec.lambda_init == 1.0 and spec.init == InitPolicy.uniform()
    assert [f.kind for f in spec.functions] == ["onemax", "binary"]
    assert preset_threshold_sweep(500, []).cells() == []


def test_preset_f_sweep_grid():
    spec = preset_F_sweep(1000)
    assert spec.s_list == (1.8,)
    assert {0.98, 1.0} <= set(spec.c_list)
    assert {1.1, 1.5, 2.0, 4.0, 6.25, 8.0, 16.0, 32.0} <= set(spec.F_list)
    assert spec.functions[0].kind == "dynamic_binval"


def test_preset_scaling_experiment():
    spec = preset_scaling_experiment("onemax", c=0.8, s=30.0, F=1.5, n_list=[1000], init=InitPolicy.fixed_zeromax(10))
    assert spec.n_list == (1000,)
    assert spec.init == InitPolicy.fixed_zeromax(10)
    single = preset_scaling_experiment("onemax", c=0.8, s=0.5, F=1.5, n_list=[500])
    assert len(single.cells()) == 1

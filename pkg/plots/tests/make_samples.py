"""Regenerate the committed sample CSVs and golden snapshot PNGs.

Run from the repo root with both packages installed:

    python plots/tests/make_samples.py

The CSVs come from recorded desk-scale sweeps (fixed master seeds) of the
salea harness; the PNGs are the renderer's output on those CSVs plus the
matplotlib version they were produced with.  Tests compare snapshot bytes only
when the installed matplotlib matches the recorded version.
"""

from __future__ import annotations

import json
import os
import sys

import matplotlib

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "data")
SNAPSHOTS = os.path.join(HERE, "snapshots")


def main() -> int:
    from salea.bitstring import RngStream
    from salea.driftlab import g1_scan_preset, scan_drift_region
    from salea.fitness import FunctionSpec
    from salea.harness import SweepSpec, run_sweep

    from saleaplot import FigureSpec, render

    os.makedirs(DATA, exist_ok=True)
    os.makedirs(SNAPSHOTS, exist_ok=True)

    # threshold: desk-scale slice of the success-rate sweep (plateau then cap)
    threshold = SweepSpec(
        functions=(FunctionSpec("onemax"), FunctionSpec("binary")),
        n_list=(200,),
        c_list=(1.0,),
        s_list=(0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0),
        F_list=(1.5,),
        runs_per_cell=5,
        master_seed=42,
        summary_csv=os.path.join(DATA, "threshold_summary.csv"),
    )
    run_sweep(threshold, workers=2)

    # f_sweep: desk-scale dynamic binval update-strength sweep
    f_sweep = SweepSpec(
        functions=(FunctionSpec("dynamic_binval"),),
        n_list=(100,),
        c_list=(0.98, 1.0),
        s_list=(1.8,),
        F_list=(1.1, 2.0, 8.0, 32.0),
        runs_per_cell=5,
        master_seed=43,
        summary_csv=os.path.join(DATA, "f_sweep_summary.csv"),
    )
    run_sweep(f_sweep, workers=2)

    # scaling: one cell over several n
    scaling = SweepSpec(
        functions=(FunctionSpec("onemax"),),
        n_list=(100, 200, 400),
        c_list=(0.8,),
        s_list=(0.5,),
        F_list=(1.5,),
        runs_per_cell=5,
        master_seed=44,
        summary_csv=os.path.join(DATA, "scaling_summary.csv"),
    )
    run_sweep(scaling, workers=2)

    # drift heatmap: small grid of the small-s scan
    preset = g1_scan_preset(n=100, trials=2000)
    report = scan_drift_region(
        preset["params"], preset["spec"], preset["pot"],
        [1, 10, 50, 90], [1.0, 4.0, 16.0, 64.0], 2000, RngStream(45),
    )
    report.to_csv(os.path.join(DATA, "scan_cells.csv"))

    # one-cell degenerate summary for the no-crash test
    with open(os.path.join(DATA, "single_cell_summary.csv"), "w", encoding="utf-8") as fh:
        with open(os.path.join(DATA, "scaling_summary.csv"), "r", encoding="utf-8") as src:
            lines = src.read().splitlines()
        fh.write(lines[0] + "\n" + lines[1] + "\n")

    for kind, inputs, name in (
        ("threshold", ("threshold_summary.csv",), "threshold.png"),
        ("f_sweep", ("f_sweep_summary.csv",), "f_sweep.png"),
        ("scaling", ("scaling_summary.csv",), "scaling.png"),
        ("drift_heatmap", ("scan_cells.csv",), "drift_heatmap.png"),
    ):
        render(FigureSpec(kind=kind, inputs=tuple(os.path.join(DATA, f) for f in inputs),
                          output=os.path.join(SNAPSHOTS, name)))

    with open(os.path.join(SNAPSHOTS, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump({"matplotlib": matplotlib.__version__}, fh)
    print("regenerated samples and snapshots with matplotlib", matplotlib.__version__)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Chart rendering from experiment CSVs.

Consumes only the harness file formats (summary CSVs and drift-scan cell
CSVs); the producing library is not imported.  Headers are validated exactly
and rendering is a pure function of the CSV contents: fixed figure geometry,
no timestamps, and stripped writer metadata, so re-rendering a committed
sample is pixel-identical under a fixed matplotlib version.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "SchemaError", "render", "build_figure", "KINDS"]

# mirrors the harness summary schema (file-format contract, not an import)
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

# mirrors the drift-lab scan cell schema
SCAN_COLUMNS = [
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

KINDS = ("threshold", "f_sweep", "drift_heatmap", "scaling")

FIGSIZE = (6.4, 4.2)
DPI = 120


class SchemaError(ValueError):
    """Input CSV header does not match the expected schema exactly."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    cap_line: float = 500.0
    log_x: bool = True  # applies to f_sweep and scaling axes

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        object.__setattr__(self, "inputs", tuple(self.inputs))


def _check_header(found: list[str] | None, expected: list[str], path: str) -> None:
    found = found or []
    if found == expected:
        return
    limit = max(len(found), len(expected))
    for i in range(limit):
        want = expected[i] if i < len(expected) else "<nothing>"
        got = found[i] if i < len(found) else "<missing>"
        if want != got:
            raise SchemaError(
                f"{path}: header mismatch at column {i + 1}: expected {want!r}, found {got!r}"
            )
    raise SchemaError(f"{path}: header mismatch")


def _read_rows(path: str, expected: list[str]) -> list[dict]:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, expected, path)
        return list(reader)


def _floats(rows, key):
    return np.array([float(r[key]) for r in rows])


def _grouped(rows, key):
    order = []
    groups = {}
    for row in rows:
        k = row[key]
        if k not in groups:
            groups[k] = []
            order.append(k)
        groups[k].append(row)
    return [(k, groups[k]) for k in order]


def build_figure(spec: FigureSpec):
    """Matplotlib figure for the spec; separated from saving for testability."""
    rows = []
    expected = SCAN_COLUMNS if spec.kind == "drift_heatmap" else SUMMARY_COLUMNS
    for path in spec.inputs:
        rows.extend(_read_rows(path, expected))

    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    if spec.kind == "threshold":
        for function, group in _grouped(rows, "function"):
            group = sorted(group, key=lambda r: float(r["s"]))
            ax.plot(_floats(group, "s"), _floats(group, "mean_norm_generations"),
                    marker="o", markersize=3, label=function)
        ax.axhline(spec.cap_line, linestyle="--", linewidth=0.8, color="gray")
        ax.set_xlabel("success rate s")
        ax.set_ylabel("mean generations / n")
        ax.set_yscale("log")
        ax.legend()
    elif spec.kind == "f_sweep":
        for c_value, group in _grouped(rows, "c"):
            group = sorted(group, key=lambda r: float(r["F"]))
            err = _floats(group, "std_norm_generations")
            err = np.where(np.isnan(err), 0.0, err)
            ax.errorbar(_floats(group, "F"), _floats(group, "mean_norm_generations"),
                        yerr=err, marker="o", markersize=3, capsize=2, label=f"c={c_value}")
        if spec.log_x:
            ax.set_xscale("log")
        ax.axhline(spec.cap_line, linestyle="--", linewidth=0.8, color="gray")
        ax.set_xlabel("update strength F")
        ax.set_ylabel("mean generations / n")
        ax.legend()
    elif spec.kind == "scaling":
        for function, group in _grouped(rows, "function"):
            group = sorted(group, key=lambda r: float(r["n"]))
            ns = _floats(group, "n")
            evals = _floats(group, "mean_evaluations")
            ax.plot(ns, evals, marker="o", markersize=3, label=function)
            ref = ns * np.log(ns) * evals[0] / (ns[0] * np.log(ns[0]))
            ax.plot(ns, ref, linestyle=":", linewidth=0.8, color="gray",
                    label="n ln n reference" if function == rows[0]["function"] else None)
        if spec.log_x:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("mean evaluations")
        ax.legend()
    else:  # drift_heatmap
        zs = sorted({int(r["Z"]) for r in rows})
        lams = sorted({float(r["lambda"]) for r in rows})
        grid = np.full((len(zs), len(lams)), np.nan)
        verdicts = np.zeros_like(grid, dtype=bool)
        for r in rows:
            i, j = zs.index(int(r["Z"])), lams.index(float(r["lambda"]))
            grid[i, j] = float(r["g_drift"])
            verdicts[i, j] = r["verdict"] == "true"
        vmax = float(np.nanmax(np.abs(grid))) or 1.0
        mesh = ax.imshow(grid, aspect="auto", origin="lower", cmap="RdBu_r",
                         vmin=-vmax, vmax=vmax)
        ax.set_xticks(range(len(lams)), [f"{l:g}" for l in lams])
        ax.set_yticks(range(len(zs)), [str(z) for z in zs])
        for i in range(len(zs)):
            for j in range(len(lams)):
                if not np.isnan(grid[i, j]) and not verdicts[i, j]:
                    ax.text(j, i, "x", ha="center", va="center", fontsize=8)
        fig.colorbar(mesh, ax=ax, label="potential drift")
        ax.set_xlabel("lambda")
        ax.set_ylabel("zeromax")
        family = rows[0]["family"] if rows else ""
        ax.set_title(f"{family} drift sign scan")
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Render the figure to spec.output and return the path."""
    fig = build_figure(spec)
    # strip the writer's software tag so output bytes depend on the CSV only
    fig.savefig(spec.output, metadata={"Software": None})
    plt.close(fig)
    return spec.output

"""Render kdv5 scenario CSV outputs to raster figures.

Consumes only the documented file contract: ``series.csv`` with the
time-series schema (t, I1, I2, H2, Hs_target, weighted_r, lambda1..5) or
the draw-table schema (draw, ratio), plus the adjacent ``summary.json``
for titling.  Inputs are never modified; figure geometry is fixed so
identical inputs give identical image dimensions.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["SchemaError", "PlotJob", "render", "read_series", "KINDS"]

TIME_SCHEMA = (
    "t", "I1", "I2", "H2", "Hs_target", "weighted_r",
    "lambda1", "lambda2", "lambda3", "lambda4", "lambda5",
)
RATIO_SCHEMA = ("draw", "ratio")
KINDS = ("timeseries", "drift", "refinement-ratio", "ratio-histogram")

FIGSIZE = (8.0, 5.0)
DPI = 110

I1_TOLERANCE = 1e-8
I2_TOLERANCE = 1e-6
REFINEMENT_DELTA = 0.05


class SchemaError(ValueError):
    """Input columns do not match the scenario CSV contract."""

    def __init__(self, path, expected, found):
        self.missing = [c for c in expected if c not in found]
        self.unexpected = [c for c in found if c not in expected]
        super().__init__(
            f"{path}: schema mismatch; missing columns {self.missing}, "
            f"unexpected columns {self.unexpected}"
        )


class PlotJob:
    """One rendering task: input CSV path(s), plot kind, output path."""

    def __init__(self, kind: str, inputs, output, columns=None):
        if kind not in KINDS:
            raise ValueError(f"unknown plot kind {kind!r}; expected one of {KINDS}")
        self.kind = kind
        self.inputs = [Path(p) for p in inputs]
        self.output = Path(output)
        self.columns = list(columns) if columns else None
        expected = 2 if kind == "refinement-ratio" else 1
        if len(self.inputs) != expected:
            raise ValueError(f"{kind} needs exactly {expected} input file(s), got {len(self.inputs)}")


def read_series(path, expected) -> dict[str, np.ndarray]:
    """Read a scenario CSV and validate it against the expected schema."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(path, expected, [])
        if tuple(header) != tuple(expected):
            raise SchemaError(path, expected, header)
        rows = [[float(cell) for cell in row] for row in reader]
    data = np.array(rows) if rows else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def _summary_label(path: Path) -> str:
    summary = Path(path).with_name("summary.json")
    if not summary.exists():
        return Path(path).name
    try:
        info = json.loads(summary.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return Path(path).name
    cfg = info.get("config", {})
    bits = [info.get("scenario", "?")]
    for key in ("k", "T", "n", "seed"):
        if key in cfg:
            bits.append(f"{key}={cfg[key]}")
    return ", ".join(str(b) for b in bits)


def _new_figure(n_panels: int):
    rows = math.ceil(n_panels / 2) if n_panels > 1 else 1
    cols = 2 if n_panels > 1 else 1
    fig, axes = plt.subplots(
        rows, cols, figsize=(FIGSIZE[0], FIGSIZE[1] * rows / 2 + 2.0), dpi=DPI, squeeze=False
    )
    return fig, [ax for row in axes for ax in row]


def _render_timeseries(job: PlotJob):
    data = read_series(job.inputs[0], TIME_SCHEMA)
    names = job.columns or [c for c in TIME_SCHEMA if c != "t"]
    bad = [c for c in names if c not in data or c == "t"]
    if bad:
        raise SchemaError(job.inputs[0], names, list(data))
    fig, axes = _new_figure(len(names))
    for ax, name in zip(axes, names):
        ax.plot(data["t"], data[name], lw=1.2)
        ax.set_xlabel("t")
        ax.set_ylabel(name)
        ax.grid(True, alpha=0.3)
    for ax in axes[len(names):]:
        ax.set_visible(False)
    fig.suptitle(_summary_label(job.inputs[0]))
    return fig


def _render_drift(job: PlotJob):
    data = read_series(job.inputs[0], TIME_SCHEMA)
    fig, axes = _new_figure(2)
    for ax, (name, tol) in zip(axes, (("I1", I1_TOLERANCE), ("I2", I2_TOLERANCE))):
        series = data[name]
        ref = max(abs(series[0]), 1e-30) if series.size else 1.0
        drift = np.abs(series - (series[0] if series.size else 0.0)) / ref
        ax.semilogy(data["t"], np.maximum(drift, 1e-18), lw=1.2)
        ax.axhline(tol, color="red", ls="--", lw=1.0, label=f"tolerance {tol:g}")
        ax.set_xlabel("t")
        ax.set_ylabel(f"relative {name} drift")
        ax.legend(loc="upper left", fontsize=8)
        ax.grid(True, alpha=0.3)
    fig.suptitle(_summary_label(job.inputs[0]))
    return fig


def _render_refinement_ratio(job: PlotJob):
    base = read_series(job.inputs[0], TIME_SCHEMA)
    refined = read_series(job.inputs[1], TIME_SCHEMA)
    if base["t"].size != refined["t"].size:
        raise ValueError(
            f"time grids differ: {base['t'].size} vs {refined['t'].size} rows"
        )
    fig, axes = _new_figure(1)
    ax = axes[0]
    ratio = refined["Hs_target"] / np.where(base["Hs_target"] == 0.0, np.nan, base["Hs_target"])
    ax.plot(base["t"], ratio, lw=1.4)
    ax.axhline(1.0 + REFINEMENT_DELTA, color="red", ls="--", lw=1.0)
    ax.axhline(1.0 / (1.0 + REFINEMENT_DELTA), color="red", ls="--", lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("Hs_target ratio (refined / base)")
    ax.grid(True, alpha=0.3)
    fig.suptitle(_summary_label(job.inputs[0]))
    return fig


def _render_ratio_histogram(job: PlotJob):
    data = read_series(job.inputs[0], RATIO_SCHEMA)
    fig, axes = _new_figure(1)
    ax = axes[0]
    ax.hist(data["ratio"], bins=20, edgecolor="black", alpha=0.8)
    ax.set_xlabel("ratio")
    ax.set_ylabel("draws")
    ax.grid(True, alpha=0.3)
    fig.suptitle(_summary_label(job.inputs[0]))
    return fig


_RENDERERS = {
    "timeseries": _render_timeseries,
    "drift": _render_drift,
    "refinement-ratio": _render_refinement_ratio,
    "ratio-histogram": _render_ratio_histogram,
}


def render(job: PlotJob) -> Path:
    """Render the job to its output path and return the path."""
    fig = _RENDERERS[job.kind](job)
    job.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(job.output, format="png")
    plt.close(fig)
    return job.output

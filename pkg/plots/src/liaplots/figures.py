"""Figure renderers over the frozen sweep CSV schema.

Five figure ids: ``frontier`` (timing rent vs clearing latency),
``welfare_vs_n``, ``runtime_vs_n``, ``robustness``, and ``lai_curves``.
Every plotted value comes straight from the CSV; the only processing here is
grouping (means, min-max bands) and log transforms.  Output is deterministic
for identical inputs: fixed style, a pinned SVG hash salt, and no timestamp
metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_IDS = ("frontier", "welfare_vs_n", "runtime_vs_n", "robustness",
              "lai_curves")

# zero rents still deserve a mark on a log axis: draw them on this floor
# with a distinct marker and a "0" label
LOG_ZERO_FLOOR = 1e-3

_STYLE = {
    "figure.figsize": (7.0, 4.6),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "liaplots",
    "font.size": 9.5,
}

_REQUIRED = {
    "frontier": {"mechanism", "lambda_per_s", "n", "clearing_latency_ms",
                 "lai_sup"},
    "welfare_vs_n": {"topology", "mechanism", "lambda_per_s", "n",
                     "sw_ratio_all"},
    "runtime_vs_n": {"topology", "mechanism", "n", "compute_time_ms"},
    "robustness": {"error_model", "epsilon_ms", "sw_ratio_all", "lai_sup"},
    "lai_curves": {"mechanism", "delta_ms", "g_mean"},
}

_MARKERS = "osD^vP*Xh<>"


class SchemaError(ValueError):
    """Input CSV lacks a column the figure needs."""


class EmptySelectionError(ValueError):
    """Nothing to plot after filtering."""


@dataclass(frozen=True)
class FigureSpec:
    figure: str
    records_csv: str
    out_path: str
    curves_csv: str | None = None  # lai_curves input for the rent panel
    log_x: bool = False
    log_y: bool = False

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure!r}; "
                             f"choose from {FIGURE_IDS}")


@dataclass
class RenderSummary:
    """What was drawn, for callers and tests: series name -> (x, y) data."""

    figure: str
    outputs: list[str]
    series: dict = field(default_factory=dict)


def _load(path: str, figure: str, columns: set[str]) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = sorted(columns - set(frame.columns))
    if missing:
        raise SchemaError(f"{figure}: input {path} is missing column(s) "
                          f"{', '.join(missing)}")
    return frame


def _variant(row) -> str:
    lam = row["lambda_per_s"]
    if pd.isna(lam) or str(lam) == "":
        return str(row["mechanism"])
    return f"{row['mechanism']} (lambda={lam:g}/s)"


def _floor_for_log(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(plottable values, mask of entries pinned to the zero floor)."""
    pinned = values <= LOG_ZERO_FLOOR
    return np.where(pinned, LOG_ZERO_FLOOR, values), pinned


def _save(fig, out_path: str) -> list[str]:
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    png = out if out.suffix == ".png" else out.with_suffix(".png")
    fig.savefig(png, metadata={"Software": "liaplots"})
    written.append(str(png))
    svg = out.with_suffix(".svg")
    fig.savefig(svg, metadata={"Date": None})
    written.append(str(svg))
    plt.close(fig)
    return written


def render(spec: FigureSpec) -> RenderSummary:
    """Render one figure (PNG and SVG); returns what was plotted."""
    with plt.rc_context(_STYLE):
        handler = {
            "frontier": _render_frontier,
            "welfare_vs_n": _render_welfare,
            "runtime_vs_n": _render_runtime,
            "robustness": _render_robustness,
            "lai_curves": _render_lai_curves,
        }[spec.figure]
        return handler(spec)


def _render_frontier(spec: FigureSpec) -> RenderSummary:
    frame = _load(spec.records_csv, "frontier", _REQUIRED["frontier"])
    frame = frame[frame["n"] == frame["n"].max()]
    if frame.empty:
        raise EmptySelectionError("frontier: no records to plot")
    frame = frame.assign(variant=frame.apply(_variant, axis=1))
    grouped = frame.groupby("variant").agg(
        latency=("clearing_latency_ms", "mean"),
        rent=("lai_sup", lambda v: max(0.0, np.nanmean(v)))).reset_index()

    fig, ax = plt.subplots()
    summary = RenderSummary("frontier", [])
    for i, row in grouped.sort_values("variant").reset_index(drop=True).iterrows():
        y, pinned = _floor_for_log(np.array([row["rent"]]))
        marker = "x" if pinned[0] else _MARKERS[i % len(_MARKERS)]
        ax.scatter([row["latency"]], y, marker=marker, s=60,
                   label=row["variant"])
        if pinned[0]:
            ax.annotate("0", (row["latency"], y[0]),
                        textcoords="offset points", xytext=(4, 4))
        summary.series[row["variant"]] = (row["latency"], row["rent"])
    ax.set_yscale("log")
    if spec.log_x:
        ax.set_xscale("log")
    ax.set_xlabel("mean clearing latency (ms)")
    ax.set_ylabel("timing rent, sup g (log)")
    ax.set_title(f"fairness-latency frontier at n={int(frame['n'].max())}")
    ax.legend(fontsize=7.5, loc="best")
    summary.outputs = _save(fig, spec.out_path)
    return summary


def _render_welfare(spec: FigureSpec) -> RenderSummary:
    frame = _load(spec.records_csv, "welfare_vs_n", _REQUIRED["welfare_vs_n"])
    if frame.empty:
        raise EmptySelectionError("welfare_vs_n: no records to plot")
    frame = frame.assign(variant=frame.apply(_variant, axis=1))
    multi_topo = frame["topology"].nunique() > 1
    fig, ax = plt.subplots()
    summary = RenderSummary("welfare_vs_n", [])
    series = frame.groupby(["topology", "variant", "n"])["sw_ratio_all"] \
        .mean().reset_index()
    for i, ((topo, variant), block) in enumerate(
            series.groupby(["topology", "variant"])):
        block = block.sort_values("n")
        label = f"{variant} [{topo}]" if multi_topo else variant
        ax.plot(block["n"], block["sw_ratio_all"],
                marker=_MARKERS[i % len(_MARKERS)], label=label)
        summary.series[label] = (block["n"].tolist(),
                                 block["sw_ratio_all"].tolist())
    if spec.log_x:
        ax.set_xscale("log")
    if spec.log_y:
        ax.set_yscale("log")
    ax.set_xlabel("bidders n")
    ax.set_ylabel("SW / OPT_all")
    ax.set_title("welfare ratio vs market size")
    ax.legend(fontsize=7.5, loc="best")
    summary.outputs = _save(fig, spec.out_path)
    return summary


def _render_runtime(spec: FigureSpec) -> RenderSummary:
    frame = _load(spec.records_csv, "runtime_vs_n", _REQUIRED["runtime_vs_n"])
    frame = frame.dropna(subset=["compute_time_ms"])
    if frame.empty:
        raise EmptySelectionError(
            "runtime_vs_n: no measured compute times (use timings.csv)")
    fig, ax = plt.subplots()
    summary = RenderSummary("runtime_vs_n", [])
    per_topo = frame.groupby(["mechanism", "n", "topology"])[
        "compute_time_ms"].mean().reset_index()
    for i, (mech, block) in enumerate(per_topo.groupby("mechanism")):
        stats = block.groupby("n")["compute_time_ms"] \
            .agg(["mean", "min", "max"]).reset_index().sort_values("n")
        ax.plot(stats["n"], stats["mean"],
                marker=_MARKERS[i % len(_MARKERS)], label=mech)
        ax.fill_between(stats["n"], stats["min"], stats["max"], alpha=0.25)
        summary.series[mech] = (stats["n"].tolist(), stats["mean"].tolist())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("bidders n")
    ax.set_ylabel("winner determination (ms)")
    ax.set_title("runtime vs market size (band: min-max across topologies)")
    ax.legend(fontsize=7.5, loc="best")
    summary.outputs = _save(fig, spec.out_path)
    return summary


def _render_robustness(spec: FigureSpec) -> RenderSummary:
    frame = _load(spec.records_csv, "robustness", _REQUIRED["robustness"])
    frame = frame[frame["error_model"] != "none"]
    if frame.empty:
        raise EmptySelectionError("robustness: no noisy records to plot")
    fig, (ax_sw, ax_rent) = plt.subplots(1, 2, figsize=(9.5, 4.2))
    summary = RenderSummary("robustness", [])
    for i, (model, block) in enumerate(frame.groupby("error_model")):
        stats = block.groupby("epsilon_ms").agg(
            sw=("sw_ratio_all", "mean"),
            rent=("lai_sup", lambda v: max(0.0, np.nanmean(v)))).reset_index()
        stats = stats.sort_values("epsilon_ms")
        marker = _MARKERS[i % len(_MARKERS)]
        ax_sw.plot(stats["epsilon_ms"], stats["sw"], marker=marker, label=model)
        rent, pinned = _floor_for_log(stats["rent"].to_numpy())
        ax_rent.plot(stats["epsilon_ms"], rent, marker=marker, label=model)
        for x, y, p in zip(stats["epsilon_ms"], rent, pinned):
            if p:
                ax_rent.annotate("0", (x, y), textcoords="offset points",
                                 xytext=(2, 3), fontsize=7)
        summary.series[model] = (stats["epsilon_ms"].tolist(),
                                 stats["sw"].tolist(), stats["rent"].tolist())
    ax_sw.set_xlabel("slack error bound eps (ms)")
    ax_sw.set_ylabel("SW / OPT_all")
    ax_rent.set_xlabel("slack error bound eps (ms)")
    ax_rent.set_ylabel("timing rent, sup g (log)")
    ax_rent.set_yscale("log")
    ax_sw.legend(fontsize=7.5)
    fig.suptitle("robustness to slack-estimation error")
    summary.outputs = _save(fig, spec.out_path)
    return summary


def _render_lai_curves(spec: FigureSpec) -> RenderSummary:
    path = spec.curves_csv or spec.records_csv
    frame = _load(path, "lai_curves", _REQUIRED["lai_curves"])
    if frame.empty:
        raise EmptySelectionError("lai_curves: no curve rows to plot")
    has_lambda = "lambda" in frame.columns
    fig, ax = plt.subplots()
    summary = RenderSummary("lai_curves", [])
    if has_lambda:
        frame = frame.assign(variant=[
            f"{m} (lambda={l:g}/s)" if not pd.isna(l) else str(m)
            for m, l in zip(frame["mechanism"], frame["lambda"])])
    else:
        frame = frame.assign(variant=frame["mechanism"])
    for i, (variant, block) in enumerate(frame.groupby("variant")):
        block = block.sort_values("delta_ms")
        gains, pinned = _floor_for_log(block["g_mean"].to_numpy())
        marker = "x" if pinned.all() else _MARKERS[i % len(_MARKERS)]
        ax.plot(block["delta_ms"], gains, marker=marker, label=variant)
        if pinned.all():
            ax.annotate("0", (block["delta_ms"].iloc[-1], gains[-1]),
                        textcoords="offset points", xytext=(4, 4))
        summary.series[variant] = (block["delta_ms"].tolist(),
                                   block["g_mean"].tolist())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("delay reduction (ms)")
    ax.set_ylabel("mean utility gain g (log magnitude)")
    ax.set_title("timing-rent curves")
    ax.legend(fontsize=7.5, loc="best")
    summary.outputs = _save(fig, spec.out_path)
    return summary

"""Assemble percentile-band panel figures from parsed profiles.

The axes draw exactly the numbers read from disk; the echo payload carries
the same arrays, so dumping it alongside a render proves nothing was
recomputed on the way to the figure.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.ticker import FuncFormatter

from . import theme

BAND_ORDER = ("p10", "p25", "median", "p75", "p90")

Panel = tuple[str, dict[str, list[float]]]


def check_band_order(label: str, data: dict[str, list[float]]) -> None:
    """Percentile stack must be monotone at every bin before anything draws."""
    for lo, hi in zip(BAND_ORDER, BAND_ORDER[1:]):
        assert all(a <= b for a, b in zip(data[lo], data[hi])), (
            f"target {label}: {lo} exceeds {hi}")


def echo_payload(kind: str, panels: list[Panel]) -> dict:
    """The plotted arrays, exactly as parsed from the input CSVs."""
    return {
        "kind": kind,
        "unit": "kw",
        "panels": [{"target": label, **data} for label, data in panels],
    }


def write_echo(path: str | Path, kind: str, panels: list[Panel]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(echo_payload(kind, panels), fh, indent=2)
        fh.write("\n")


def _mw_ticks(value: float, _pos) -> str:
    return f"{value / theme.KW_PER_MW:g}"


def _draw_panel(ax, label: str, data: dict[str, list[float]],
                x_label: str, ticks: tuple[list[int], list[str]]) -> None:
    bins = data["bin"]
    ax.fill_between(bins, data["p10"], data["p90"],
                    color=theme.BAND_OUTER_COLOR, alpha=theme.BAND_OUTER_ALPHA,
                    linewidth=0, label="p10-p90")
    ax.fill_between(bins, data["p25"], data["p75"],
                    color=theme.BAND_INNER_COLOR, alpha=theme.BAND_INNER_ALPHA,
                    linewidth=0, label="p25-p75")
    ax.plot(bins, data["median"], color=theme.MEDIAN_COLOR,
            linewidth=theme.MEDIAN_LINEWIDTH, label="median")
    ax.set_title(theme.PANEL_TITLE_FORMAT.format(target=label),
                 fontsize=theme.TITLE_FONTSIZE)
    ax.set_xlabel(x_label, fontsize=theme.LABEL_FONTSIZE)
    ax.set_ylabel(theme.POWER_AXIS_LABEL, fontsize=theme.LABEL_FONTSIZE)
    ax.set_xlim(bins[0], bins[-1])
    positions, labels = ticks
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, fontsize=theme.TICK_FONTSIZE)
    ax.yaxis.set_major_formatter(FuncFormatter(_mw_ticks))
    ax.tick_params(labelsize=theme.TICK_FONTSIZE)
    ax.grid(color=theme.GRID_COLOR, linewidth=theme.GRID_LINEWIDTH)


def render_figure(out_file: str | Path, panels: list[Panel], x_label: str,
                  ticks: tuple[list[int], list[str]]) -> None:
    for label, data in panels:
        check_band_order(label, data)
    cols = min(theme.PANEL_COLUMNS, len(panels))
    rows = math.ceil(len(panels) / cols)
    fig, axes = plt.subplots(
        rows, cols, squeeze=False,
        figsize=(theme.FIGSIZE_PER_PANEL[0] * cols,
                 theme.FIGSIZE_PER_PANEL[1] * rows))
    flat = axes.ravel()
    for ax, (label, data) in zip(flat, panels):
        _draw_panel(ax, label, data, x_label, ticks)
    for ax in flat[len(panels):]:
        ax.set_visible(False)
    flat[0].legend(fontsize=theme.LEGEND_FONTSIZE, loc="upper left")
    fig.tight_layout()
    fig.savefig(out_file, dpi=theme.DPI)
    plt.close(fig)


def daily_ticks() -> tuple[list[int], list[str]]:
    hours = list(range(0, 24, theme.DAILY_TICK_STEP_H))
    return hours, [str(h) for h in hours]


def weekly_ticks() -> tuple[list[int], list[str]]:
    return [d * 24 + 12 for d in range(7)], list(theme.DAY_TICK_LABELS)

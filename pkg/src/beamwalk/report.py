"""Report figures for batch runs, rendered headless to image files.

Three views of a finished batch: success-rate bars and centerline-deviation
bars per (method, beam width) cell, and a top-down footfall scatter over the
beam outline.  Number crunching stays in metrics; this module only draws.
"""

from __future__ import annotations

from collections import OrderedDict
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from beamwalk.metrics import ReportRow
from beamwalk.sim import EpisodeTrace


def _cell_labels(rows: Sequence[ReportRow]) -> list[str]:
    many_widths = len({row.beam_width for row in rows}) > 1
    return [
        f"{row.method}\nw={row.beam_width:.2f}" if many_widths else row.method
        for row in rows
    ]


def save_success_figure(rows: Sequence[ReportRow], path: Path) -> None:
    """Bar chart of success rate per (method, beam) cell."""
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(rows), 3.6))
    xs = range(len(rows))
    ax.bar(xs, [row.report.success_rate for row in rows], color="tab:blue")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(_cell_labels(rows), fontsize=8)
    ax.set_ylim(0.0, 105.0)
    ax.set_ylabel("success rate (%)")
    ax.set_title(f"traversal success over {rows[0].report.count} trials")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_deviation_figure(rows: Sequence[ReportRow], path: Path) -> None:
    """Bar chart of mean centerline deviation (with std bars) per cell."""
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(rows), 3.6))
    xs = range(len(rows))
    means = [row.report.centerline_dev_mean or 0.0 for row in rows]
    stds = [row.report.centerline_dev_std or 0.0 for row in rows]
    ax.bar(xs, means, yerr=stds, capsize=3.0, color="tab:orange")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(_cell_labels(rows), fontsize=8)
    ax.set_ylabel("centerline deviation (m)")
    ax.set_title("footfall deviation from the centerline")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_footfall_figure(
    labeled_traces: Iterable[tuple[str, EpisodeTrace]], path: Path
) -> None:
    """Top-down scatter of realized footfalls over each beam outline.

    One panel per distinct beam geometry; methods share colors across panels.
    """
    by_beam: "OrderedDict[tuple[float, float, float], OrderedDict[str, list[tuple[float, float]]]]"
    by_beam = OrderedDict()
    for method, trace in labeled_traces:
        key = (trace.beam.length, trace.beam.width, trace.beam.centerline_y)
        points = by_beam.setdefault(key, OrderedDict()).setdefault(method, [])
        points.extend((rec.realized.x, rec.realized.y) for rec in trace.records)
    if not by_beam:
        raise ValueError("no traces to draw")

    methods: list[str] = []
    for groups in by_beam.values():
        for m in groups:
            if m not in methods:
                methods.append(m)
    cmap = plt.get_cmap("tab10")
    colors = {m: cmap(i % 10) for i, m in enumerate(methods)}

    fig, axes = plt.subplots(
        len(by_beam), 1, figsize=(8.0, 2.2 * len(by_beam)), squeeze=False
    )
    for ax, ((length, width, center_y), groups) in zip(axes[:, 0], by_beam.items()):
        half = 0.5 * width
        ax.add_patch(
            plt.Rectangle(
                (0.0, center_y - half), length, width,
                facecolor="0.92", edgecolor="0.4", zorder=0,
            )
        )
        ax.axhline(center_y, color="0.6", linewidth=0.8, linestyle="--", zorder=1)
        for m, pts in groups.items():
            if pts:
                ax.scatter(*zip(*pts), s=9, color=colors[m], label=m, zorder=2)
        ax.set_xlim(-0.1, length + 0.3)
        ax.set_ylim(center_y - 4.0 * half, center_y + 4.0 * half)
        ax.set_ylabel("y (m)")
        ax.set_title(f"footfalls, beam {length:.1f} x {width:.2f} m", fontsize=9)
    axes[-1, 0].set_xlabel("x (m)")
    axes[0, 0].legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def render_report(
    rows: Sequence[ReportRow],
    labeled_traces: Iterable[tuple[str, EpisodeTrace]],
    out_dir: Path,
) -> list[Path]:
    """Write the three report figures into out_dir/figures, returning paths."""
    if not rows:
        raise ValueError("no report rows to draw")
    fig_dir = Path(out_dir) / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    success = fig_dir / "success_rate.png"
    deviation = fig_dir / "centerline_dev.png"
    footfalls = fig_dir / "footfalls.png"
    save_success_figure(rows, success)
    save_deviation_figure(rows, deviation)
    save_footfall_figure(labeled_traces, footfalls)
    return [success, deviation, footfalls]

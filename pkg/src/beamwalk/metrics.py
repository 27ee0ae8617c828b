"""Per-trial evaluation and batch aggregation of beam-traversal episodes.

A trial is summarized by four headline numbers — success, traversal
fraction, mean centerline deviation of on-beam footfalls, and RMSE between
commanded and realized footfalls — and aggregated as mean plus sample
standard deviation across trials.  Trials with no usable footfalls carry
``None`` for the undefined statistics rather than a fake zero.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from beamwalk.sim import TERMINATIONS, BeamSpec, EpisodeTrace


def traversal_rate(distance: float, beam_length: float) -> float:
    """Fraction of the beam covered: min(1, distance / beam_length)."""
    if not beam_length > 0.0:
        raise ValueError(f"beam length must be positive, got {beam_length}")
    if distance < 0.0:
        raise ValueError(f"distance must be non-negative, got {distance}")
    return min(1.0, distance / beam_length)


@dataclass(frozen=True)
class TrialResult:
    """Headline numbers for one episode."""

    success: bool
    distance: float
    traversal_rate: float
    centerline_dev: float | None  # None when no on-beam footfalls exist
    fp_rmse: float | None  # realized vs. refined target; None without transitions
    fp_rmse_template: float | None  # realized vs. unrefined proposal (secondary)


def _rmse(errors: Sequence[float]) -> float | None:
    if not errors:
        return None
    return math.sqrt(sum(e * e for e in errors) / len(errors))


def evaluate_trial(trace: EpisodeTrace, beam: BeamSpec) -> TrialResult:
    """Score one finished episode against the beam it ran on."""
    if trace.termination not in TERMINATIONS:
        raise ValueError(f"malformed trace: unknown termination {trace.termination!r}")
    times = [r.t for r in trace.records]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("malformed trace: record times are not strictly increasing")

    distance = max(0.0, min(trace.max_com_x, beam.length))
    devs = [
        abs(r.realized.y - beam.centerline_y) for r in trace.records if r.on_beam
    ]
    err_final = [
        math.hypot(r.realized.x - r.planned.x, r.realized.y - r.planned.y)
        for r in trace.records
    ]
    err_template = [
        math.hypot(r.realized.x - r.template.x, r.realized.y - r.template.y)
        for r in trace.records
    ]
    return TrialResult(
        success=trace.termination == "reached_end",
        distance=distance,
        traversal_rate=traversal_rate(distance, beam.length),
        centerline_dev=sum(devs) / len(devs) if devs else None,
        fp_rmse=_rmse(err_final),
        fp_rmse_template=_rmse(err_template),
    )


@dataclass(frozen=True)
class AggregateReport:
    """Mean and sample standard deviation of each metric over a batch."""

    count: int
    success_rate: float  # percent
    traversal_rate_mean: float
    traversal_rate_std: float
    centerline_dev_mean: float | None
    centerline_dev_std: float | None
    fp_rmse_mean: float | None
    fp_rmse_std: float | None
    fp_rmse_template_mean: float | None
    fp_rmse_template_std: float | None


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    # the statistics module works in exact rationals, so identical samples
    # give a std of exactly 0 and the result is order-independent
    if len(values) < 2:
        return statistics.fmean(values), 0.0
    return statistics.fmean(values), statistics.stdev(values)


def _opt_mean_std(values: Sequence[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    return _mean_std(values)


def aggregate(results: Iterable[TrialResult]) -> AggregateReport:
    """Batch statistics; the success rate is a percentage."""
    batch = list(results)
    if not batch:
        raise ValueError("cannot aggregate an empty batch of trials")
    tr_mean, tr_std = _mean_std([r.traversal_rate for r in batch])
    dev_mean, dev_std = _opt_mean_std([r.centerline_dev for r in batch if r.centerline_dev is not None])
    rmse_mean, rmse_std = _opt_mean_std([r.fp_rmse for r in batch if r.fp_rmse is not None])
    rmse_t_mean, rmse_t_std = _opt_mean_std(
        [r.fp_rmse_template for r in batch if r.fp_rmse_template is not None]
    )
    return AggregateReport(
        count=len(batch),
        success_rate=100.0 * sum(1 for r in batch if r.success) / len(batch),
        traversal_rate_mean=tr_mean,
        traversal_rate_std=tr_std,
        centerline_dev_mean=dev_mean,
        centerline_dev_std=dev_std,
        fp_rmse_mean=rmse_mean,
        fp_rmse_std=rmse_std,
        fp_rmse_template_mean=rmse_t_mean,
        fp_rmse_template_std=rmse_t_std,
    )


# --------------------------------------------------------------------------
# report emission


@dataclass(frozen=True)
class ReportRow:
    """One (method, beam) cell of a batch report."""

    method: str
    beam_width: float
    report: AggregateReport


CSV_COLUMNS: tuple[str, ...] = (
    "method",
    "beam_width",
    "trials",
    "success_rate",
    "centerline_dev_mean",
    "centerline_dev_std",
    "fp_rmse_mean",
    "fp_rmse_std",
    "traversal_rate_mean",
    "fp_rmse_template_mean",
    "fp_rmse_template_std",
)


def _num(v: float | None) -> str:
    return "nan" if v is None else "%.6f" % v


def format_csv(rows: Sequence[ReportRow]) -> str:
    """Deterministic CSV: one row per (method, beam width), fixed columns.

    Undefined statistics are written as ``nan``.
    """
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        rep = row.report
        lines.append(
            ",".join(
                (
                    row.method,
                    "%.6f" % row.beam_width,
                    str(rep.count),
                    "%.6f" % rep.success_rate,
                    _num(rep.centerline_dev_mean),
                    _num(rep.centerline_dev_std),
                    _num(rep.fp_rmse_mean),
                    _num(rep.fp_rmse_std),
                    "%.6f" % rep.traversal_rate_mean,
                    _num(rep.fp_rmse_template_mean),
                    _num(rep.fp_rmse_template_std),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _pm(mean: float | None, std: float | None) -> str:
    if mean is None:
        return "--"
    return "%.4f +- %.4f" % (mean, std if std is not None else 0.0)


def format_table(rows: Sequence[ReportRow]) -> str:
    """Aligned plain-text summary table of the same rows as the CSV."""
    header = (
        "method",
        "width",
        "n",
        "success %",
        "centerline dev (m)",
        "fp rmse (m)",
        "traversal",
    )
    body = [
        (
            row.method,
            "%.2f" % row.beam_width,
            str(row.report.count),
            "%.1f" % row.report.success_rate,
            _pm(row.report.centerline_dev_mean, row.report.centerline_dev_std),
            _pm(row.report.fp_rmse_mean, row.report.fp_rmse_std),
            "%.4f +- %.4f"
            % (row.report.traversal_rate_mean, row.report.traversal_rate_std),
        )
        for row in rows
    ]
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i]) for i in range(len(header))]
    def fmt_line(cells: Sequence[str]) -> str:
        return "  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)).rstrip()
    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    return "\n".join([fmt_line(header), rule] + [fmt_line(r) for r in body]) + "\n"

"""Command-line front end: batch runs, window extraction, trace dumps.

Everything here is plumbing around the library: configs come from
``beamwalk.config``, episodes from ``beamwalk.sim``, statistics from
``beamwalk.metrics`` and figures from ``beamwalk.report``.  Output files are
written atomically (temp file + rename) so a crashed run never leaves a
half-written CSV behind, and every error path prints one line with a
greppable reason code and exits nonzero.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from beamwalk.config import ConfigError, ExperimentConfig, MethodSpec, load_config
from beamwalk.metrics import ReportRow, aggregate, evaluate_trial, format_csv, format_table
from beamwalk.report import render_report
from beamwalk.residual import ExternalPolicy
from beamwalk.sim import BeamSpec, EpisodeTrace, run_episode
from beamwalk.window import (
    CloudParseError,
    PointCloud,
    build_from_pointcloud,
    format_flat,
    format_grid,
    load_cloud,
)

log = logging.getLogger("beamwalk")


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _policy_for(method: MethodSpec):
    """None selects the engine's built-in variant by name."""
    if method.policy == "external":
        return ExternalPolicy.from_file(method.residual_file)
    return None


def _run_trial(exp: ExperimentConfig, method: MethodSpec, beam: BeamSpec, trial: int) -> EpisodeTrace:
    cfg = exp.episode(method, beam, trial)
    return run_episode(cfg, _policy_for(method))


def cmd_run(args: argparse.Namespace) -> int:
    exp = load_config(args.config)
    if args.seed is not None:
        exp = replace(exp, seed_base=args.seed)
    out_dir = Path(args.out_dir if args.out_dir is not None else exp.out_dir)

    cells = [
        (beam_name, beam, method)
        for beam_name, beam in exp.beams
        for method in exp.methods
    ]
    log.info(
        "running %d methods x %d beams x %d trials (%d episodes, %d workers)",
        len(exp.methods), len(exp.beams), exp.trials, len(cells) * exp.trials, args.jobs,
    )

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = {
            (i, trial): pool.submit(_run_trial, exp, method, beam, trial)
            for i, (_, beam, method) in enumerate(cells)
            for trial in range(exp.trials)
        }
        traces = {key: fut.result() for key, fut in futures.items()}

    rows: list[ReportRow] = []
    labeled: list[tuple[str, EpisodeTrace]] = []
    for i, (beam_name, beam, method) in enumerate(cells):
        cell_traces = [traces[i, t] for t in range(exp.trials)]
        for trace in cell_traces:
            name = f"{method.name}_{beam_name}_{trace.seed:04d}.txt"
            _write_atomic(out_dir / "traces" / name, trace.to_text())
            labeled.append((method.name, trace))
        rows.append(
            ReportRow(
                method=method.name,
                beam_width=beam.width,
                report=aggregate(evaluate_trial(tr, beam) for tr in cell_traces),
            )
        )

    _write_atomic(out_dir / "report.csv", format_csv(rows))
    table = format_table(rows)
    _write_atomic(out_dir / "report.txt", table)
    figures = render_report(rows, labeled, out_dir)
    sys.stdout.write(table)
    log.info("wrote %s and %d figures under %s", out_dir / "report.csv", len(figures), out_dir)
    return 0


def _pose_transform(pose: tuple[float, float, float]) -> np.ndarray | None:
    """World -> body 4x4 for a planar pose, None for the identity pose."""
    x, y, psi = pose
    if x == 0.0 and y == 0.0 and psi == 0.0:
        return None
    c, s = math.cos(psi), math.sin(psi)
    t = np.eye(4)
    t[0, 0], t[0, 1] = c, s
    t[1, 0], t[1, 1] = -s, c
    t[0, 3] = -(c * x + s * y)
    t[1, 3] = -(-s * x + c * y)
    return t


def cmd_window(args: argparse.Namespace) -> int:
    cloud = load_cloud(args.cloud)
    transform = _pose_transform(tuple(args.pose))
    if transform is not None:
        cloud = PointCloud(cloud.points, transform)
    window = build_from_pointcloud(cloud)
    out_path = Path(args.out_dir) / "window.txt"
    _write_atomic(out_path, format_flat(window))
    sys.stdout.write(format_grid(window))
    log.info("wrote %d cell values to %s", len(window.heights), out_path)
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    exp = load_config(args.config)
    method = next((m for m in exp.methods if m.name == args.method), None) if args.method else exp.methods[0]
    if method is None:
        raise ConfigError(f"unknown method {args.method!r}; config defines {', '.join(m.name for m in exp.methods)}")
    beam_pair = next(((n, b) for n, b in exp.beams if n == args.beam), None) if args.beam else exp.beams[0]
    if beam_pair is None:
        raise ConfigError(f"unknown beam {args.beam!r}; config defines {', '.join(n for n, _ in exp.beams)}")
    beam_name, beam = beam_pair
    if args.seed is not None:
        exp = replace(exp, seed_base=args.seed)

    trace = _run_trial(exp, method, beam, 0)
    w = sys.stdout.write
    w(f"method {method.name} ({method.policy}), beam {beam_name} "
      f"{beam.length:g} x {beam.width:g} m, seed {trace.seed}\n")
    for rec in trace.records:
        w(
            f"step {rec.index:3d} t={rec.t:7.3f} {rec.side:5s} "
            f"template=({rec.template.x:+.3f}, {rec.template.y:+.3f}, {rec.template.psi:+.3f}) "
            f"residual=({rec.residual.dx:+.3f}, {rec.residual.dy:+.3f}, {rec.residual.dpsi:+.3f}) "
            f"planned=({rec.planned.x:+.3f}, {rec.planned.y:+.3f}, {rec.planned.psi:+.3f}) "
            f"realized=({rec.realized.x:+.3f}, {rec.realized.y:+.3f}, {rec.realized.psi:+.3f}) "
            f"{'on ' if rec.on_beam else 'OFF'}\n"
        )
        terms = "  ".join(f"{k}={v:+.4f}" for k, v in rec.rewards.items())
        w(f"         {terms}\n")
    w(
        f"end {trace.termination} after {len(trace.records)} transitions, "
        f"t={trace.sim_time:.3f} s, max x={trace.max_com_x:.3f} m\n"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamwalk",
        description="Footstep-planning batches, elevation windows and episode traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a batch experiment from a config file")
    p_run.add_argument("--config", required=True, help="experiment INI file")
    p_run.add_argument("--out-dir", default=None, help="output directory (default: from config)")
    p_run.add_argument("--jobs", type=int, default=1, help="concurrent episode workers")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed base")
    p_run.set_defaults(fn=cmd_run)

    p_win = sub.add_parser("window", help="bin a point-cloud file into the elevation window")
    p_win.add_argument("--cloud", required=True, help="x y z text file")
    p_win.add_argument(
        "--pose", type=float, nargs=3, default=(0.0, 0.0, 0.0), metavar=("X", "Y", "PSI"),
        help="body pose the cloud is taken from (world frame)",
    )
    p_win.add_argument("--out-dir", default=".", help="directory for the flat cell-value file")
    p_win.set_defaults(fn=cmd_window)

    p_tr = sub.add_parser("trace", help="run one episode and dump every transition")
    p_tr.add_argument("--config", required=True, help="experiment INI file")
    p_tr.add_argument("--method", default=None, help="method name (default: first in config)")
    p_tr.add_argument("--beam", default=None, help="beam name (default: first in config)")
    p_tr.add_argument("--seed", type=int, default=None, help="episode seed (default: config seed base)")
    p_tr.set_defaults(fn=cmd_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("BEAMWALK_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"beamwalk: error: config: {exc}", file=sys.stderr)
        return 2
    except CloudParseError as exc:
        print(f"beamwalk: error: cloud-parse: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"beamwalk: error: missing-file: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"beamwalk: error: invalid: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"beamwalk: error: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

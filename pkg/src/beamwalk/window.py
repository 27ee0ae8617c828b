"""Body-centric terrain snapshot on a fixed 11 x 17 grid.

The grid covers a forward window of 0.1..1.1 m ahead of the body and
-0.8..+0.8 m to either side, at 0.1 m spacing: 11 samples along the
forward axis per column, 17 columns across, 187 cells total.  The flat
ordering is column-major: index = col * 11 + row, rows running near to
far within a column, columns running from the right edge (y = -0.8) to
the left edge (y = +0.8).

Two construction paths produce the same representation:

* sampling an analytic height field at the grid points (simulation), and
* folding a 3-D point cloud into the grid (sensor data): per cell, points
  are gathered in a square bin that grows 0.10 -> 0.15 -> 0.20 -> 0.25 ->
  0.30 m until non-empty; the cell value is the tallest point plus a
  fixed sensor-height offset, clamped to [-1.4, -0.7]; cells that stay
  empty at 0.30 m take the floor value -1.4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from beamwalk.frames import rotate

HeightField = Callable[[float, float], float]

# Point-cloud folding constants: sensor height offset added to point
# heights, the admissible value range, and the adaptive bin ladder.
HEIGHT_OFFSET = 0.38
CLAMP_LO = -1.4
CLAMP_HI = -0.7
EMPTY_FILL = -1.4
BIN_SIDES = (0.10, 0.15, 0.20, 0.25, 0.30)


class CloudParseError(ValueError):
    """Malformed point-cloud text; carries the offending line number."""


@dataclass(frozen=True)
class WindowSpec:
    """Geometry of the body-frame sampling grid."""

    x_min: float = 0.1
    x_max: float = 1.1
    y_min: float = -0.8
    y_max: float = 0.8
    spacing: float = 0.1

    def __post_init__(self) -> None:
        if self.spacing <= 0.0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"window extents are inverted: {self}")
        for lo, hi in ((self.x_min, self.x_max), (self.y_min, self.y_max)):
            span = (hi - lo) / self.spacing
            if abs(span - round(span)) > 1e-9:
                raise ValueError(f"extents must be integer multiples of spacing: {self}")

    @property
    def rows(self) -> int:
        return int(round((self.x_max - self.x_min) / self.spacing)) + 1

    @property
    def cols(self) -> int:
        return int(round((self.y_max - self.y_min) / self.spacing)) + 1

    @property
    def size(self) -> int:
        return self.rows * self.cols


DEFAULT_SPEC = WindowSpec()


def grid_index(row: int, col: int, spec: WindowSpec = DEFAULT_SPEC) -> int:
    """Flat index of (row, col): column-major, near-to-far within a column."""
    if not 0 <= row < spec.rows:
        raise ValueError(f"row {row} outside [0, {spec.rows})")
    if not 0 <= col < spec.cols:
        raise ValueError(f"col {col} outside [0, {spec.cols})")
    return col * spec.rows + row


def grid_row_col(index: int, spec: WindowSpec = DEFAULT_SPEC) -> tuple[int, int]:
    """Inverse of grid_index."""
    if not 0 <= index < spec.size:
        raise ValueError(f"index {index} outside [0, {spec.size})")
    return index % spec.rows, index // spec.rows


def cell_center(row: int, col: int, spec: WindowSpec = DEFAULT_SPEC) -> tuple[float, float]:
    """Body-frame coordinates of a cell center."""
    if not (0 <= row < spec.rows and 0 <= col < spec.cols):
        raise ValueError(f"cell ({row}, {col}) outside the grid")
    return (spec.x_min + row * spec.spacing, spec.y_min + col * spec.spacing)


def window_points(
    body_pose: tuple[float, float, float], spec: WindowSpec = DEFAULT_SPEC
) -> list[tuple[float, float]]:
    """World coordinates of all cells, in flat order, for a body at (x, y, heading)."""
    bx, by, heading = body_pose
    pts = []
    for i in range(spec.size):
        row, col = grid_row_col(i, spec)
        px, py = cell_center(row, col, spec)
        ox, oy = rotate(px, py, heading)
        pts.append((bx + ox, by + oy))
    return pts


@dataclass(frozen=True)
class ElevationWindow:
    """Flat cell values plus where they came from ('heightfield' | 'pointcloud')."""

    heights: tuple[float, ...]
    provenance: str
    spec: WindowSpec = field(default=DEFAULT_SPEC)

    def __post_init__(self) -> None:
        if len(self.heights) != self.spec.size:
            raise ValueError(
                f"expected {self.spec.size} cells, got {len(self.heights)}"
            )
        if self.provenance not in ("heightfield", "pointcloud"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def at(self, row: int, col: int) -> float:
        return self.heights[grid_index(row, col, self.spec)]

    def as_grid(self) -> np.ndarray:
        """(rows, cols) array view of the flat ordering."""
        return np.asarray(self.heights, dtype=float).reshape(self.spec.cols, self.spec.rows).T


@dataclass(frozen=True)
class PointCloud:
    """N x 3 point set; `transform` (4x4, optional) maps raw points into the
    grid frame before folding (e.g. a gravity-alignment / body-pose inverse)."""

    points: np.ndarray
    transform: np.ndarray | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        object.__setattr__(self, "points", pts)
        if self.transform is not None:
            t = np.asarray(self.transform, dtype=float)
            if t.shape != (4, 4):
                raise ValueError(f"transform must be 4x4, got {t.shape}")
            object.__setattr__(self, "transform", t)


def sample_from_heightfield(
    h: HeightField, body_pose: tuple[float, float, float], spec: WindowSpec = DEFAULT_SPEC
) -> ElevationWindow:
    """Evaluate the field at every cell of the window for the given body pose."""
    vals = tuple(h(px, py) for px, py in window_points(body_pose, spec))
    return ElevationWindow(vals, "heightfield", spec)


def build_from_pointcloud(cloud: PointCloud, spec: WindowSpec = DEFAULT_SPEC) -> ElevationWindow:
    """Fold a point cloud into the grid (see module docstring for the rule).

    The cloud is pre-cropped to the window rectangle padded by half of the
    largest bin side, which cannot change any cell value: it only discards
    points no bin can reach.
    """
    pts = cloud.points
    if cloud.transform is not None:
        homo = np.hstack([pts, np.ones((len(pts), 1))])
        pts = (homo @ cloud.transform.T)[:, :3]

    pad = BIN_SIDES[-1] / 2.0
    if len(pts):
        keep = (
            (pts[:, 0] >= spec.x_min - pad)
            & (pts[:, 0] <= spec.x_max + pad)
            & (pts[:, 1] >= spec.y_min - pad)
            & (pts[:, 1] <= spec.y_max + pad)
        )
        pts = pts[keep]

    xs, ys, zs = (pts[:, 0], pts[:, 1], pts[:, 2]) if len(pts) else (None, None, None)
    vals = []
    for i in range(spec.size):
        row, col = grid_row_col(i, spec)
        cx, cy = cell_center(row, col, spec)
        value = EMPTY_FILL
        if xs is not None:
            for side in BIN_SIDES:
                half = side / 2.0
                mask = (np.abs(xs - cx) <= half) & (np.abs(ys - cy) <= half)
                if mask.any():
                    value = float(zs[mask].max()) + HEIGHT_OFFSET
                    value = max(CLAMP_LO, min(CLAMP_HI, value))
                    break
        vals.append(value)
    return ElevationWindow(tuple(vals), "pointcloud", spec)


def parse_cloud_text(text: str, name: str = "<cloud>") -> PointCloud:
    """Parse whitespace-separated `x y z` lines; '#' starts a comment."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise CloudParseError(f"{name}: line {lineno}: expected 3 values, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise CloudParseError(f"{name}: line {lineno}: non-numeric value") from None
    pts = np.asarray(rows, dtype=float) if rows else np.zeros((0, 3))
    return PointCloud(pts)


def load_cloud(path: str) -> PointCloud:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_cloud_text(fh.read(), name=path)


def format_flat(window: ElevationWindow) -> str:
    """187 newline-separated values, %.6f, flat order; trailing newline."""
    return "".join(f"{v:.6f}\n" for v in window.heights)


def format_grid(window: ElevationWindow) -> str:
    """Human-readable rows x cols table, far row first, right column first."""
    spec = window.spec
    lines = [
        f"# {spec.rows} x {spec.cols} window, forward {spec.x_min:.1f}..{spec.x_max:.1f} m"
        f", lateral {spec.y_min:.1f}..{spec.y_max:.1f} m, {spec.spacing:.1f} m spacing",
        "# rows: far -> near (top -> bottom); cols: y=-0.8 (left edge of text) -> y=+0.8",
    ]
    for row in range(spec.rows - 1, -1, -1):
        cells = " ".join(f"{window.at(row, col):7.3f}" for col in range(spec.cols))
        lines.append(cells)
    return "\n".join(lines) + "\n"

"""Bounded swing-target refinement.

A residual r = (dx, dy, dpsi) is a small body-frame correction applied on
top of the nominal swing target: the planar part is rotated by the body
heading into the world frame and added to the target position, the yaw part
is added to the target yaw.  Residuals are saturated componentwise to a
box [-S, +S] before application, and only the swing foot is ever moved.

Planning policies
-----------------
zero                 the unrefined baseline (always (0, 0, 0))
grid_search          exhaustive argmax over a fixed uniform lattice
coordinate_descent   cyclic one-dimensional golden-section refinement
external             replay of a recorded per-step residual file
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from beamwalk.frames import rotate, wrap_angle
from beamwalk.lipm import CoMState
from beamwalk.template import FootPose, Side, side_sign
from beamwalk.window import ElevationWindow

Objective = Callable[["Residual"], float]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class PlanningError(RuntimeError):
    """Raised when a policy cannot produce a usable residual."""


@dataclass(frozen=True)
class Residual:
    dx: float = 0.0
    dy: float = 0.0
    dpsi: float = 0.0

    def norm(self) -> float:
        return math.sqrt(self.dx**2 + self.dy**2 + self.dpsi**2)


@dataclass(frozen=True)
class ResidualBounds:
    """Componentwise saturation box; all bounds strictly positive."""

    dx: float = 0.08
    dy: float = 0.05
    dpsi: float = 0.2

    def __post_init__(self) -> None:
        if self.dx <= 0.0 or self.dy <= 0.0 or self.dpsi <= 0.0:
            raise ValueError(f"residual bounds must be positive, got {self}")


@dataclass(frozen=True)
class PlannerObservation:
    """What a policy is allowed to see when refining one step."""

    com: CoMState
    body_heading: float
    phase_feats: tuple[float, float]  # (sin, cos) of the phase angle
    target_left: FootPose
    target_right: FootPose
    elevation: ElevationWindow


def saturate(r: Residual, bounds: ResidualBounds) -> Residual:
    """Componentwise clamp of r into [-S, +S]."""
    return Residual(
        min(bounds.dx, max(-bounds.dx, r.dx)),
        min(bounds.dy, max(-bounds.dy, r.dy)),
        min(bounds.dpsi, max(-bounds.dpsi, r.dpsi)),
    )


def compose(target: FootPose, r: Residual, body_heading: float) -> FootPose:
    """Apply a (pre-saturated) residual to a swing target.

    The planar correction is expressed in the body frame and rotated by the
    body heading into the world frame; yaw adds and re-normalizes.
    """
    ox, oy = rotate(r.dx, r.dy, body_heading)
    return FootPose(target.x + ox, target.y + oy, wrap_angle(target.psi + r.dpsi))


def apply_residual(
    left: FootPose,
    right: FootPose,
    swing_side: Side,
    r: Residual,
    bounds: ResidualBounds,
    body_heading: float,
) -> tuple[FootPose, FootPose]:
    """Saturate r and apply it to the swing foot's target only.

    Returns (left, right) with the stance-side pose passed through as the
    very same object -- the stance is immutable under refinement.
    """
    rs = saturate(r, bounds)
    if swing_side == "left":
        return compose(left, rs, body_heading), right
    return left, compose(right, rs, body_heading)


# --------------------------------------------------------------------------
# policies


class ZeroPolicy:
    """No refinement: the template baseline."""

    name = "zero"

    def plan(self, obs: PlannerObservation, objective: Objective, bounds: ResidualBounds) -> Residual:
        return Residual(0.0, 0.0, 0.0)


def _lattice(bounds: ResidualBounds, nodes: tuple[int, int, int]) -> list[Residual]:
    def axis(s: float, n: int) -> list[float]:
        if n == 1:
            return [0.0]
        # integer numerator keeps the axis exactly antisymmetric and puts the
        # center node of an odd count at exactly 0.0
        return [s * (2 * i - (n - 1)) / (n - 1) for i in range(n)]

    return [
        Residual(dx, dy, dpsi)
        for dpsi in axis(bounds.dpsi, nodes[2])
        for dy in axis(bounds.dy, nodes[1])
        for dx in axis(bounds.dx, nodes[0])
    ]


class GridSearchPolicy:
    """Exhaustive argmax over a uniform lattice spanning the residual box.

    Ties on the raw objective value break toward the smallest Euclidean
    norm, then lexicographically by (dx, dy, dpsi).
    """

    name = "grid_search"

    def __init__(self, nodes: tuple[int, int, int] = (11, 11, 7)):
        if any(n < 1 for n in nodes):
            raise ValueError(f"lattice must have at least one node per axis, got {nodes}")
        self.nodes = nodes

    def plan(self, obs: PlannerObservation, objective: Objective, bounds: ResidualBounds) -> Residual:
        best: Residual | None = None
        best_val = -math.inf
        best_key: tuple[float, float, float, float] | None = None
        for r in _lattice(bounds, self.nodes):
            v = objective(r)
            if not math.isfinite(v):
                continue
            key = (r.dx**2 + r.dy**2 + r.dpsi**2, r.dx, r.dy, r.dpsi)
            if best is None or v > best_val or (v == best_val and key < best_key):
                best, best_val, best_key = r, v, key
        if best is None:
            raise PlanningError("objective was non-finite at every lattice point")
        return best


class CoordinateDescentPolicy:
    """Cyclic per-coordinate golden-section ascent from the zero residual.

    Each sweep refines dx, dy, dpsi in turn over their full bounds; sweeps
    stop when a full cycle improves the objective by less than `tol` or
    after `max_sweeps` cycles.  Each line search scans a coarse set of
    nodes to bracket the best region first -- the safety term makes the
    objective piecewise (cliff at the beam edge), and golden section alone
    can stall on the wrong side of a cliff -- then refines inside that
    bracket.  The result never scores below the zero residual: candidate
    moves are only accepted on improvement.
    """

    name = "coordinate_descent"

    def __init__(
        self, tol: float = 1e-6, max_sweeps: int = 50, xtol: float = 1e-6, scan_nodes: int = 9
    ):
        if tol <= 0.0 or xtol <= 0.0 or max_sweeps < 1 or scan_nodes < 3:
            raise ValueError("tol and xtol must be positive, max_sweeps >= 1, scan_nodes >= 3")
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.xtol = xtol
        self.scan_nodes = scan_nodes

    def _golden_max(self, f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
        a, b = lo, hi
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = f(c), f(d)
        while b - a > self.xtol:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - GOLDEN * (b - a)
                fc = f(c)
            else:
                a, c, fc = c, d, fd
                d = a + GOLDEN * (b - a)
                fd = f(d)
        return (c, fc) if fc >= fd else (d, fd)

    def _line_max(self, f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
        n = self.scan_nodes
        xs = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
        vals = [f(x) for x in xs]
        j = max(range(n), key=lambda i: vals[i])
        x, v = self._golden_max(f, xs[max(0, j - 1)], xs[min(n - 1, j + 1)])
        # a cliff inside the bracket can leave refinement below the scan node
        return (xs[j], vals[j]) if vals[j] > v else (x, v)

    def plan(self, obs: PlannerObservation, objective: Objective, bounds: ResidualBounds) -> Residual:
        cur = [0.0, 0.0, 0.0]
        cur_val = objective(Residual(0.0, 0.0, 0.0))
        if not math.isfinite(cur_val):
            raise PlanningError("objective is non-finite at the zero residual")
        spans = (bounds.dx, bounds.dy, bounds.dpsi)
        for _ in range(self.max_sweeps):
            start_val = cur_val
            for k in range(3):
                def line(c: float, k: int = k) -> float:
                    trial = list(cur)
                    trial[k] = c
                    v = objective(Residual(*trial))
                    return v if math.isfinite(v) else -math.inf

                c_best, v_best = self._line_max(line, -spans[k], spans[k])
                if v_best > cur_val:
                    cur[k] = c_best
                    cur_val = v_best
            if cur_val - start_val < self.tol:
                break
        return Residual(*cur)


class ExternalPolicy:
    """Replay of recorded residuals, one per planning call, in file order.

    Exhausting the recording raises PlanningError: a silent fallback would
    mask a replay/episode length mismatch.
    """

    name = "external"

    def __init__(self, residuals: Sequence[Residual]):
        self.residuals = list(residuals)
        self.cursor = 0

    @classmethod
    def from_file(cls, path: str) -> "ExternalPolicy":
        residuals = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 3:
                    raise PlanningError(
                        f"residual file {path}: line {lineno}: expected 3 values, got {len(parts)}"
                    )
                try:
                    dx, dy, dpsi = (float(p) for p in parts)
                except ValueError as exc:
                    raise PlanningError(f"residual file {path}: line {lineno}: {exc}") from exc
                residuals.append(Residual(dx, dy, dpsi))
        return cls(residuals)

    def plan(self, obs: PlannerObservation, objective: Objective, bounds: ResidualBounds) -> Residual:
        if self.cursor >= len(self.residuals):
            raise PlanningError(
                f"external residual recording exhausted after {len(self.residuals)} steps"
            )
        r = self.residuals[self.cursor]
        self.cursor += 1
        return r


ResidualPolicy = ZeroPolicy | GridSearchPolicy | CoordinateDescentPolicy | ExternalPolicy


def plan_residual(
    obs: PlannerObservation,
    policy: ResidualPolicy,
    objective: Objective,
    bounds: ResidualBounds,
) -> Residual:
    """Run one policy call and saturate its output into the bounds box."""
    return saturate(policy.plan(obs, objective, bounds), bounds)

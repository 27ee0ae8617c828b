"""Nominal stepping rule: where the swing foot should land, absent refinement.

The swing target is built from the extrapolated CoM predicted at touchdown:
the foot is placed at that point, shifted sideways by a fixed offset on the
swing side and along the commanded direction by a velocity feedforward (and,
optionally, a velocity-error feedback correction).  The stance foot is never
touched: the rule proposes swing placements only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from beamwalk.frames import rotate, wrap_angle
from beamwalk.lipm import CoMState, PendulumParams, propagate, xcom

Side = Literal["left", "right"]

LEFT: Side = "left"
RIGHT: Side = "right"


def side_sign(side: Side) -> int:
    """+1 for the left foot (+y), -1 for the right foot (-y)."""
    if side == LEFT:
        return 1
    if side == RIGHT:
        return -1
    raise ValueError(f"unknown side {side!r}")


def other_side(side: Side) -> Side:
    return RIGHT if side == LEFT else LEFT


@dataclass(frozen=True)
class FootPose:
    """Planar foot placement (x, y, yaw); yaw is normalized to (-pi, pi]."""

    x: float
    y: float
    psi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi", wrap_angle(self.psi))


@dataclass(frozen=True)
class StepCommand:
    """Operator velocity command in the heading frame."""

    vx_cmd: float = 0.0
    vy_cmd: float = 0.0
    yaw_rate_cmd: float = 0.0


@dataclass(frozen=True)
class GaitPhase:
    """Phase clock: phi in [0, 1) within the current swing, plus the swing side."""

    phi: float
    swing_side: Side
    t_step: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.phi < 1.0:
            raise ValueError(f"phi must lie in [0, 1), got {self.phi}")
        if self.t_step <= 0.0:
            raise ValueError(f"t_step must be positive, got {self.t_step}")
        side_sign(self.swing_side)  # validate


@dataclass(frozen=True)
class TemplateConfig:
    """Constants of the stepping rule.

    k_v        gain on the commanded-velocity feedforward (k_v * v_cmd * t_step)
    k_fb       gain on the predicted-velocity error (k_fb * (v_pred - v_cmd));
               0 disables the feedback term
    lateral_offset   sideways placement b, applied as +b for the left foot and
               -b for the right, in the stance heading frame
    lateral_bias     constant sideways miscalibration added to every proposal
               (same sign for both feet); 0 for a well-calibrated rule
    t_step     nominal step duration used by the feedforward terms and by the
               engine to build the phase clock
    """

    t_step: float = 0.5
    k_v: float = 0.5
    k_fb: float = 0.0
    lateral_offset: float = 0.10
    lateral_bias: float = 0.0

    def __post_init__(self) -> None:
        if self.t_step <= 0.0:
            raise ValueError(f"t_step must be positive, got {self.t_step}")
        if self.lateral_offset < 0.0:
            raise ValueError(f"lateral_offset must be non-negative, got {self.lateral_offset}")
        if not math.isfinite(self.lateral_bias):
            raise ValueError(f"lateral_bias must be finite, got {self.lateral_bias}")


@dataclass(frozen=True)
class DisturbanceSpec:
    """Bounded uniform planar pose disturbance, drawn by (seed, index)."""

    dx: float = 0.0
    dy: float = 0.0
    dpsi: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dx < 0.0 or self.dy < 0.0 or self.dpsi < 0.0:
            raise ValueError("disturbance bounds must be non-negative")


def advance_phase(phase: GaitPhase, dt: float) -> tuple[GaitPhase, bool]:
    """Advance the phase clock by dt.

    phi advances by dt / t_step modulo 1; the returned flag is True exactly
    when phi wraps, and the swing side flips on that wrap.  dt is expected to
    be small against t_step (the engine ticks at 1 ms), so at most one wrap
    occurs per call.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    raw = phase.phi + dt / phase.t_step
    if raw < 1.0:
        return GaitPhase(raw, phase.swing_side, phase.t_step), False
    return GaitPhase(raw % 1.0, other_side(phase.swing_side), phase.t_step), True


def propose_swing_target(
    state: CoMState,
    cmd: StepCommand,
    phase: GaitPhase,
    stance: FootPose,
    params: PendulumParams,
    cfg: TemplateConfig,
) -> FootPose:
    """Swing-foot placement for the touchdown ending the current swing.

    The CoM is propagated over the remaining swing time (1 - phi) * t_step
    about the stance point; the target is the extrapolated CoM of that
    predicted state, shifted (in the stance heading frame) by the commanded
    feedforward, the optional velocity-error feedback, and the fixed lateral
    offset on the swing side.  Target yaw is the stance yaw advanced by the
    commanded yaw rate over one step.

    Only the swing side is proposed; the stance pose is read, never written.
    """
    t_rem = (1.0 - phase.phi) * phase.t_step
    pred = propagate(state, (stance.x, stance.y), params, t_rem)
    xi_x, xi_y = xcom(pred, params.omega0)

    # Predicted velocity along the stance heading, for the feedback term.
    # Speed tracking acts on the heading axis only: across the heading the
    # extrapolated-CoM placement already absorbs the full velocity, and an
    # extra velocity-proportional shift there would widen the side-to-side
    # stepping cycle instead of damping it.
    v_par, _ = rotate(pred.vx, pred.vy, -stance.psi)
    along = cfg.k_v * cmd.vx_cmd * phase.t_step + cfg.k_fb * (v_par - cmd.vx_cmd)
    across = (
        cfg.k_v * cmd.vy_cmd * phase.t_step
        + side_sign(phase.swing_side) * cfg.lateral_offset
        + cfg.lateral_bias
    )
    off_x, off_y = rotate(along, across, stance.psi)
    psi = wrap_angle(stance.psi + cmd.yaw_rate_cmd * phase.t_step)
    return FootPose(xi_x + off_x, xi_y + off_y, psi)


def draw_disturbance(spec: DisturbanceSpec, index: int) -> tuple[float, float, float]:
    """Deterministic bounded-uniform triple for draw number `index`.

    The draw depends only on (spec.seed, index): replaying a sequence of
    indices reproduces the identical stream regardless of call order.
    """
    if index < 0:
        raise ValueError(f"draw index must be non-negative, got {index}")
    rng = np.random.default_rng([spec.seed, index])
    u = rng.uniform(-1.0, 1.0, size=3)
    return (float(u[0]) * spec.dx, float(u[1]) * spec.dy, float(u[2]) * spec.dpsi)


def perturb_target(target: FootPose, spec: DisturbanceSpec, index: int) -> FootPose:
    """Apply the bounded disturbance draw `index` to a proposed placement."""
    ex, ey, epsi = draw_disturbance(spec, index)
    return FootPose(target.x + ex, target.y + ey, wrap_angle(target.psi + epsi))

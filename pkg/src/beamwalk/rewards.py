"""Scoring terms for candidate foot placements, and their weighted sum.

Placement terms (safety, balance, progress, attitude, spacing) score a
candidate swing-foot pose against the terrain and the current stance;
schedule-tracking scores a realized touchdown against its target; the
action regularizer scores the refinement itself.  ``StepObjective`` bundles
the weighted sum into a callable over residuals so the search policies can
maximize it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from beamwalk.frames import wrap_angle
from beamwalk.lipm import CoMState, PendulumParams, propagate, xcom
from beamwalk.residual import Residual, compose
from beamwalk.template import FootPose
from beamwalk.window import HeightField


class ObjectiveError(ValueError):
    """A scoring term came out non-finite; the message names the term."""


@dataclass(frozen=True)
class RewardWeights:
    """Term weights plus the thresholds the terms depend on."""

    footstep_safety: float = 5.0
    beam_balance: float = 1.0
    forward: float = 1.0
    face_forward: float = 0.3
    feet_prox: float = 2.0
    sched: float = 1.0
    mag: float = 0.1
    smooth: float = 0.05

    # term parameters
    h_threshold: float = -0.2
    sigma_balance: float = 0.1
    patch_radius: float = 0.05
    d_min_feet: float = 0.08

    def __post_init__(self) -> None:
        for name in (
            "footstep_safety",
            "beam_balance",
            "forward",
            "face_forward",
            "feet_prox",
            "sched",
            "mag",
            "smooth",
            "h_threshold",
            "d_min_feet",
        ):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"weight {name!r} must be finite")
        if self.sigma_balance <= 0.0:
            raise ValueError(f"sigma_balance must be positive, got {self.sigma_balance}")
        if self.patch_radius <= 0.0:
            raise ValueError(f"patch_radius must be positive, got {self.patch_radius}")


@dataclass(frozen=True)
class StepOutcome:
    """One realized touchdown, for schedule-tracking evaluation."""

    com_before: CoMState
    com_after: CoMState
    residual: Residual
    target: FootPose
    footfall: FootPose
    contact_left: bool
    contact_right: bool
    schedule: int  # +1 when the right foot is the scheduled one, -1 for the left

    def __post_init__(self) -> None:
        if self.schedule not in (-1, 1):
            raise ValueError(f"schedule flag must be +-1, got {self.schedule}")


def footstep_safety(target: FootPose, h: HeightField, h_threshold: float, patch_radius: float) -> float:
    """-1 if the landing cell is below the height threshold, minus the
    variance of a 3x3 height patch around the target (flatness penalty)."""
    center = h(target.x, target.y)
    heights = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            heights.append(h(target.x + i * patch_radius, target.y + j * patch_radius))
    mean = sum(heights) / 9.0
    var = sum((v - mean) ** 2 for v in heights) / 9.0
    return (-1.0 if center < h_threshold else 0.0) - var


def beam_balance(base_y: float, y_center: float, sigma: float) -> float:
    """exp(-((base_y - y_center) / sigma)^2): 1 on the centerline, decaying off it."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return math.exp(-(((base_y - y_center) / sigma) ** 2))


def forward_progress(x_now: float, x_prev: float) -> float:
    """Nonnegative progress only: max(0, x_now - x_prev)."""
    return max(0.0, x_now - x_prev)


def face_forward(psi: float) -> float:
    """exp(-|psi|) with psi wrapped: 1 when facing straight down the track."""
    return math.exp(-abs(wrap_angle(psi)))


def feet_proximity(left: FootPose, right: FootPose, d_min: float) -> float:
    """Penalty when the feet close up along the walking axis:
    -max(0, d_min - |left.x - right.x|)."""
    return -max(0.0, d_min - abs(left.x - right.x))


def schedule_tracking(outcome: StepOutcome) -> float:
    """Contact-schedule agreement plus exponential tracking bonuses.

    (1_right - 1_left) * schedule  +  5.0 exp(-|p_err| / 1.0)
                                   +  0.5 exp(-|psi_err| / 1.0)
    """
    contact = (1.0 if outcome.contact_right else 0.0) - (1.0 if outcome.contact_left else 0.0)
    p_err = math.hypot(
        outcome.footfall.x - outcome.target.x, outcome.footfall.y - outcome.target.y
    )
    psi_err = abs(wrap_angle(outcome.footfall.psi - outcome.target.psi))
    return contact * outcome.schedule + 5.0 * math.exp(-p_err / 1.0) + 0.5 * math.exp(-psi_err / 1.0)


def action_regularizer(r: Residual, r_prev: Residual) -> float:
    """-|r|^2 - |r - r_prev|^2 (magnitude and smoothness, unweighted)."""
    mag = r.dx**2 + r.dy**2 + r.dpsi**2
    smooth = (r.dx - r_prev.dx) ** 2 + (r.dy - r_prev.dy) ** 2 + (r.dpsi - r_prev.dpsi) ** 2
    return -mag - smooth


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepContext:
    """Everything a candidate placement is scored against.

    ``com_touchdown`` is the (predicted) CoM state at the touchdown this
    candidate is planned for.  Progress and balance both propagate it one
    further step about the candidate, scoring what the placement will do to
    the body rather than where the foot sits: a far-forward foot brakes the
    body instead of advancing it, and a foot pulled straight onto the
    centerline stops catching the body's side-sway at all.  Balance is
    therefore scored on the extrapolated base position (position plus
    velocity over the pendulum frequency) at the next touchdown — the point
    the body is heading to rest over — which rewards placements that damp
    the sway onto the centerline instead of chasing it.

    ``outcome`` is filled when scoring a realized step; while planning it is
    None and the schedule term contributes its exact-tracking value.
    """

    field_fn: HeightField
    stance: FootPose
    swing_target: FootPose
    body_heading: float
    beam_center_y: float
    com_touchdown: CoMState
    params: PendulumParams
    t_step: float
    r_prev: Residual = field(default_factory=Residual)
    outcome: StepOutcome | None = None


# schedule term value when the footfall matches its target exactly and the
# scheduled foot made contact: 1 + 5.0 + 0.5
_EXACT_TRACKING = 6.5


def step_objective(
    candidate: FootPose, r: Residual, ctx: StepContext, weights: RewardWeights
) -> dict[str, float]:
    """Weighted per-term breakdown for one candidate placement.

    Returns a dict with every term (already weighted) plus "total".  Raises
    ObjectiveError naming the first non-finite term.
    """
    com_next = propagate(
        ctx.com_touchdown, (candidate.x, candidate.y), ctx.params, ctx.t_step
    )
    base_y = xcom(com_next, ctx.params.omega0)[1]
    sched_raw = schedule_tracking(ctx.outcome) if ctx.outcome is not None else _EXACT_TRACKING

    mag = -(r.dx**2 + r.dy**2 + r.dpsi**2)
    smooth = -(
        (r.dx - ctx.r_prev.dx) ** 2
        + (r.dy - ctx.r_prev.dy) ** 2
        + (r.dpsi - ctx.r_prev.dpsi) ** 2
    )

    terms = {
        "footstep_safety": weights.footstep_safety
        * footstep_safety(candidate, ctx.field_fn, weights.h_threshold, weights.patch_radius),
        "beam_balance": weights.beam_balance
        * beam_balance(base_y, ctx.beam_center_y, weights.sigma_balance),
        "forward": weights.forward
        * forward_progress(com_next.x, ctx.com_touchdown.x),
        "face_forward": weights.face_forward * face_forward(candidate.psi),
        "feet_prox": weights.feet_prox
        * feet_proximity(candidate, ctx.stance, weights.d_min_feet),
        "sched": weights.sched * sched_raw,
        "mag": weights.mag * mag,
        "smooth": weights.smooth * smooth,
    }
    for name, value in terms.items():
        if not math.isfinite(value):
            raise ObjectiveError(f"non-finite term {name!r}: {value}")
    terms["total"] = sum(terms.values())
    return terms


@dataclass
class StepObjective:
    """Residual -> score callable used by the search policies.

    Each candidate residual is composed onto the swing target (rotation by
    the body heading, yaw re-normalized) and the composed pose is scored by
    ``step_objective``.
    """

    ctx: StepContext
    weights: RewardWeights

    def candidate(self, r: Residual) -> FootPose:
        return compose(self.ctx.swing_target, r, self.ctx.body_heading)

    def __call__(self, r: Residual) -> float:
        return step_objective(self.candidate(r), r, self.ctx, self.weights)["total"]

    def breakdown(self, r: Residual) -> dict[str, float]:
        return step_objective(self.candidate(r), r, self.ctx, self.weights)

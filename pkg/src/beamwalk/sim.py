"""Episode engine: narrow-beam worlds, gait rollout, and trace recording.

The center of mass is propagated at a fast fixed timestep over the current
stance foot.  At every step transition the pending swing target is realized
(with bounded touchdown noise), checked against the beam, and logged with a
full reward breakdown; then support switches to the new foot and the next
swing target is proposed and refined.  Identical configs produce
byte-identical trace text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal

from beamwalk.lipm import CoMState, PendulumParams, propagate
from beamwalk.residual import (
    CoordinateDescentPolicy,
    GridSearchPolicy,
    PlannerObservation,
    Residual,
    ResidualBounds,
    ResidualPolicy,
    ZeroPolicy,
    compose,
    plan_residual,
)
from beamwalk.rewards import (
    RewardWeights,
    StepContext,
    StepObjective,
    StepOutcome,
    beam_balance,
    face_forward,
    feet_proximity,
    footstep_safety,
    forward_progress,
    schedule_tracking,
)
from beamwalk.template import (
    DisturbanceSpec,
    FootPose,
    GaitPhase,
    Side,
    StepCommand,
    TemplateConfig,
    advance_phase,
    other_side,
    perturb_target,
    propose_swing_target,
    side_sign,
)
from beamwalk.window import HeightField, sample_from_heightfield

Termination = Literal["reached_end", "footfall_off_beam", "com_diverged", "timeout"]

TERMINATIONS: tuple[str, ...] = (
    "reached_end",
    "footfall_off_beam",
    "com_diverged",
    "timeout",
)

# fixed order of the weighted reward entries in trace lines
REWARD_KEYS: tuple[str, ...] = (
    "footstep_safety",
    "beam_balance",
    "forward",
    "face_forward",
    "feet_prox",
    "sched",
    "mag",
    "smooth",
)

# CoM divergence limits: lateral offset from the stance foot, and speed
DIVERGE_LATERAL = 0.5
DIVERGE_SPEED = 3.0


class TraceParseError(ValueError):
    """Trace text did not match the serialized schema."""


@dataclass(frozen=True)
class BeamSpec:
    """A straight beam along +x flanked by a deep drop on every side."""

    length: float = 3.0
    width: float = 0.2
    centerline_y: float = 0.0
    top_height: float = 0.0
    abyss_height: float = -1.4

    def __post_init__(self) -> None:
        if not self.length > 0.0:
            raise ValueError(f"beam length must be positive, got {self.length}")
        if not self.width > 0.0:
            raise ValueError(f"beam width must be positive, got {self.width}")
        if not self.abyss_height < self.top_height:
            raise ValueError(
                f"abyss height {self.abyss_height} must lie below the beam top {self.top_height}"
            )

    def contains(self, x: float, y: float) -> bool:
        """Closed-boundary point-in-beam test (edges count as on)."""
        return 0.0 <= x <= self.length and abs(y - self.centerline_y) <= self.width / 2.0


def make_beam_heightfield(spec: BeamSpec) -> HeightField:
    """Height query: beam top on the beam rectangle, abyss everywhere else."""

    def h(x: float, y: float) -> float:
        return spec.top_height if spec.contains(x, y) else spec.abyss_height

    return h


def check_footfall(foot: FootPose, spec: BeamSpec) -> bool:
    """True when the foot center lands on the beam (boundary inclusive)."""
    return spec.contains(foot.x, foot.y)


def apply_touchdown(target: FootPose, noise: DisturbanceSpec, index: int) -> FootPose:
    """Realize a commanded footfall with the bounded deterministic noise draw."""
    return perturb_target(target, noise, index)


_POLICY_FACTORIES: dict[str, Callable[[], ResidualPolicy]] = {
    "zero": ZeroPolicy,
    "grid_search": GridSearchPolicy,
    "coordinate_descent": CoordinateDescentPolicy,
}

POLICY_NAMES: tuple[str, ...] = ("zero", "grid_search", "coordinate_descent", "external")


def make_policy(name: str) -> ResidualPolicy:
    """Instantiate a search policy by name with its default settings.

    The "external" variant replays a recording and has no default source, so
    it must be constructed explicitly and passed to run_episode.
    """
    try:
        return _POLICY_FACTORIES[name]()
    except KeyError:
        raise ValueError(
            f"unknown policy variant {name!r}; expected one of {', '.join(_POLICY_FACTORIES)} "
            "(the external variant requires an explicit residual recording)"
        ) from None


@dataclass(frozen=True)
class EpisodeConfig:
    """Everything one episode depends on.

    The episode seed drives the touchdown-noise draws: the seed carried by
    ``touchdown_noise`` is ignored here so that trials paired by seed see
    identical noise streams regardless of how the noise spec was built.
    """

    seed: int = 0
    beam: BeamSpec = field(default_factory=BeamSpec)
    command: StepCommand = field(default_factory=lambda: StepCommand(vx_cmd=0.4))
    template: TemplateConfig = field(default_factory=TemplateConfig)
    bounds: ResidualBounds = field(default_factory=ResidualBounds)
    weights: RewardWeights = field(default_factory=RewardWeights)
    policy: str = "zero"
    touchdown_noise: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    max_steps: int = 250
    max_time: float = 120.0
    dt_fast: float = 0.001
    start_y_offset: float = 0.0
    first_swing: Side = "left"
    pendulum: PendulumParams = field(default_factory=PendulumParams)

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}")
        if not self.max_time > 0.0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if not self.dt_fast > 0.0:
            raise ValueError(f"fast timestep must be positive, got {self.dt_fast}")
        if self.dt_fast >= self.template.t_step:
            raise ValueError(
                f"fast timestep {self.dt_fast} must be smaller than the step period {self.template.t_step}"
            )
        if self.policy not in POLICY_NAMES:
            raise ValueError(
                f"unknown policy variant {self.policy!r}; expected one of {', '.join(POLICY_NAMES)}"
            )
        if not math.isfinite(self.start_y_offset):
            raise ValueError("start_y_offset must be finite")


def cycle_start_state(
    template: TemplateConfig,
    command: StepCommand,
    params: PendulumParams,
    first_swing: Side,
    y_offset: float = 0.0,
) -> tuple[CoMState, FootPose, FootPose]:
    """Standard start: feet at x=0 flanking the start track, CoM between them.

    The forward speed starts at the commanded value.  The initial side speed
    is chosen so that the first proposed footfall already lies on the
    periodic side-to-side stepping cycle of the nominal rule; starting from
    zero side speed would overshoot the first few placements.  With the step
    period T and w = cosh/sinh evaluated at omega*T:

        cycle stance offset  W  = b (1 + C) / (1 + C - S)
        start side speed    vy0 = -sign(first swing) * omega * (b - W / (C + S))

    where b is the template's lateral offset.  Both follow from requiring
    the side-to-side motion to repeat with mirrored sign each step.
    """
    omega = params.omega0
    wt = omega * template.t_step
    c, s = math.cosh(wt), math.sinh(wt)
    b = template.lateral_offset
    cycle_w = b * (1.0 + c) / (1.0 + c - s)
    vy0 = -side_sign(first_swing) * omega * (b - cycle_w / (c + s))
    com = CoMState(x=0.0, y=y_offset, vx=command.vx_cmd, vy=vy0)
    sign = side_sign(first_swing)
    swing_foot = FootPose(0.0, y_offset + sign * b, 0.0)
    stance_foot = FootPose(0.0, y_offset - sign * b, 0.0)
    if first_swing == "left":
        return com, swing_foot, stance_foot
    return com, stance_foot, swing_foot


@dataclass(frozen=True)
class TransitionRecord:
    """One realized step transition."""

    index: int
    t: float
    side: Side  # the foot that landed
    template: FootPose
    residual: Residual
    planned: FootPose
    realized: FootPose
    on_beam: bool
    com: CoMState  # CoM state at the transition instant
    rewards: dict[str, float]  # weighted terms in REWARD_KEYS order plus "total"


@dataclass
class EpisodeTrace:
    """Complete record of one episode, serializable to line-delimited text."""

    seed: int
    policy: str
    beam: BeamSpec
    command: StepCommand
    template: TemplateConfig
    noise: tuple[float, float, float]
    start_y_offset: float
    first_swing: Side
    records: list[TransitionRecord]
    termination: Termination
    sim_time: float
    max_com_x: float
    final_com: CoMState

    @property
    def t_step(self) -> float:
        return self.template.t_step

    def to_text(self) -> str:
        f = _fmt
        lines = [
            "beamwalk-trace 1",
            f"seed {self.seed}",
            f"policy {self.policy}",
            "beam " + f(self.beam.length, self.beam.width, self.beam.centerline_y,
                        self.beam.top_height, self.beam.abyss_height),
            "command " + f(self.command.vx_cmd, self.command.vy_cmd, self.command.yaw_rate_cmd),
            "template " + f(self.template.t_step, self.template.k_v, self.template.k_fb,
                            self.template.lateral_offset, self.template.lateral_bias),
            "noise " + f(*self.noise),
            "start_y_offset " + f(self.start_y_offset),
            f"first_swing {self.first_swing}",
            f"records {len(self.records)}",
        ]
        for r in self.records:
            lines.append(
                f"step {r.index} t " + f(r.t) + f" side {r.side}"
                + " template " + f(r.template.x, r.template.y, r.template.psi)
                + " residual " + f(r.residual.dx, r.residual.dy, r.residual.dpsi)
                + " planned " + f(r.planned.x, r.planned.y, r.planned.psi)
                + " realized " + f(r.realized.x, r.realized.y, r.realized.psi)
                + f" on_beam {int(r.on_beam)}"
                + " com " + f(r.com.x, r.com.y, r.com.vx, r.com.vy)
                + " rewards " + f(*(r.rewards[k] for k in REWARD_KEYS), r.rewards["total"])
            )
        lines.append(
            f"end {self.termination} t " + f(self.sim_time)
            + f" steps {len(self.records)} max_com_x " + f(self.max_com_x)
            + " final_com " + f(self.final_com.x, self.final_com.y, self.final_com.vx, self.final_com.vy)
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EpisodeTrace":
        return _parse_trace(text)


def _fmt(*values: float) -> str:
    return " ".join("%.6f" % v for v in values)


def _parse_trace(text: str) -> EpisodeTrace:
    lines = text.splitlines()

    def fail(lineno: int, why: str) -> TraceParseError:
        return TraceParseError(f"malformed trace line {lineno}: {why}")

    def expect(lineno: int, key: str) -> list[str]:
        if lineno > len(lines):
            raise TraceParseError(f"truncated trace: missing {key!r} line")
        parts = lines[lineno - 1].split()
        if not parts or parts[0] != key:
            raise fail(lineno, f"expected {key!r}")
        return parts[1:]

    head = expect(1, "beamwalk-trace")
    if head != ["1"]:
        raise fail(1, f"unsupported trace version {head}")
    try:
        seed = int(expect(2, "seed")[0])
        policy = expect(3, "policy")[0]
        bl, bw, bc, bt, ba = (float(v) for v in expect(4, "beam"))
        beam = BeamSpec(length=bl, width=bw, centerline_y=bc, top_height=bt, abyss_height=ba)
        cvx, cvy, cyaw = (float(v) for v in expect(5, "command"))
        ts, kv, kfb, lat, bias = (float(v) for v in expect(6, "template"))
        template = TemplateConfig(
            t_step=ts, k_v=kv, k_fb=kfb, lateral_offset=lat, lateral_bias=bias
        )
        noise = tuple(float(v) for v in expect(7, "noise"))
        if len(noise) != 3:
            raise fail(7, "noise needs three bounds")
        start_y = float(expect(8, "start_y_offset")[0])
        first_swing = expect(9, "first_swing")[0]
        if first_swing not in ("left", "right"):
            raise fail(9, f"bad side {first_swing!r}")
        n_records = int(expect(10, "records")[0])
    except (ValueError, IndexError) as exc:
        if isinstance(exc, TraceParseError):
            raise
        raise TraceParseError(f"malformed trace header: {exc}") from exc

    records: list[TransitionRecord] = []
    for i in range(n_records):
        lineno = 11 + i
        parts = expect(lineno, "step")
        # step <i> t <t> side <s> template <3> residual <3> planned <3>
        # realized <3> on_beam <0|1> com <4> rewards <9>
        if len(parts) != 38:
            raise fail(lineno, f"expected 38 fields after 'step', got {len(parts)}")
        try:
            if (parts[1], parts[3], parts[5], parts[9], parts[13], parts[17],
                    parts[21], parts[23], parts[28]) != (
                    "t", "side", "template", "residual", "planned", "realized",
                    "on_beam", "com", "rewards"):
                raise fail(lineno, "field markers out of order")
            side = parts[4]
            if side not in ("left", "right"):
                raise fail(lineno, f"bad side {side!r}")
            idx = int(parts[0])
            t_val = float(parts[2])
            tmpl_pose = FootPose(*(float(v) for v in parts[6:9]))
            residual = Residual(*(float(v) for v in parts[10:13]))
            planned = FootPose(*(float(v) for v in parts[14:17]))
            realized = FootPose(*(float(v) for v in parts[18:21]))
            on_beam = parts[22]
            if on_beam not in ("0", "1"):
                raise fail(lineno, f"bad on_beam flag {on_beam!r}")
            com = CoMState(*(float(v) for v in parts[24:28]))
            reward_vals = [float(v) for v in parts[29:38]]
        except ValueError as exc:
            if isinstance(exc, TraceParseError):
                raise
            raise fail(lineno, f"bad number: {exc}") from exc
        if len(reward_vals) != 9:
            raise fail(lineno, "rewards needs 9 values")
        rewards = dict(zip(REWARD_KEYS, reward_vals[:8]))
        rewards["total"] = reward_vals[8]
        records.append(
            TransitionRecord(
                index=idx, t=t_val, side=side, template=tmpl_pose,
                residual=residual, planned=planned, realized=realized,
                on_beam=on_beam == "1", com=com, rewards=rewards,
            )
        )

    endno = 11 + n_records
    parts = expect(endno, "end")
    if len(parts) != 12 or (parts[1], parts[3], parts[5], parts[7]) != (
            "t", "steps", "max_com_x", "final_com"):
        raise fail(endno, "bad end summary")
    termination = parts[0]
    if termination not in TERMINATIONS:
        raise fail(endno, f"unknown termination {termination!r}")
    if int(parts[4]) != n_records:
        raise fail(endno, "step count disagrees with the records header")
    try:
        sim_time = float(parts[2])
        max_com_x = float(parts[6])
        final_com = CoMState(*(float(v) for v in parts[8:12]))
    except ValueError as exc:
        raise fail(endno, f"bad number: {exc}") from exc

    return EpisodeTrace(
        seed=seed, policy=policy, beam=beam,
        command=StepCommand(cvx, cvy, cyaw), template=template,
        noise=(noise[0], noise[1], noise[2]), start_y_offset=start_y,
        first_swing=first_swing, records=records, termination=termination,
        sim_time=sim_time, max_com_x=max_com_x, final_com=final_com,
    )


def _realized_breakdown(
    realized: FootPose,
    planned: FootPose,
    old_stance: FootPose,
    com_td: CoMState,
    x_prev_td: float,
    r: Residual,
    r_prev: Residual,
    on: bool,
    landing: Side,
    h: HeightField,
    center_y: float,
    omega0: float,
    weights: RewardWeights,
) -> dict[str, float]:
    """Weighted reward entries for a realized transition.

    Unlike the planning objective, progress here is the realized CoM advance
    between consecutive touchdowns, balance is scored on the realized
    extrapolated base position at the transition, and the tracking term is
    scored on the actual footfall against its commanded target.
    """
    outcome = StepOutcome(
        com_before=com_td,
        com_after=com_td,
        residual=r,
        target=planned,
        footfall=realized,
        contact_left=on and landing == "left",
        contact_right=on and landing == "right",
        schedule=1 if landing == "right" else -1,
    )
    terms = {
        "footstep_safety": weights.footstep_safety
        * footstep_safety(realized, h, weights.h_threshold, weights.patch_radius),
        "beam_balance": weights.beam_balance
        * beam_balance(com_td.y + com_td.vy / omega0, center_y, weights.sigma_balance),
        "forward": weights.forward * forward_progress(com_td.x, x_prev_td),
        "face_forward": weights.face_forward * face_forward(realized.psi),
        "feet_prox": weights.feet_prox
        * feet_proximity(realized, old_stance, weights.d_min_feet),
        "sched": weights.sched * schedule_tracking(outcome),
        "mag": weights.mag * -(r.dx**2 + r.dy**2 + r.dpsi**2),
        "smooth": weights.smooth
        * -((r.dx - r_prev.dx) ** 2 + (r.dy - r_prev.dy) ** 2 + (r.dpsi - r_prev.dpsi) ** 2),
    }
    terms["total"] = sum(terms.values())
    return terms


def run_episode(cfg: EpisodeConfig, policy: ResidualPolicy | None = None) -> EpisodeTrace:
    """Roll one episode to termination and return its trace.

    ``policy`` overrides the config's named variant; it is required for the
    "external" variant, whose residual recording cannot be defaulted.
    """
    if policy is None:
        policy = make_policy(cfg.policy)
    policy_name = getattr(policy, "name", cfg.policy)

    beam = cfg.beam
    h = make_beam_heightfield(beam)
    params = cfg.pendulum
    t_step = cfg.template.t_step
    noise = replace(cfg.touchdown_noise, seed=cfg.seed)

    com, left, right = cycle_start_state(
        cfg.template, cfg.command, params, cfg.first_swing, cfg.start_y_offset
    )
    stance_side: Side = other_side(cfg.first_swing)
    phase = GaitPhase(0.0, cfg.first_swing, t_step)
    r_prev = Residual()

    def stance_pose() -> FootPose:
        return left if stance_side == "left" else right

    def plan_next() -> tuple[FootPose, Residual, FootPose]:
        stance = stance_pose()
        target = propose_swing_target(com, cfg.command, phase, stance, params, cfg.template)
        t_rem = (1.0 - phase.phi) * t_step
        com_td = propagate(com, (stance.x, stance.y), params, t_rem)
        elevation = sample_from_heightfield(h, (com.x, com.y, stance.psi))
        angle = 2.0 * math.pi * phase.phi
        obs = PlannerObservation(
            com=com,
            body_heading=stance.psi,
            phase_feats=(math.sin(angle), math.cos(angle)),
            target_left=target if phase.swing_side == "left" else left,
            target_right=target if phase.swing_side == "right" else right,
            elevation=elevation,
        )
        ctx = StepContext(
            field_fn=h,
            stance=stance,
            swing_target=target,
            body_heading=stance.psi,
            beam_center_y=beam.centerline_y,
            com_touchdown=com_td,
            params=params,
            t_step=t_step,
            r_prev=r_prev,
        )
        objective = StepObjective(ctx, cfg.weights)
        r = plan_residual(obs, policy, objective, cfg.bounds)
        return target, r, compose(target, r, stance.psi)

    pending = plan_next()
    records: list[TransitionRecord] = []
    termination: Termination | None = None
    step_index = 0
    x_prev_td = com.x
    max_com_x = com.x
    t = 0.0
    tick = 0

    while termination is None:
        tick += 1
        t = tick * cfg.dt_fast
        stance = stance_pose()
        com = propagate(com, (stance.x, stance.y), params, cfg.dt_fast)
        phase, flipped = advance_phase(phase, cfg.dt_fast)
        if com.x > max_com_x:
            max_com_x = com.x

        if com.x >= beam.length:
            termination = "reached_end"
            break
        if (
            abs(com.y - stance.y) > DIVERGE_LATERAL
            or math.hypot(com.vx, com.vy) > DIVERGE_SPEED
        ):
            termination = "com_diverged"
            break

        if flipped:
            step_index += 1
            target, r, planned = pending
            realized = apply_touchdown(planned, noise, step_index)
            on = check_footfall(realized, beam)
            landing: Side = other_side(stance_side)
            rewards = _realized_breakdown(
                realized, planned, stance, com, x_prev_td, r, r_prev, on,
                landing, h, beam.centerline_y, params.omega0, cfg.weights,
            )
            records.append(
                TransitionRecord(
                    index=step_index, t=t, side=landing, template=target,
                    residual=r, planned=planned, realized=realized,
                    on_beam=on, com=com, rewards=rewards,
                )
            )
            if not on:
                termination = "footfall_off_beam"
                break
            if landing == "left":
                left = realized
            else:
                right = realized
            stance_side = landing
            x_prev_td = com.x
            r_prev = r
            if step_index >= cfg.max_steps:
                termination = "timeout"
                break
            pending = plan_next()

        if t >= cfg.max_time:
            termination = "timeout"
            break

    return EpisodeTrace(
        seed=cfg.seed,
        policy=policy_name,
        beam=beam,
        command=cfg.command,
        template=cfg.template,
        noise=(cfg.touchdown_noise.dx, cfg.touchdown_noise.dy, cfg.touchdown_noise.dpsi),
        start_y_offset=cfg.start_y_offset,
        first_swing=cfg.first_swing,
        records=records,
        termination=termination,
        sim_time=t,
        max_com_x=max_com_x,
        final_com=com,
    )

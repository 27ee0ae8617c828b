"""beamwalk: deterministic footstep planning and narrow-beam traversal simulation."""

from beamwalk.lipm import CoMState, PendulumParams, natural_frequency, orbital_energy, propagate, xcom
from beamwalk.template import FootPose, GaitPhase, StepCommand, TemplateConfig, propose_swing_target
from beamwalk.residual import Residual, ResidualBounds, apply_residual, compose, plan_residual, saturate
from beamwalk.window import ElevationWindow, PointCloud, WindowSpec, build_from_pointcloud, sample_from_heightfield
from beamwalk.rewards import RewardWeights, StepContext, StepObjective
from beamwalk.sim import BeamSpec, EpisodeConfig, EpisodeTrace, make_beam_heightfield, run_episode
from beamwalk.metrics import AggregateReport, TrialResult, aggregate, evaluate_trial, traversal_rate

__version__ = "0.1.0"

__all__ = [
    "CoMState",
    "PendulumParams",
    "natural_frequency",
    "orbital_energy",
    "propagate",
    "xcom",
    "FootPose",
    "GaitPhase",
    "StepCommand",
    "TemplateConfig",
    "propose_swing_target",
    "Residual",
    "ResidualBounds",
    "apply_residual",
    "compose",
    "plan_residual",
    "saturate",
    "ElevationWindow",
    "PointCloud",
    "WindowSpec",
    "build_from_pointcloud",
    "sample_from_heightfield",
    "RewardWeights",
    "StepContext",
    "StepObjective",
    "BeamSpec",
    "EpisodeConfig",
    "EpisodeTrace",
    "make_beam_heightfield",
    "run_episode",
    "AggregateReport",
    "TrialResult",
    "aggregate",
    "evaluate_trial",
    "traversal_rate",
]

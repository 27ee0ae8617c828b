"""Experiment files: INI text mapped onto episode and batch settings.

An experiment is methods x beams x trials.  Shared sections (``experiment``,
``template``, ``command``, ``weights``, ``episode``) set the scenario once;
each ``beam.NAME`` section adds a beam and each ``method.NAME`` section adds
a method (policy variant, residual bounds, touchdown noise).  Every failure
mode raises ConfigError with its own message so CLI output stays greppable.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from beamwalk.residual import ResidualBounds
from beamwalk.rewards import RewardWeights
from beamwalk.sim import POLICY_NAMES, BeamSpec, EpisodeConfig
from beamwalk.template import DisturbanceSpec, StepCommand, TemplateConfig


class ConfigError(ValueError):
    """An experiment file that cannot be used, with a one-line reason."""


@dataclass(frozen=True)
class MethodSpec:
    """One planning method: a residual policy plus its bounds and noise."""

    name: str
    policy: str = "zero"
    bounds: ResidualBounds = field(default_factory=ResidualBounds)
    noise: tuple[float, float, float] = (0.0, 0.0, 0.0)
    residual_file: str | None = None  # replay source, external policy only


@dataclass(frozen=True)
class ExperimentConfig:
    """A full batch: shared scenario plus the method and beam lists."""

    methods: tuple[MethodSpec, ...]
    beams: tuple[tuple[str, BeamSpec], ...]
    trials: int = 20
    seed_base: int = 0
    out_dir: str = "out"
    template: TemplateConfig = field(default_factory=TemplateConfig)
    command: StepCommand = field(default_factory=StepCommand)
    weights: RewardWeights = field(default_factory=RewardWeights)
    max_steps: int = 250
    max_time: float = 120.0
    dt_fast: float = 0.001
    start_y_offset: float = 0.0

    def __post_init__(self) -> None:
        if not self.methods:
            raise ConfigError("experiment defines no methods; add a [method.NAME] section")
        if not self.beams:
            raise ConfigError("experiment defines no beams; add a [beam.NAME] section")
        names = [m.name for m in self.methods]
        for name in names:
            if names.count(name) > 1:
                raise ConfigError(f"duplicate method name {name!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")

    def episode(self, method: MethodSpec, beam: BeamSpec, trial: int) -> EpisodeConfig:
        """The episode for one trial; the seed pairs trials across methods."""
        return EpisodeConfig(
            seed=self.seed_base + trial,
            beam=beam,
            command=self.command,
            template=self.template,
            bounds=method.bounds,
            weights=self.weights,
            policy=method.policy,
            touchdown_noise=DisturbanceSpec(*method.noise),
            max_steps=self.max_steps,
            max_time=self.max_time,
            dt_fast=self.dt_fast,
            start_y_offset=self.start_y_offset,
        )


_SHARED_SECTIONS = ("experiment", "template", "command", "weights", "episode")


def _floats(raw: str, n: int, where: str) -> tuple[float, ...]:
    parts = raw.split()
    if len(parts) != n:
        raise ConfigError(f"{where} needs {n} space-separated numbers, got {raw!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{where} is not numeric: {raw!r}") from None


class _Section:
    """One INI section with typed reads and leftover-key detection."""

    def __init__(self, name: str, items: dict[str, str]):
        self.name = name
        self.items = dict(items)

    def take(self, key: str) -> str | None:
        return self.items.pop(key, None)

    def take_float(self, key: str, default: float) -> float:
        raw = self.take(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} is not a number: {raw!r}") from None

    def take_int(self, key: str, default: int) -> int:
        raw = self.take(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key} is not an integer: {raw!r}") from None

    def finish(self) -> None:
        if self.items:
            unknown = ", ".join(sorted(self.items))
            raise ConfigError(f"unknown key(s) in [{self.name}]: {unknown}")


def _build_dataclass(section: _Section, cls, base):
    """Fill a flat float-field dataclass from a section, keeping defaults."""
    values = {}
    for f in fields(cls):
        if f.name in section.items:
            values[f.name] = section.take_float(f.name, 0.0)
    try:
        return replace(base, **values)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {exc}") from None


def _method_from(section: _Section, name: str) -> MethodSpec:
    policy = section.take("policy") or "zero"
    if policy not in POLICY_NAMES:
        raise ConfigError(
            f"[method.{name}] unknown policy {policy!r}; expected one of {', '.join(POLICY_NAMES)}"
        )
    raw_bounds = section.take("bounds")
    try:
        bounds = (
            ResidualBounds(*_floats(raw_bounds, 3, f"[method.{name}] bounds"))
            if raw_bounds is not None
            else ResidualBounds()
        )
    except ValueError as exc:
        raise ConfigError(f"[method.{name}] {exc}") from None
    raw_noise = section.take("noise")
    noise = (
        _floats(raw_noise, 3, f"[method.{name}] noise") if raw_noise is not None else (0.0, 0.0, 0.0)
    )
    if any(n < 0.0 for n in noise):
        raise ConfigError(f"[method.{name}] noise bounds must be non-negative, got {noise}")
    residual_file = section.take("residual_file")
    if policy == "external" and residual_file is None:
        raise ConfigError(f"[method.{name}] external policy needs a residual_file")
    section.finish()
    return MethodSpec(name=name, policy=policy, bounds=bounds, noise=noise, residual_file=residual_file)


def _beam_from(section: _Section, name: str) -> BeamSpec:
    base = BeamSpec()
    spec_values = {
        f.name: section.take_float(f.name, getattr(base, f.name)) for f in fields(BeamSpec)
    }
    section.finish()
    try:
        return BeamSpec(**spec_values)
    except ValueError as exc:
        raise ConfigError(f"[beam.{name}] {exc}") from None


def parse_config(text: str, origin: str = "<config>") -> ExperimentConfig:
    """Parse experiment INI text; raises ConfigError with a specific reason."""
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#",), strict=True
    )
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {origin}: {exc}") from None

    sections = {name: _Section(name, dict(parser.items(name))) for name in parser.sections()}
    methods: list[MethodSpec] = []
    beams: list[tuple[str, BeamSpec]] = []
    for name in parser.sections():
        if name in _SHARED_SECTIONS:
            continue
        kind, _, rest = name.partition(".")
        if kind == "method" and rest:
            methods.append(_method_from(sections[name], rest))
        elif kind == "beam" and rest:
            beams.append((rest, _beam_from(sections[name], rest)))
        else:
            raise ConfigError(f"unknown section [{name}] in {origin}")

    exp = sections.get("experiment", _Section("experiment", {}))
    trials = exp.take_int("trials", 20)
    seed_base = exp.take_int("seed_base", 0)
    out_dir = exp.take("out_dir") or "out"
    exp.finish()

    tmpl_sec = sections.get("template", _Section("template", {}))
    template = _build_dataclass(tmpl_sec, TemplateConfig, TemplateConfig())
    tmpl_sec.finish()

    cmd_sec = sections.get("command", _Section("command", {}))
    command = _build_dataclass(cmd_sec, StepCommand, StepCommand())
    cmd_sec.finish()

    w_sec = sections.get("weights", _Section("weights", {}))
    weights = _build_dataclass(w_sec, RewardWeights, RewardWeights())
    w_sec.finish()

    ep = sections.get("episode", _Section("episode", {}))
    max_steps = ep.take_int("max_steps", 250)
    max_time = ep.take_float("max_time", 120.0)
    dt_fast = ep.take_float("dt_fast", 0.001)
    start_y_offset = ep.take_float("start_y_offset", 0.0)
    ep.finish()

    try:
        exp_cfg = ExperimentConfig(
            methods=tuple(methods),
            beams=tuple(beams),
            trials=trials,
            seed_base=seed_base,
            out_dir=out_dir,
            template=template,
            command=command,
            weights=weights,
            max_steps=max_steps,
            max_time=max_time,
            dt_fast=dt_fast,
            start_y_offset=start_y_offset,
        )
        # one probe episode surfaces cross-field problems (dt vs step period,
        # step caps) at load time with the engine's own messages
        exp_cfg.episode(exp_cfg.methods[0], exp_cfg.beams[0][1], 0)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid experiment settings in {origin}: {exc}") from None
    return exp_cfg


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and parse an experiment file from disk."""
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from None
    return parse_config(text, origin=str(p))

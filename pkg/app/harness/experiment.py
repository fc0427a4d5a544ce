"""Experiment configuration: variants, module configs and the key-value loader."""
import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from app.env.merge_env import EnvConfig
from app.env.observation import StyleChannel
from app.env.rewards import RewardWeights
from app.rl.dqn import DqnConfig
from app.rl.ppo import PpoConfig
from app.safety.controller import SafetyConfig
from app.traffic.road import DemandProfile, RoadConfig, StyleRanges, TrafficConfig
from app.utils.config import build_dataclass, dataclass_from_dict, dataclass_to_dict, parse_value, read_key_values
from app.utils.logger import logger


class Variant(str, Enum):
    BASELINE = "baseline"
    L3IS = "l3is"
    AL3IS = "al3is"
    L3IS_UNDER_DELAY = "l3is_under_delay"


@dataclass
class InferenceConfig:
    window: int = 10
    sample_every: int = 5
    n_episodes: int = 1000
    epochs: int = 200
    lr: float = 0.01
    batch_size: int = 256
    patience: int = 20
    hidden_sizes: tuple[int, ...] = (64, 64)
    rebalance_share: float = 0.55

    def __post_init__(self):
        if self.window < 1 or self.sample_every < 1:
            raise ValueError("window and sample_every must be positive")
        if not 0.5 <= self.rebalance_share < 1.0:
            raise ValueError("rebalance_share must lie in [0.5, 1)")


@dataclass
class DelayConfig:
    sweep_delays: tuple[float, ...] = (1.0, 2.0, 3.0, 10.0, 15.0)
    retrain_under_delay: bool = False

    def __post_init__(self):
        if any(delay <= 0 for delay in self.sweep_delays):
            raise ValueError("Sweep delays must be positive")


@dataclass
class ExperimentConfig:
    variant: Variant = Variant.L3IS
    delay_seconds: float = 0.0
    training_steps: int = 360000
    eval_episodes: int = 1000
    seeds: tuple[int, ...] = (0, 1, 2)
    eval_interval: int = 20000
    curve_episodes: int = 20
    use_safety: Optional[bool] = None
    use_inference: Optional[bool] = None
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    env: EnvConfig = field(default_factory=EnvConfig)
    reward: RewardWeights = field(default_factory=RewardWeights)
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    dqn: DqnConfig = field(default_factory=DqnConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    delay: DelayConfig = field(default_factory=DelayConfig)

    def __post_init__(self):
        if self.variant in (Variant.AL3IS, Variant.L3IS_UNDER_DELAY) and self.delay_seconds <= 0:
            raise ValueError(f"Variant {self.variant.value} requires delay_seconds > 0")
        if self.delay_seconds < 0:
            raise ValueError("delay_seconds must be non-negative")
        if self.training_steps < 0:
            raise ValueError("training_steps must be non-negative")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be at least 1")
        if not self.seeds:
            raise ValueError("At least one seed is required")
        if self.eval_interval < 1 or self.curve_episodes < 1:
            raise ValueError("eval_interval and curve_episodes must be positive")
        if abs(self.safety.dt - self.traffic.road.dt) > 1e-12:
            raise ValueError(f"safety.dt ({self.safety.dt}) must equal road.dt ({self.traffic.road.dt})")

    @property
    def safety_enabled(self):
        return self.use_safety if self.use_safety is not None else self.variant is not Variant.BASELINE

    @property
    def inference_enabled(self):
        return self.use_inference if self.use_inference is not None else self.variant is not Variant.BASELINE

    @property
    def augment(self):
        return self.variant is Variant.AL3IS

    @property
    def training_delay(self):
        """Delay seen while training: only AL3IS (or an explicit retrain) learns under delay"""
        if self.variant is Variant.AL3IS:
            return self.delay_seconds
        if self.variant is Variant.L3IS_UNDER_DELAY and self.delay.retrain_under_delay:
            return self.delay_seconds
        return 0.0

    @property
    def eval_delay(self):
        if self.variant in (Variant.AL3IS, Variant.L3IS_UNDER_DELAY):
            return self.delay_seconds
        return 0.0

    @property
    def style_channel(self):
        return StyleChannel.ESTIMATE if self.inference_enabled else StyleChannel.ZERO

    def with_overrides(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclass_to_dict(self)

    def config_hash(self):
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


SECTIONS = {
    "road": RoadConfig,
    "demand": DemandProfile,
    "style": StyleRanges,
    "env": EnvConfig,
    "reward": RewardWeights,
    "safety": SafetyConfig,
    "ppo": PpoConfig,
    "dqn": DqnConfig,
    "inference": InferenceConfig,
    "delay": DelayConfig,
}
NESTED_FIELDS = {"traffic", "env", "reward", "safety", "ppo", "dqn", "inference", "delay"}


def build_experiment_config(sections, overrides=None):
    """Assemble an ExperimentConfig from parsed key-value sections

    Args:
        sections (dict): Output of ``read_key_values``
        overrides (dict|None): Typed top-level experiment fields that win over the file

    Returns:
        ExperimentConfig
    """
    unknown = sorted(set(sections) - set(SECTIONS) - {"experiment"})
    if unknown:
        logger.error(f"Unknown config sections: {unknown}")
        raise ValueError(f"Unknown config sections: {', '.join(unknown)}")
    built = {name: build_dataclass(cls, sections.get(name), name) for name, cls in SECTIONS.items()}

    flat = dict(sections.get("experiment", {}))
    hints = typing.get_type_hints(ExperimentConfig)
    allowed = {f.name for f in dataclasses.fields(ExperimentConfig)} - NESTED_FIELDS
    rejected = sorted(set(flat) - allowed)
    if rejected:
        logger.error(f"Unknown config keys in section 'experiment': {rejected}")
        raise ValueError(f"Unknown config keys in section 'experiment': {', '.join(rejected)}")
    kwargs = {}
    for key, raw in flat.items():
        try:
            kwargs[key] = parse_value(raw, hints[key])
        except ValueError as e:
            raise ValueError(f"Invalid value for experiment.{key}: {str(e)}")
    kwargs.update({key: value for key, value in (overrides or {}).items() if value is not None})

    safety = built["safety"]
    if "dt" not in sections.get("safety", {}):
        safety = dataclasses.replace(safety, dt=built["road"].dt)
    return ExperimentConfig(
        **kwargs,
        traffic=TrafficConfig(road=built["road"], demand=built["demand"], styles=built["style"]),
        env=built["env"], reward=built["reward"], safety=safety, ppo=built["ppo"], dqn=built["dqn"],
        inference=built["inference"], delay=built["delay"],
    )


def load_experiment_config(path=None, **overrides):
    """Read a key-value config file (plus MERGE_LAB_* overrides) into an ExperimentConfig

    Args:
        path (str|None): Config file; None starts from the defaults
        **overrides: Top-level ExperimentConfig fields set by the caller (CLI flags)

    Returns:
        ExperimentConfig
    """
    cfg = build_experiment_config(read_key_values(path), overrides)
    logger.info(f"Experiment config loaded ({cfg.variant.value}, delay {cfg.delay_seconds}s, "
                f"hash {cfg.config_hash()[:12]})")
    return cfg


def experiment_from_dict(values):
    """Rebuild an ExperimentConfig stored with ``to_dict`` (run manifests, checkpoints)"""
    traffic = values.get("traffic", {})
    nested = {
        "traffic": TrafficConfig(
            road=dataclass_from_dict(RoadConfig, traffic.get("road", {})),
            demand=dataclass_from_dict(DemandProfile, traffic.get("demand", {})),
            styles=dataclass_from_dict(StyleRanges, traffic.get("styles", {})),
        ),
    }
    for name, cls in (("env", EnvConfig), ("reward", RewardWeights), ("safety", SafetyConfig), ("ppo", PpoConfig),
                      ("dqn", DqnConfig), ("inference", InferenceConfig), ("delay", DelayConfig)):
        nested[name] = dataclass_from_dict(cls, values.get(name, {}))
    flat = {key: value for key, value in values.items() if key not in NESTED_FIELDS}
    experiment = dataclass_from_dict(ExperimentConfig, {**flat, **nested})
    return experiment

"""On-ramp merging POMDP on top of the traffic world."""
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from app.env.observation import EgoObservation, ObservationLayout, StyleChannel, observe
from app.env.rewards import RewardWeights, lc_reward, lk_reward
from app.safety.controller import (SafetyConfig, SafetyController, SafetySource, view_from_observation,
                                   view_from_world)
from app.traffic.road import EgoCommand, TrafficConfig
from app.traffic.world import EGO_ID, World
from app.utils.logger import logger

TRACE_COLUMNS = ["t", "x", "lane", "v", "accel", "lane_change", "intervention", "r_lk", "r_lc", "terminal"]


class LaneChange(str, Enum):
    KEEP = "keep"
    CHANGE = "change"


class Terminal(str, Enum):
    CONTINUE = "continue"
    ARRIVED = "arrived"
    COLLIDED = "collided"
    TIMEOUT = "timeout"


@dataclass
class EgoAction:
    accel: float = 0.0
    lane_change: LaneChange = LaneChange.KEEP


@dataclass
class EnvConfig:
    radius: float = 50.0
    behind_slots: int = 2
    ahead_slots: int = 2
    warmup_seconds: float = 20.0
    ego_init_speed: float = 8.0
    max_steps: int = 600
    a_min_mag: float = 4.5
    a_max: float = 2.6
    style_channel: StyleChannel = StyleChannel.ZERO
    max_insertion_wait_steps: int = 600
    history_len: int = 20
    record_trace: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.a_min_mag <= 0 or self.a_max <= 0:
            raise ValueError("Action bounds must be positive magnitudes")


@dataclass
class StepOutcome:
    obs: object
    r_lk: float
    r_lc: float
    terminal: Terminal
    t: int
    info: dict = field(default_factory=dict)

    @property
    def done(self):
        return self.terminal is not Terminal.CONTINUE


class MergeEnv:
    """Episode lifecycle, observation model and rewards of the merging task

    Args:
        traffic (TrafficConfig): Road, demand and style ranges
        config (EnvConfig): Episode and observation settings
        weights (RewardWeights): Reward hyperparameters
        safety (SafetyConfig|None): Enables the safety filter when given
        estimator: Style estimator used when ``config.style_channel`` is ESTIMATE
        seed (int): Default seed for ``reset``
    """

    def __init__(self, traffic: TrafficConfig = None, config: EnvConfig = None, weights: RewardWeights = None,
                 safety: SafetyConfig = None, estimator=None, seed=0):
        self.traffic = traffic or TrafficConfig()
        self.config = config or EnvConfig()
        self.weights = weights or RewardWeights()
        self.layout = ObservationLayout(self.traffic.road, self.config.radius,
                                        self.config.behind_slots, self.config.ahead_slots)
        self.safety = SafetyController(safety, self.traffic.road) if safety is not None else None
        self.estimator = estimator
        self.seed = seed
        self.world = None
        self.t = 0
        self.done = True
        self.last_obs = None
        self.info = {}
        self.trace_rows = []

    @property
    def observation_size(self):
        return self.layout.size

    @property
    def road(self):
        return self.traffic.road

    @property
    def on_ramp(self):
        ego = self.world.ego if self.world is not None else None
        return ego is not None and ego.lane == self.road.ramp_lane

    def observe(self) -> EgoObservation:
        return observe(self.world, self.layout, self.config.style_channel, self.estimator)

    def reset(self, seed=None) -> EgoObservation:
        """Start an episode: warm up traffic, insert the ego, return the first observation"""
        seed = self.seed if seed is None else seed
        history_len = max(self.config.history_len, getattr(self.estimator, "window", 0))
        self.world = World(self.traffic.road, self.traffic.demand, self.traffic.styles, seed=seed,
                           history_len=history_len, record_trajectory=False)
        self.world.warmup(self.config.warmup_seconds)

        waited = 0
        while not self.world.ramp_entry_clear():
            if waited >= self.config.max_insertion_wait_steps:
                raise RuntimeError(f"Ramp entry stayed blocked for {waited} steps")
            self.world.step(None)
            waited += 1
        if waited:
            logger.info(f"Ego insertion deferred by {waited} steps (seed {seed})")

        self.world.insert_ego(self.config.ego_init_speed)
        self.t = 0
        self.done = False
        self.trace_rows = []
        if self.safety is not None:
            self.safety.interventions = 0
        self.info = {"seed": seed, "insertion_delay_steps": waited}
        self.last_obs = self.observe()
        return self.last_obs

    def step(self, action: EgoAction, safety_obs=None) -> StepOutcome:
        """Apply one (possibly safety-corrected) action

        Args:
            action (EgoAction): Agents' combined action
            safety_obs (EgoObservation|None): Observation the filter should trust; defaults
                to the latest observation of this env

        Returns:
            StepOutcome
        """
        if self.done:
            raise RuntimeError("Episode finished; call reset() before stepping again")
        if not math.isfinite(action.accel):
            logger.error(f"Non-finite acceleration {action.accel}")
            raise ValueError("Acceleration must be finite")

        accel = float(np.clip(action.accel, -self.config.a_min_mag, self.config.a_max))
        lane_change = action.lane_change is LaneChange.CHANGE
        ego = self.world.ego
        intervened = False
        if self.safety is not None:
            if self.safety.cfg.source is SafetySource.FRESH:
                view = view_from_world(self.world, ego)
            else:
                view = view_from_observation(safety_obs if safety_obs is not None else self.last_obs,
                                             ego, self.road)
            decision = self.safety.filter(accel, lane_change, ego, view)
            accel, lane_change, intervened = decision.accel, decision.lane_change, decision.intervened

        # Arrival counts only for an ego that started the step on a main lane
        was_merged = self.road.is_main_lane(ego.lane)
        self.world.step(EgoCommand(accel=accel, lane_change=lane_change))
        self.t += 1

        ego = self.world.ego
        collided = self.world.detect_collision(involving=EGO_ID) is not None
        arrived = (not collided) and was_merged and ego.x >= self.road.main_length
        if collided:
            terminal = Terminal.COLLIDED
        elif arrived:
            terminal = Terminal.ARRIVED
        elif self.t >= self.config.max_steps:
            terminal = Terminal.TIMEOUT
        else:
            terminal = Terminal.CONTINUE
        self.done = terminal is not Terminal.CONTINUE

        r_lk = lk_reward(accel, collided, arrived, self.weights)
        r_lc = lc_reward(collided, arrived, self.weights)
        self.last_obs = self.observe()
        info = {
            "intervention": intervened,
            "executed_accel": accel,
            "executed_lane_change": lane_change,
            "merged": self.world.last_lane_change is not None,
            "on_ramp": ego.lane == self.road.ramp_lane,
        }
        if self.config.record_trace:
            self.trace_rows.append((self.t, ego.x, ego.lane, ego.v, accel, int(lane_change), int(intervened),
                                    r_lk, r_lc, terminal.value))
        if self.done:
            logger.debug(f"Episode (seed {self.info.get('seed')}) ended {terminal.value} after {self.t} steps")
        return StepOutcome(self.last_obs, r_lk, r_lc, terminal, self.t, info)

    def export_trace_csv(self, path):
        """Write the per-step episode trace recorded with ``record_trace``"""
        frame = pd.DataFrame(self.trace_rows, columns=TRACE_COLUMNS)
        frame.to_csv(path, index=False, float_format="%.6f")
        return path

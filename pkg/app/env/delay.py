"""Constant observation delay: delayed observation plus the actions taken since."""
from collections import deque
from dataclasses import dataclass

import numpy as np

from app.env.merge_env import EgoAction, LaneChange, MergeEnv, StepOutcome
from app.env.observation import EgoObservation
from app.utils.logger import logger


def k_steps_for(delay_seconds, dt):
    """Quantize a delay in seconds to whole simulation steps"""
    if delay_seconds < 0:
        raise ValueError("Delay must be non-negative")
    return int(round(delay_seconds / dt))


def encode_action(action: EgoAction, accel_scale):
    return np.array([action.accel / accel_scale, 1.0 if action.lane_change is LaneChange.CHANGE else 0.0])


@dataclass
class AugmentedState:
    delayed_obs: EgoObservation
    action_history: np.ndarray

    def vector(self):
        return np.concatenate([self.delayed_obs.vector(), self.action_history])

    def __len__(self):
        return len(self.delayed_obs) + self.action_history.size


class DelayBuffer:
    """FIFO of the last k+1 observations and the last k actions"""

    def __init__(self, k_steps, accel_scale=4.5):
        if k_steps < 0:
            raise ValueError("k_steps must be non-negative")
        self.k_steps = k_steps
        self.accel_scale = accel_scale
        self.obs_queue = deque(maxlen=k_steps + 1)
        self.action_queue = deque(maxlen=k_steps)

    def reset(self):
        self.obs_queue.clear()
        self.action_queue.clear()

    def augmented_length(self, obs_length):
        return obs_length + 2 * self.k_steps

    def history_vector(self):
        history = np.zeros(2 * self.k_steps)
        for idx, encoded in enumerate(self.action_queue):
            history[2 * idx:2 * idx + 2] = encoded
        return history

    def push_and_observe(self, current_obs: EgoObservation, last_action: EgoAction = None) -> AugmentedState:
        """Enqueue the newest observation and the action that led to it

        Returns:
            AugmentedState: observation from k pushes ago (the first observation while
            fewer than k+1 were pushed) and the actions taken since, zero-padded
        """
        if last_action is not None and self.k_steps > 0:
            self.action_queue.append(encode_action(last_action, self.accel_scale))
        self.obs_queue.append(current_obs)
        return AugmentedState(self.obs_queue[0], self.history_vector())


def reset_buffer(buffer: DelayBuffer):
    buffer.reset()


def push_and_observe(buffer: DelayBuffer, current_obs, last_action=None):
    return buffer.push_and_observe(current_obs, last_action)


class DelayedMergeEnv:
    """Wraps MergeEnv so that agents (and the observed-mode safety filter) see s_{t-k}

    Args:
        env (MergeEnv): Environment to wrap
        delay_seconds (float): Observation delay; quantized with the road's dt
        augment (bool): Emit AugmentedState (delayed obs + action history) when True,
            only the delayed observation when False
    """

    def __init__(self, env: MergeEnv, delay_seconds=0.0, augment=True):
        self.env = env
        self.augment = augment
        self.k_steps = k_steps_for(delay_seconds, env.road.dt)
        self.buffer = DelayBuffer(self.k_steps, accel_scale=env.config.a_min_mag)
        self.current = None
        logger.info(f"Observation delay {delay_seconds}s -> {self.k_steps} steps (augment={augment})")

    @property
    def observation_size(self):
        if self.augment:
            return self.buffer.augmented_length(self.env.observation_size)
        return self.env.observation_size

    @property
    def on_ramp(self):
        return self.env.on_ramp

    @property
    def world(self):
        return self.env.world

    @property
    def info(self):
        return self.env.info

    def _emit(self, augmented: AugmentedState):
        self.current = augmented
        return augmented if self.augment else augmented.delayed_obs

    def reset(self, seed=None):
        obs = self.env.reset(seed)
        self.buffer.reset()
        return self._emit(self.buffer.push_and_observe(obs))

    def step(self, action: EgoAction) -> StepOutcome:
        outcome = self.env.step(action, safety_obs=self.current.delayed_obs)
        # The ego knows what it actually executed, filter corrections included
        executed = EgoAction(
            accel=outcome.info["executed_accel"],
            lane_change=LaneChange.CHANGE if outcome.info["executed_lane_change"] else LaneChange.KEEP,
        )
        delayed = self.buffer.push_and_observe(outcome.obs, executed)
        outcome.obs = self._emit(delayed)
        return outcome

"""The merging agent bundle (LK + LC policies, optional style classifier) and env construction."""
import dataclasses

import numpy as np

from app.env.delay import DelayedMergeEnv
from app.env.merge_env import EgoAction, LaneChange, MergeEnv
from app.env.observation import ObservationLayout
from app.inference.classifier import StyleClassifier, StyleEstimator
from app.rl.checkpoint import load_checkpoint, save_checkpoint
from app.rl.dqn import DqnAgent
from app.rl.ppo import PpoAgent
from app.utils.logger import logger

LC_ACTIONS = (LaneChange.KEEP, LaneChange.CHANGE)


def build_env(cfg, estimator=None, delay_seconds=0.0, augment=False, seed=0):
    """MergeEnv for an experiment config, always behind the delay wrapper (k = 0 is the identity)

    Args:
        cfg (ExperimentConfig): Experiment settings
        estimator (StyleEstimator|None): Required when the config enables inference
        delay_seconds (float): Observation delay
        augment (bool): Emit augmented states (AL3IS input)
        seed (int): Default episode seed
    """
    if cfg.inference_enabled and estimator is None:
        raise ValueError("The experiment enables style inference but no estimator was supplied")
    env_cfg = dataclasses.replace(cfg.env, style_channel=cfg.style_channel)
    env = MergeEnv(cfg.traffic, env_cfg, cfg.reward, safety=cfg.safety if cfg.safety_enabled else None,
                   estimator=estimator, seed=seed)
    return DelayedMergeEnv(env, delay_seconds=delay_seconds, augment=augment)


def input_scale(layout: ObservationLayout, input_size):
    """Scale vector for raw observations, padded with ones for the (already scaled) action history"""
    base = layout.scale_vector()
    if input_size < base.size:
        raise ValueError(f"Input size {input_size} is smaller than the observation ({base.size})")
    return np.concatenate([base, np.ones(input_size - base.size)])


class MergeAgent:
    """LK (PPO) and LC (DQN) policies sharing one scaled input vector

    Args:
        input_size (int): Length of the raw state vector
        scale (np.ndarray): Per-entry input multipliers
        ppo_cfg (PpoConfig): LK hyperparameters
        dqn_cfg (DqnConfig): LC hyperparameters
        rng: numpy Generator
        bounds (tuple): Acceleration bounds
        classifier (StyleClassifier|None): Style classifier travelling with the checkpoint
    """

    def __init__(self, input_size, scale, ppo_cfg=None, dqn_cfg=None, rng=None, bounds=(-4.5, 2.6),
                 classifier: StyleClassifier = None):
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.input_size = input_size
        self.scale = np.asarray(scale, dtype=float)
        if self.scale.shape != (input_size,):
            raise ValueError(f"Scale vector has shape {self.scale.shape}, expected ({input_size},)")
        self.bounds = bounds
        self.lk = PpoAgent(input_size, ppo_cfg, self.rng, bounds)
        self.lc = DqnAgent(input_size, dqn_cfg, self.rng)
        self.classifier = classifier

    def features(self, state):
        raw = state.vector() if hasattr(state, "vector") else state
        raw = np.asarray(raw, dtype=float)
        if raw.shape != (self.input_size,):
            logger.error(f"Agent expected {self.input_size} inputs, got {raw.shape}")
            raise ValueError(f"Agent expected {self.input_size} inputs, got {raw.shape}")
        return raw * self.scale

    def estimator(self):
        return StyleEstimator(self.classifier) if self.classifier is not None else None

    def __call__(self, state, on_ramp):
        """Deterministic evaluation policy: LK mean, greedy LC while on the ramp"""
        x = self.features(state)
        accel = self.lk.act(x, training=False)[0]
        lane_change = LC_ACTIONS[self.lc.act(x, training=False)] if on_ramp else LaneChange.KEEP
        return EgoAction(accel=accel, lane_change=lane_change)

    def save(self, path, meta=None):
        arrays = {**self.lk.to_arrays(), **self.lc.to_arrays(), "agent.scale": self.scale}
        if self.classifier is not None:
            arrays.update(self.classifier.to_arrays())
        meta = dict(meta or {})
        meta.update({"kind": "merge_agent", "input_size": self.input_size, "bounds": list(self.bounds),
                     "has_classifier": self.classifier is not None})
        return save_checkpoint(path, arrays, meta)

    @classmethod
    def load(cls, path, ppo_cfg=None, dqn_cfg=None):
        """Restore an agent; returns (agent, meta)"""
        arrays, meta = load_checkpoint(path)
        if meta.get("kind") != "merge_agent":
            raise ValueError(f"{path} does not hold a merging agent")
        try:
            agent = cls.__new__(cls)
            agent.rng = np.random.default_rng(0)
            agent.input_size = int(meta["input_size"])
            agent.scale = np.array(arrays["agent.scale"], dtype=float)
            agent.bounds = tuple(meta["bounds"])
            agent.lk = PpoAgent(agent.input_size, ppo_cfg, agent.rng, agent.bounds)
            agent.lk.load_arrays(arrays)
            agent.lc = DqnAgent(agent.input_size, dqn_cfg, agent.rng)
            agent.lc.load_arrays(arrays)
            agent.classifier = StyleClassifier.from_arrays(arrays) if meta.get("has_classifier") else None
        except KeyError as e:
            logger.error(f"Error in MergeAgent.load: missing entry {str(e)}")
            raise ValueError(f"Checkpoint {path} is missing entry {str(e)}")
        if agent.lk.actor.input_size != agent.input_size:
            raise ValueError(f"Checkpoint {path} has inconsistent input sizes")
        return agent, meta

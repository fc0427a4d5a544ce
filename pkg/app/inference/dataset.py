"""Labelled driving-style samples collected with a random ego policy."""
import dataclasses
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from app.env.merge_env import EgoAction, EnvConfig, LaneChange, MergeEnv
from app.env.observation import StyleChannel
from app.traffic.road import DrivingStyle, TrafficConfig
from app.traffic.world import EGO_ID, World
from app.utils.logger import logger

FEATURES_PER_STEP = 4   # (rel x, rel v, leader gap, v)
GAP_CAP = 100.0
LABELS = {DrivingStyle.AGGRESSIVE: 0, DrivingStyle.COOPERATIVE: 1}
SPLITS = ("train", "val", "test")


def feature_columns(window):
    return [f"f{idx}" for idx in range(window * FEATURES_PER_STEP)]


def vehicle_features(world: World, vehicle_id, window):
    """Flattened kinematic window of one vehicle relative to the ego

    Returns:
        np.ndarray|None: Shape (window * 4,), or None while either history is shorter than ``window``
    """
    ego_hist = world.history.get(EGO_ID)
    veh_hist = world.history.get(vehicle_id)
    if ego_hist is None or veh_hist is None or len(ego_hist) < window or len(veh_hist) < window:
        return None
    ego_rows = list(ego_hist)[-window:]
    veh_rows = list(veh_hist)[-window:]
    features = np.empty((window, FEATURES_PER_STEP))
    for idx, ((ego_x, ego_v, _), (x, v, gap)) in enumerate(zip(ego_rows, veh_rows)):
        features[idx] = (x - ego_x, v - ego_v, GAP_CAP if math.isinf(gap) else min(gap, GAP_CAP), v)
    return features.ravel()


@dataclass
class StyleDataset:
    """Samples with one row per (episode, vehicle, step) and a split column"""
    frame: pd.DataFrame
    window: int = 10

    def __len__(self):
        return len(self.frame)

    @property
    def columns(self):
        return feature_columns(self.window)

    def split(self, name):
        if name not in SPLITS:
            raise ValueError(f"Unknown split: {name}")
        part = self.frame[self.frame["split"] == name]
        return part[self.columns].to_numpy(dtype=np.float32), part["label"].to_numpy(dtype=int)

    def class_balance(self):
        if len(self.frame) == 0:
            return 0.0
        return float(self.frame["label"].mean())

    def to_csv(self, path):
        self.frame.to_csv(path, index=False, float_format="%.6f")
        logger.info(f"Style dataset ({len(self.frame)} samples) written to {path}")
        return path

    @classmethod
    def from_csv(cls, path, window=10):
        frame = pd.read_csv(path)
        missing = [col for col in ["split", "label", *feature_columns(window)] if col not in frame.columns]
        if missing:
            raise ValueError(f"Style dataset {path} lacks columns: {missing[:5]}")
        return cls(frame, window)

    @classmethod
    def from_arrays(cls, features, labels, splits, window=None):
        features = np.asarray(features, dtype=np.float32)
        window = window or features.shape[1] // FEATURES_PER_STEP
        if features.shape[1] != window * FEATURES_PER_STEP:
            raise ValueError(f"Feature width {features.shape[1]} does not match window {window}")
        frame = pd.DataFrame(features, columns=feature_columns(window))
        frame["label"] = np.asarray(labels, dtype=int)
        frame["split"] = list(splits)
        frame["episode"] = -1
        return cls(frame, window)


def split_episodes(n_episodes, rng, fractions=(0.8, 0.1, 0.1)):
    """Assign whole episodes to train/val/test"""
    order = rng.permutation(n_episodes)
    n_val = int(round(fractions[1] * n_episodes)) if n_episodes >= 3 else 0
    n_test = int(round(fractions[2] * n_episodes)) if n_episodes >= 3 else 0
    n_val, n_test = max(n_val, 1 if n_episodes >= 3 else 0), max(n_test, 1 if n_episodes >= 3 else 0)
    assignment = {}
    for pos, episode in enumerate(order):
        if pos < n_test:
            assignment[int(episode)] = "test"
        elif pos < n_test + n_val:
            assignment[int(episode)] = "val"
        else:
            assignment[int(episode)] = "train"
    return assignment


def rebalance(frame, rng, max_share=0.55):
    """Downsample the majority label so that it holds at most ``max_share`` of each split"""
    parts = []
    for name in SPLITS:
        part = frame[frame["split"] == name]
        counts = part["label"].value_counts()
        if len(counts) < 2:
            parts.append(part)
            continue
        minority = int(counts.min())
        majority_label = int(counts.idxmax())
        allowed = int(math.floor(minority * max_share / (1.0 - max_share)))
        majority = part[part["label"] == majority_label]
        if len(majority) > allowed:
            keep = rng.choice(len(majority), size=allowed, replace=False)
            majority = majority.iloc[np.sort(keep)]
        parts.append(pd.concat([part[part["label"] != majority_label], majority]))
    return pd.concat(parts).sort_index()


def random_action(rng, env_cfg: EnvConfig):
    accel = rng.uniform(-env_cfg.a_min_mag, env_cfg.a_max)
    lane_change = LaneChange.CHANGE if rng.random() < 0.5 else LaneChange.KEEP
    return EgoAction(accel=accel, lane_change=lane_change)


def collect_episode(env: MergeEnv, episode, seed, rng, window, sample_every):
    rows = []
    env.reset(seed=seed)
    radius = env.layout.radius
    done = False
    while not done:
        world = env.world
        if world.steps % sample_every == 0:
            ego = world.ego
            for veh in world.surrounding():
                label = LABELS.get(veh.style)
                if label is None or abs(veh.x - ego.x) > radius:
                    continue
                features = vehicle_features(world, veh.id, window)
                if features is None:
                    continue
                rows.append((episode, veh.id, world.steps, label, *features))
        done = env.step(random_action(rng, env.config)).done
    return rows


def generate_dataset(n_episodes, seed=0, traffic: TrafficConfig = None, env_cfg: EnvConfig = None, window=10,
                     sample_every=5, rebalance_share=0.55):
    """Run random-policy episodes and label every nearby vehicle's feature window

    Args:
        n_episodes (int): Number of episodes
        seed (int): Seeds both the policy and the per-episode traffic
        traffic (TrafficConfig): Traffic to sample from
        env_cfg (EnvConfig): Base environment settings; the style channel is forced to true labels
        window (int): Steps per feature window
        sample_every (int): Sampling stride in steps

    Returns:
        StyleDataset
    """
    if n_episodes <= 0:
        logger.error(f"generate_dataset called with n_episodes={n_episodes}")
        raise ValueError("Dataset generation needs at least one episode")
    env_cfg = dataclasses.replace(env_cfg or EnvConfig(), style_channel=StyleChannel.TRUE_LABEL,
                                  history_len=max((env_cfg or EnvConfig()).history_len, window))
    env = MergeEnv(traffic or TrafficConfig(), env_cfg, seed=seed)
    rng = np.random.default_rng(seed)

    rows = []
    for episode in range(n_episodes):
        rows.extend(collect_episode(env, episode, seed + episode, rng, window, sample_every))
    frame = pd.DataFrame(rows, columns=["episode", "vehicle_id", "step", "label", *feature_columns(window)])
    frame[feature_columns(window)] = frame[feature_columns(window)].astype(np.float32)

    assignment = split_episodes(n_episodes, rng)
    frame["split"] = frame["episode"].map(assignment)
    frame = frame.iloc[rng.permutation(len(frame))].reset_index(drop=True)
    frame = rebalance(frame, rng, rebalance_share).reset_index(drop=True)
    logger.info(f"Generated {len(frame)} style samples from {n_episodes} episodes "
                f"(cooperative share {frame['label'].mean() if len(frame) else 0:.3f})")
    return StyleDataset(frame, window)

"""Training pipeline: optional style classifier, then joint LK/LC learning per seed."""
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from app.env.merge_env import EgoAction, Terminal
from app.harness.agent import LC_ACTIONS, MergeAgent, build_env, input_scale
from app.harness.evaluation import quick_eval
from app.harness.experiment import ExperimentConfig
from app.inference.classifier import StyleClassifier, StyleEstimator, train_classifier
from app.inference.dataset import generate_dataset
from app.rl.replay import Transition
from app.utils.logger import logger

CURVE_COLUMNS = ["step", "avg_reward", "success_rate", "collision_rate"]


@dataclass
class SeedRun:
    seed: int
    checkpoint: str
    curve: pd.DataFrame
    classifier_accuracy: float = None


@dataclass
class TrainingReport:
    runs: list = field(default_factory=list)

    @property
    def checkpoints(self):
        return {run.seed: run.checkpoint for run in self.runs}

    @property
    def classifiers(self):
        return {run.seed: MergeAgent.load(run.checkpoint)[0].classifier for run in self.runs}

    def curve(self):
        frames = [run.curve.assign(seed=run.seed) for run in self.runs]
        if not frames:
            return pd.DataFrame(columns=["seed", *CURVE_COLUMNS])
        return pd.concat(frames, ignore_index=True)[["seed", *CURVE_COLUMNS]]


def train_style_classifier(cfg: ExperimentConfig, seed):
    """Generate random-policy data and fit the style classifier for one seed"""
    inf = cfg.inference
    dataset = generate_dataset(inf.n_episodes, seed=seed, traffic=cfg.traffic, env_cfg=cfg.env, window=inf.window,
                               sample_every=inf.sample_every, rebalance_share=inf.rebalance_share)
    return train_classifier(dataset, epochs=inf.epochs, lr=inf.lr, batch_size=inf.batch_size,
                            patience=inf.patience, hidden=inf.hidden_sizes, seed=seed)


def train_agent(cfg: ExperimentConfig, seed, out_dir, classifier: StyleClassifier = None):
    """Joint LK/LC training for one seed

    Both agents see the same episodes. The LK agent learns from every step; the LC agent is
    queried and trained only while the ego is on the ramp. The transition of the step that
    merges is held back and closed with the episode's final LC reward.

    Returns:
        SeedRun
    """
    rng = np.random.default_rng(seed)
    episode_seeds = np.random.default_rng((seed, 0x5EED))
    estimator = StyleEstimator(classifier) if classifier is not None else None
    delay = cfg.training_delay
    env = build_env(cfg, estimator, delay, cfg.augment, seed)
    eval_env = build_env(cfg, estimator, delay, cfg.augment, seed)
    scale = input_scale(env.env.layout, env.observation_size)
    agent = MergeAgent(env.observation_size, scale, cfg.ppo, cfg.dqn, rng,
                       bounds=(-cfg.env.a_min_mag, cfg.env.a_max), classifier=classifier)

    curve = [{"step": 0, **quick_eval(agent, eval_env, cfg.curve_episodes, seed)}]
    step = episodes = 0
    while step < cfg.training_steps:
        x = agent.features(env.reset(seed=int(episode_seeds.integers(2 ** 31 - 1))))
        episodes += 1
        pending = None
        done = False
        while not done and step < cfg.training_steps:
            on_ramp = env.on_ramp
            accel, sample, log_prob, value = agent.lk.act(x, training=True)
            lc_index = agent.lc.act(x, training=True) if on_ramp else 0
            outcome = env.step(EgoAction(accel=accel, lane_change=LC_ACTIONS[lc_index]))
            x_next = agent.features(outcome.obs)
            done = outcome.done

            cut_value = agent.lk.value(x_next) if outcome.terminal is Terminal.TIMEOUT else None
            agent.lk.remember(x, sample, log_prob, outcome.r_lk, done, value, cut_value)
            if on_ramp:
                if outcome.info["executed_lane_change"] and not done:
                    pending = (x, lc_index)
                else:
                    agent.lc.remember(Transition(x, lc_index, outcome.r_lc if done else 0.0, x_next, done))
            if done and pending is not None:
                agent.lc.remember(Transition(pending[0], pending[1], outcome.r_lc, x_next, True))
            agent.lc.observe_step()
            agent.lc.learn()
            if agent.lk.ready:
                agent.lk.update(0.0 if done else agent.lk.value(x_next))

            x = x_next
            step += 1
            if step % cfg.eval_interval == 0:
                point = {"step": step, **quick_eval(agent, eval_env, cfg.curve_episodes, seed)}
                curve.append(point)
                logger.info(f"[seed {seed}] step {step}/{cfg.training_steps}: reward {point['avg_reward']:.3f}, "
                            f"success {point['success_rate']:.3f}, epsilon {agent.lc.epsilon:.3f}")
    if step % cfg.eval_interval != 0:
        curve.append({"step": step, **quick_eval(agent, eval_env, cfg.curve_episodes, seed)})

    seed_dir = os.path.join(out_dir, f"seed_{seed}")
    os.makedirs(seed_dir, exist_ok=True)
    checkpoint = agent.save(os.path.join(seed_dir, "agent.npz"),
                            {"config": cfg.to_dict(), "seed": seed, "steps": step, "episodes": episodes})
    curve_frame = pd.DataFrame(curve, columns=CURVE_COLUMNS)
    curve_frame.to_csv(os.path.join(seed_dir, "learning_curve.csv"), index=False, float_format="%.6f")
    logger.info(f"[seed {seed}] training finished after {step} steps / {episodes} episodes")
    return SeedRun(seed, checkpoint, curve_frame)


def run_training(cfg: ExperimentConfig, out_dir, classifiers=None):
    """Run the variant's pipeline for every configured seed

    Args:
        cfg (ExperimentConfig): Validated experiment settings
        out_dir (str): Run directory; per-seed checkpoints land in ``seed_<n>/``
        classifiers (dict|None): seed -> trained StyleClassifier to reuse instead of retraining

    Returns:
        TrainingReport
    """
    report = TrainingReport()
    for seed in cfg.seeds:
        classifier, accuracy = None, None
        if cfg.inference_enabled:
            classifier = (classifiers or {}).get(seed)
            if classifier is None:
                result = train_style_classifier(cfg, seed)
                classifier, accuracy = result.classifier, result.test_accuracy
                seed_dir = os.path.join(out_dir, f"seed_{seed}")
                os.makedirs(seed_dir, exist_ok=True)
                result.history.to_csv(os.path.join(seed_dir, "classifier_history.csv"), index=False,
                                      float_format="%.6f")
        else:
            logger.info(f"[seed {seed}] style inference disabled; classifier stage skipped")
        run = train_agent(cfg, seed, out_dir, classifier)
        run.classifier_accuracy = accuracy
        report.runs.append(run)

    report.curve().to_csv(os.path.join(out_dir, "learning_curve.csv"), index=False, float_format="%.6f")
    return report

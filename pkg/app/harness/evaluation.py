"""Deterministic evaluation campaigns and across-seed metrics."""
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from app.env.merge_env import Terminal
from app.harness.agent import MergeAgent, build_env
from app.harness.experiment import experiment_from_dict
from app.utils.logger import logger

EVAL_SEED_OFFSET = 1_000_000
# learning-curve episodes never reuse final evaluation scenarios
CURVE_SEED_OFFSET = 50_000_000
SEED_STRIDE = 100_000
RESULT_COLUMNS = ["seed", "episode", "terminal", "steps", "return_lk", "return_lc", "interventions",
                  "insertion_delay_steps"]


@dataclass
class EpisodeResult:
    seed: int
    episode: int
    terminal: str
    steps: int
    return_lk: float
    return_lc: float
    interventions: int
    insertion_delay_steps: int = 0


@dataclass
class Metrics:
    label: str
    success_rate: float
    success_std: float
    collision_rate: float
    collision_std: float
    timeout_rate: float
    timeout_std: float
    avg_reward: float
    avg_reward_std: float
    intervention_rate: float
    intervention_std: float
    n_seeds: int
    n_episodes: int

    def to_row(self):
        return asdict(self)


def episode_seed(seed, episode, offset=EVAL_SEED_OFFSET):
    return offset + seed * SEED_STRIDE + episode


def run_episode(policy, env, seed):
    """Roll one episode with ``policy(state, on_ramp) -> EgoAction``

    Returns:
        tuple: (terminal, steps, return_lk, return_lc, interventions, insertion delay)
    """
    state = env.reset(seed=seed)
    return_lk = return_lc = 0.0
    interventions = 0
    while True:
        outcome = env.step(policy(state, env.on_ramp))
        return_lk += outcome.r_lk
        return_lc += outcome.r_lc
        interventions += int(outcome.info.get("intervention", False))
        state = outcome.obs
        if outcome.done:
            return (outcome.terminal, outcome.t, return_lk, return_lc, interventions,
                    env.info.get("insertion_delay_steps", 0))


def evaluate_policy(policy, env, n_episodes, seed, seed_offset=EVAL_SEED_OFFSET):
    """Evaluate ``policy`` for ``n_episodes`` episodes of one seed

    Returns:
        list[EpisodeResult]
    """
    results = []
    for episode in range(n_episodes):
        terminal, steps, r_lk, r_lc, interventions, waited = run_episode(policy, env,
                                                                          episode_seed(seed, episode, seed_offset))
        results.append(EpisodeResult(seed, episode, terminal.value, steps, r_lk, r_lc, interventions, waited))
    return results


def results_frame(results):
    return pd.DataFrame([asdict(result) for result in results], columns=RESULT_COLUMNS)


def aggregate_metrics(results, label=""):
    """Per-seed rates averaged across seeds; std is the across-seed sample spread"""
    frame = results_frame(results)
    if frame.empty:
        raise ValueError("Cannot aggregate an empty evaluation")
    per_seed = []
    for seed, group in frame.groupby("seed", sort=True):
        n = len(group)
        per_seed.append({
            "success": float((group["terminal"] == Terminal.ARRIVED.value).sum()) / n,
            "collision": float((group["terminal"] == Terminal.COLLIDED.value).sum()) / n,
            "timeout": float((group["terminal"] == Terminal.TIMEOUT.value).sum()) / n,
            "reward": float(group["return_lk"].mean()),
            "interventions": float(group["interventions"].mean()),
        })
    table = pd.DataFrame(per_seed)
    if len(table) < 3:
        logger.warning(f"Metrics '{label}' computed from {len(table)} seed(s); std needs at least 3")

    def spread(column):
        return float(table[column].std(ddof=1)) if len(table) > 1 else 0.0

    return Metrics(
        label=label,
        success_rate=float(table["success"].mean()), success_std=spread("success"),
        collision_rate=float(table["collision"].mean()), collision_std=spread("collision"),
        timeout_rate=float(table["timeout"].mean()), timeout_std=spread("timeout"),
        avg_reward=float(table["reward"].mean()), avg_reward_std=spread("reward"),
        intervention_rate=float(table["interventions"].mean()), intervention_std=spread("interventions"),
        n_seeds=len(table), n_episodes=len(frame),
    )


def quick_eval(policy, env, n_episodes, seed):
    """Success/collision rates and mean LK return for learning curves"""
    results = evaluate_policy(policy, env, n_episodes, seed, seed_offset=CURVE_SEED_OFFSET)
    terminals = np.array([r.terminal for r in results])
    return {
        "avg_reward": float(np.mean([r.return_lk for r in results])),
        "success_rate": float(np.mean(terminals == Terminal.ARRIVED.value)),
        "collision_rate": float(np.mean(terminals == Terminal.COLLIDED.value)),
    }


def run_eval(checkpoint, n_episodes, seeds, cfg=None, delay_seconds=None, augment=None, label=None):
    """Evaluate saved agents deterministically and aggregate across seeds

    Args:
        checkpoint (str|dict): One checkpoint for every seed, or seed -> checkpoint path
        n_episodes (int): Episodes per seed
        seeds (list[int]): Evaluation seeds
        cfg (ExperimentConfig|None): Overrides the config stored in the checkpoint
        delay_seconds (float|None): Overrides the variant's evaluation delay
        augment (bool|None): Overrides whether augmented states are emitted

    Returns:
        tuple: (Metrics, list[EpisodeResult])
    """
    if not seeds:
        raise ValueError("At least one evaluation seed is required")
    paths = checkpoint if isinstance(checkpoint, dict) else {seed: checkpoint for seed in seeds}
    results = []
    for seed in seeds:
        if seed not in paths:
            raise ValueError(f"No checkpoint for seed {seed}")
        agent, meta = MergeAgent.load(paths[seed])
        run_cfg = cfg or experiment_from_dict(meta.get("config", {}))
        delay = run_cfg.eval_delay if delay_seconds is None else delay_seconds
        env = build_env(run_cfg, agent.estimator(), delay, run_cfg.augment if augment is None else augment)
        if env.observation_size != agent.input_size:
            raise ValueError(f"Checkpoint expects {agent.input_size} inputs, environment emits "
                             f"{env.observation_size}")
        results.extend(evaluate_policy(agent, env, n_episodes, seed))
        logger.info(f"Evaluated {paths[seed]} on seed {seed} ({n_episodes} episodes, delay {delay}s)")
    metrics = aggregate_metrics(results, label or run_cfg.variant.value)
    return metrics, results

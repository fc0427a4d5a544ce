import pytest

from app.env.merge_env import EgoAction, LaneChange, StepOutcome, Terminal
from app.harness.evaluation import (CURVE_SEED_OFFSET, EpisodeResult, aggregate_metrics, episode_seed,
                                    evaluate_policy, quick_eval, run_eval)
from app.harness.experiment import Variant
from tests.helpers import tiny_config, untrained_checkpoint


class CollidingEnv:
    """Every episode ends in a collision on its third step"""

    def __init__(self):
        self.t = 0
        self.info = {}
        self.seeds = []

    @property
    def on_ramp(self):
        return True

    def reset(self, seed=None):
        self.seeds.append(seed)
        self.t = 0
        self.info = {"insertion_delay_steps": 0}
        return "state"

    def step(self, action):
        self.t += 1
        terminal = Terminal.COLLIDED if self.t == 3 else Terminal.CONTINUE
        return StepOutcome("state", -0.1, 0.0, terminal, self.t, {"intervention": self.t == 1})


def always_change(state, on_ramp):
    return EgoAction(accel=0.0, lane_change=LaneChange.CHANGE)


def test_always_collide_stub_gives_full_collision_rate():
    env = CollidingEnv()
    results = []
    for seed in (0, 1, 2):
        results.extend(evaluate_policy(always_change, env, 4, seed))
    metrics = aggregate_metrics(results, "stub")
    assert metrics.collision_rate == 1.0
    assert metrics.success_rate == 0.0
    assert metrics.collision_std == 0.0
    assert metrics.avg_reward == pytest.approx(-0.3)
    assert metrics.intervention_rate == 1.0
    assert metrics.n_seeds == 3 and metrics.n_episodes == 12
    assert env.seeds[:2] == [episode_seed(0, 0), episode_seed(0, 1)]


def test_quick_eval_summary():
    summary = quick_eval(always_change, CollidingEnv(), 3, 0)
    assert summary == {"avg_reward": pytest.approx(-0.3), "success_rate": 0.0, "collision_rate": 1.0}


def test_learning_curve_episodes_avoid_evaluation_seeds():
    curve_env, eval_env = CollidingEnv(), CollidingEnv()
    for seed in (0, 1, 2):
        quick_eval(always_change, curve_env, 50, seed)
        evaluate_policy(always_change, eval_env, 1000, seed)
    assert curve_env.seeds[0] == episode_seed(0, 0, CURVE_SEED_OFFSET)
    assert set(curve_env.seeds).isdisjoint(eval_env.seeds)


def test_std_is_across_seeds():
    def result(seed, episode, terminal):
        return EpisodeResult(seed, episode, terminal, 10, 1.0, 0.0, 0)

    results = [result(0, 0, "arrived"), result(0, 1, "arrived"),
               result(1, 0, "collided"), result(1, 1, "timeout"),
               result(2, 0, "arrived"), result(2, 1, "timeout")]
    metrics = aggregate_metrics(results)
    assert metrics.success_rate == pytest.approx(0.5)
    assert metrics.success_std == pytest.approx(0.5)
    assert metrics.timeout_rate == pytest.approx(1.0 / 3.0)


def test_empty_evaluation_raises():
    with pytest.raises(ValueError):
        aggregate_metrics([])


def test_evaluation_seeds_are_disjoint():
    assert episode_seed(0, 5) == 1_000_005
    assert episode_seed(1, 0) == 1_100_000
    seen = {episode_seed(seed, episode) for seed in range(3) for episode in range(1000)}
    assert len(seen) == 3000


def test_same_checkpoint_and_seeds_give_identical_metrics(tmp_path):
    cfg = tiny_config()
    path = untrained_checkpoint(cfg, tmp_path / "agent.npz")
    first, first_results = run_eval(path, 2, [0, 1])
    second, second_results = run_eval(path, 2, [0, 1])
    assert first == second
    assert first_results == second_results
    assert first.label == Variant.BASELINE.value


def test_checkpoint_and_environment_must_agree(tmp_path):
    cfg = tiny_config()
    path = untrained_checkpoint(cfg, tmp_path / "agent.npz")
    with pytest.raises(ValueError):
        run_eval(path, 1, [0], delay_seconds=1.0, augment=True)
    with pytest.raises(ValueError):
        run_eval(path, 1, [])
    with pytest.raises(ValueError):
        run_eval({0: path}, 1, [1])

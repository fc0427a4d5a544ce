import numpy as np

from app.env.merge_env import EnvConfig
from app.harness.agent import MergeAgent, build_env, input_scale
from app.harness.experiment import ExperimentConfig, InferenceConfig, Variant
from app.rl.dqn import DqnConfig
from app.rl.ppo import PpoConfig

TINY_CONFIG_LINES = [
    "experiment.training_steps=40",
    "experiment.eval_interval=20",
    "experiment.curve_episodes=1",
    "experiment.eval_episodes=2",
    "experiment.seeds=0",
    "env.warmup_seconds=2",
    "env.max_steps=20",
    "ppo.rollout_length=16",
    "ppo.minibatch_size=8",
    "ppo.epochs=1",
    "ppo.hidden_sizes=8",
    "dqn.replay_capacity=32",
    "dqn.batch_size=4",
    "dqn.learn_start=4",
    "dqn.hidden_sizes=8",
]


def tiny_config(variant=Variant.BASELINE, **overrides):
    values = dict(
        variant=variant,
        training_steps=40,
        eval_interval=20,
        curve_episodes=1,
        eval_episodes=2,
        seeds=(0,),
        env=EnvConfig(warmup_seconds=2.0, max_steps=20),
        ppo=PpoConfig(rollout_length=16, minibatch_size=8, epochs=1, hidden_sizes=(8,)),
        dqn=DqnConfig(replay_capacity=32, batch_size=4, learn_start=4, hidden_sizes=(8,)),
        inference=InferenceConfig(window=5, n_episodes=3, epochs=2, hidden_sizes=(8,)),
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def untrained_checkpoint(cfg, path, seed=0):
    env = build_env(cfg)
    agent = MergeAgent(env.observation_size, input_scale(env.env.layout, env.observation_size), cfg.ppo, cfg.dqn,
                       np.random.default_rng(seed), bounds=(-cfg.env.a_min_mag, cfg.env.a_max))
    return agent.save(str(path), {"config": cfg.to_dict(), "seed": seed})

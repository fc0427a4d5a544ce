import numpy as np
import pytest

from app.rl.dqn import DqnAgent, DqnConfig, dqn_targets, dqn_update, select_action_lc
from app.rl.mlp import MomentumSGD, Mlp
from app.rl.replay import Batch, Transition

S0 = np.array([1.0, 0.0])
S1 = np.array([0.0, 1.0])


def chain_transitions():
    """Two states, two actions: s0 -a0-> s1 (r 0), s0 -a1-> end (r 0.5), s1 -any-> end (r 1)"""
    return [
        Transition(S0, 0, 0.0, S1, False),
        Transition(S0, 1, 0.5, S0, True),
        Transition(S1, 0, 1.0, S1, True),
        Transition(S1, 1, 1.0, S1, True),
    ]


def value_iteration(gamma, sweeps=200):
    q = np.zeros((2, 2))
    for _ in range(sweeps):
        new = np.zeros_like(q)
        new[1, :] = 1.0
        new[0, 0] = 0.0 + gamma * q[1].max()
        new[0, 1] = 0.5
        q = new
    return q


def test_terminal_transitions_do_not_bootstrap():
    target = Mlp([2, 4, 2], rng=np.random.default_rng(0))
    target.biases[-1][:] = 100.0
    batch = Batch.from_transitions([Transition(S0, 0, 1.5, S1, True), Transition(S0, 0, 1.5, S1, False)])
    targets = dqn_targets(target, batch, gamma=0.5)
    assert targets[0] == pytest.approx(1.5)
    assert targets[1] == pytest.approx(1.5 + 0.5 * target.predict(S1).max())


def test_update_on_consistent_targets_is_a_fixed_point():
    cfg = DqnConfig(gamma=0.9, lr=0.1, momentum=0.0, batch_size=2, replay_capacity=4, hidden_sizes=(4,))
    q_net = Mlp([2, 4, 2], rng=np.random.default_rng(0))
    target = q_net.copy()
    q_s0 = q_net.predict(S0)
    batch = Batch.from_transitions([Transition(S0, 1, float(q_s0[1]), S0, True)])
    before = [p.copy() for p in q_net.params]
    loss = dqn_update(q_net, target, batch, cfg, MomentumSGD(q_net.params, cfg.lr, 0.0))
    assert loss == pytest.approx(0.0, abs=1e-20)
    for old, new in zip(before, q_net.params):
        np.testing.assert_allclose(old, new, atol=1e-12)


def test_consistent_targets_stay_fixed_after_momentum_builds_up():
    cfg = DqnConfig(gamma=0.9, lr=0.1, batch_size=1, replay_capacity=4, hidden_sizes=(4,))
    assert cfg.momentum > 0
    agent = DqnAgent(2, cfg, np.random.default_rng(0))
    warmup = Batch.from_transitions([Transition(S0, 1, 5.0, S0, True)])
    assert dqn_update(agent.q_net, agent.target_net, warmup, cfg, agent.optimizer) > 0
    assert any(np.any(v) for v in agent.optimizer.velocity)

    q_s0 = agent.q_net.predict(S0)
    batch = Batch.from_transitions([Transition(S0, 1, float(q_s0[1]), S0, True)])
    before = [p.copy() for p in agent.q_net.params]
    assert dqn_update(agent.q_net, agent.target_net, batch, cfg, agent.optimizer) == 0.0
    for old, new in zip(before, agent.q_net.params):
        np.testing.assert_array_equal(old, new)


def test_q_learning_matches_value_iteration_on_two_state_chain():
    gamma = 0.9
    cfg = DqnConfig(gamma=gamma, lr=0.1, momentum=0.0, batch_size=4, replay_capacity=4, target_update_period=25,
                    hidden_sizes=(16,), learn_start=0)
    q_net = Mlp([2, 16, 2], rng=np.random.default_rng(5))
    target = q_net.copy()
    optimizer = MomentumSGD(q_net.params, cfg.lr, cfg.momentum)
    batch = Batch.from_transitions(chain_transitions())
    for update in range(1, 6001):
        dqn_update(q_net, target, batch, cfg, optimizer)
        if update % cfg.target_update_period == 0:
            target.copy_from(q_net)

    expected = value_iteration(gamma)
    learned = np.vstack([q_net.predict(S0), q_net.predict(S1)])
    np.testing.assert_allclose(learned, expected, atol=1e-2)
    assert select_action_lc(q_net, S0, 0.0, np.random.default_rng(0)) == 0


def test_empty_batch_raises():
    cfg = DqnConfig(batch_size=1, replay_capacity=1)
    net = Mlp([2, 3, 2])
    empty = Batch(np.zeros((0, 2)), np.zeros(0, dtype=int), np.zeros(0), np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError):
        dqn_update(net, net.copy(), empty, cfg, MomentumSGD(net.params, 0.1))


def test_epsilon_schedule():
    cfg = DqnConfig(epsilon_start=1.0, epsilon_end=0.05, epsilon_decay_steps=100000)
    assert cfg.epsilon_at(0) == 1.0
    assert cfg.epsilon_at(50000) == pytest.approx(0.525)
    assert cfg.epsilon_at(10 ** 7) == pytest.approx(0.05)


def test_agent_waits_for_learn_start_and_syncs_target():
    cfg = DqnConfig(batch_size=2, replay_capacity=16, learn_start=4, target_update_period=2, hidden_sizes=(4,))
    agent = DqnAgent(2, cfg, np.random.default_rng(0))
    for transition in chain_transitions()[:3]:
        agent.remember(transition)
        assert agent.learn() is None
    agent.remember(chain_transitions()[3])
    assert agent.learn() is not None
    assert agent.learn() is not None
    assert agent.updates == 2
    for mine, target in zip(agent.q_net.params, agent.target_net.params):
        np.testing.assert_array_equal(mine, target)


def test_greedy_action_ignores_randomness():
    agent = DqnAgent(2, DqnConfig(hidden_sizes=(4,)), np.random.default_rng(0))
    agent.q_net.biases[-1][:] = [0.0, 50.0]
    assert {agent.act(S0, training=False) for _ in range(20)} == {1}


def test_config_validation():
    with pytest.raises(ValueError):
        DqnConfig(replay_capacity=8, batch_size=16)
    with pytest.raises(ValueError):
        DqnConfig(gamma=0.0)

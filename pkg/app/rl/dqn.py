"""Deep Q-learning for the discrete keep/change lane decision."""
from dataclasses import dataclass

import numpy as np

from app.rl.mlp import MomentumSGD, Mlp, check_finite
from app.rl.replay import Batch, ReplayBuffer, Transition
from app.utils.logger import logger


@dataclass
class DqnConfig:
    gamma: float = 0.99
    lr: float = 5e-4
    momentum: float = 0.9
    replay_capacity: int = 50000
    batch_size: int = 64
    target_update_period: int = 500
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 100000
    learn_start: int = 1000
    hidden_sizes: tuple[int, ...] = (128,)
    max_grad_norm: float = 10.0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.replay_capacity < self.batch_size:
            raise ValueError("Replay capacity must be at least the batch size")
        if self.target_update_period < 1:
            raise ValueError("target_update_period must be positive")

    def epsilon_at(self, step):
        """Linear decay from epsilon_start to epsilon_end over epsilon_decay_steps"""
        if self.epsilon_decay_steps <= 0:
            return self.epsilon_end
        frac = min(1.0, step / self.epsilon_decay_steps)
        return self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)


def dqn_targets(target_net: Mlp, batch: Batch, gamma):
    next_q = target_net.predict(batch.next_states).max(axis=1)
    return batch.rewards + gamma * (1.0 - batch.dones) * next_q


def dqn_update(q_net: Mlp, target_net: Mlp, batch: Batch, cfg: DqnConfig, optimizer: MomentumSGD):
    """One gradient step on the squared TD error

    Terminal transitions do not bootstrap from the target network.

    Returns:
        float: Mean squared TD error before the step
    """
    if len(batch) == 0:
        logger.error("dqn_update called with an empty batch")
        raise ValueError("Empty batch")
    targets = dqn_targets(target_net, batch, cfg.gamma)
    q_values, cache = q_net.forward(batch.states)
    rows = np.arange(len(batch))
    diff = q_values[rows, batch.actions] - targets
    loss = float(np.mean(diff ** 2))
    if not np.any(diff):
        # Targets already met: the parameters stay put even with optimizer momentum
        return loss
    grad_logits = np.zeros_like(q_values)
    grad_logits[rows, batch.actions] = 2.0 * diff / len(batch)
    grads = q_net.backward(cache, grad_logits)
    check_finite(grads, "DQN gradient")
    optimizer.step(grads)
    return loss


def select_action_lc(q_net: Mlp, state, epsilon, rng):
    """Epsilon-greedy action index: 0 keeps the lane, 1 changes"""
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(q_net.output_size))
    return int(np.argmax(q_net.predict(state)))


class DqnAgent:
    """Q-network, target network, replay and epsilon schedule for the LC decision"""

    def __init__(self, state_dim, cfg: DqnConfig = None, rng=None, n_actions=2):
        self.cfg = cfg or DqnConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        sizes = [state_dim, *self.cfg.hidden_sizes, n_actions]
        self.q_net = Mlp(sizes, output="linear", rng=self.rng)
        self.target_net = self.q_net.copy()
        self.optimizer = MomentumSGD(self.q_net.params, self.cfg.lr, self.cfg.momentum, self.cfg.max_grad_norm)
        self.replay = ReplayBuffer(self.cfg.replay_capacity, state_dim, rng=self.rng)
        self.env_steps = 0
        self.updates = 0

    @property
    def epsilon(self):
        return self.cfg.epsilon_at(self.env_steps)

    def act(self, state, training=True):
        epsilon = self.epsilon if training else 0.0
        return select_action_lc(self.q_net, state, epsilon, self.rng)

    def remember(self, transition: Transition):
        self.replay.add(transition)

    def observe_step(self):
        self.env_steps += 1

    def learn(self):
        """Sample and update once the replay holds learn_start transitions

        Returns:
            float|None: TD loss, or None when learning has not started
        """
        if len(self.replay) < max(self.cfg.learn_start, self.cfg.batch_size):
            return None
        batch = self.replay.sample(self.cfg.batch_size)
        loss = dqn_update(self.q_net, self.target_net, batch, self.cfg, self.optimizer)
        self.updates += 1
        if self.updates % self.cfg.target_update_period == 0:
            self.sync_target()
        return loss

    def sync_target(self):
        self.target_net.copy_from(self.q_net)
        logger.debug(f"DQN target network synced after {self.updates} updates")

    def to_arrays(self, prefix="lc"):
        return self.q_net.to_arrays(f"{prefix}.q")

    def load_arrays(self, arrays, prefix="lc"):
        self.q_net = Mlp.from_arrays(arrays, f"{prefix}.q")
        self.target_net = self.q_net.copy()
        self.optimizer = MomentumSGD(self.q_net.params, self.cfg.lr, self.cfg.momentum, self.cfg.max_grad_norm)

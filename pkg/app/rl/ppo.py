"""Proximal policy optimisation with a Gaussian acceleration head."""
import math
from dataclasses import dataclass

import numpy as np

from app.rl.mlp import MomentumSGD, Mlp, check_finite, mse_loss
from app.utils.logger import logger

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass
class PpoConfig:
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    momentum: float = 0.9
    rollout_length: int = 2048
    epochs: int = 10
    minibatch_size: int = 64
    entropy_coef: float = 0.0
    init_log_std: float = 0.0
    min_log_std: float = -5.0
    max_log_std: float = 1.0
    noise_initial: float = 0.3
    noise_final: float = 0.0
    noise_decay_steps: int = 200000
    hidden_sizes: tuple[int, ...] = (128, 64)
    max_grad_norm: float = 1.0
    normalize_advantages: bool = True

    def __post_init__(self):
        if not 0 < self.clip_epsilon < 1:
            raise ValueError("clip_epsilon must lie in (0, 1)")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError("gae_lambda must lie in [0, 1]")
        if self.rollout_length < 2 or self.minibatch_size < 1 or self.epochs < 1:
            raise ValueError("rollout_length >= 2, minibatch_size >= 1 and epochs >= 1 are required")
        if self.min_log_std > self.max_log_std:
            raise ValueError("min_log_std exceeds max_log_std")


@dataclass
class LinearNoiseSchedule:
    initial: float = 0.3
    final: float = 0.0
    decay_steps: int = 200000

    def scale(self, step):
        if self.decay_steps <= 0:
            return self.final
        frac = min(1.0, max(0, step) / self.decay_steps)
        return self.initial + frac * (self.final - self.initial)


def exploration_noise(action_mean, rng, schedule: LinearNoiseSchedule, step, low, high):
    """Add zero-mean Gaussian noise of the scheduled scale and clamp to the bounds"""
    scale = schedule.scale(step)
    noisy = action_mean + rng.normal(0.0, scale) if scale > 0 else action_mean
    return float(np.clip(noisy, low, high))


def gaussian_log_prob(action, mean, log_std):
    z = (action - mean) / np.exp(log_std)
    return -0.5 * z ** 2 - log_std - LOG_SQRT_2PI


def clipped_surrogate(ratio, advantages, clip_epsilon):
    """Mean of min(r * A, clip(r, 1 - eps, 1 + eps) * A)"""
    ratio = np.asarray(ratio, dtype=float)
    advantages = np.asarray(advantages, dtype=float)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    return float(np.mean(np.minimum(ratio * advantages, clipped * advantages)))


def compute_gae(rewards, values, dones, last_value, gamma, lam, cut_values=None):
    """Generalised advantage estimates and bootstrapped returns

    ``cut_values`` holds, per step, the critic value of the successor state of an
    episode cut off by the time limit and NaN elsewhere. Such a step ends the trace
    like a terminal one but still bootstraps from that value.
    """
    n = len(rewards)
    advantages = np.zeros(n)
    running = 0.0
    for t in range(n - 1, -1, -1):
        next_value = last_value if t == n - 1 else values[t + 1]
        not_done = 1.0 - float(dones[t])
        cut = 0.0 if cut_values is None or np.isnan(cut_values[t]) else cut_values[t]
        delta = rewards[t] + gamma * (next_value * not_done + cut) - values[t]
        running = delta + gamma * lam * not_done * running
        advantages[t] = running
    return advantages, advantages + np.asarray(values, dtype=float)


class RolloutBuffer:
    def __init__(self):
        self.clear()

    def clear(self):
        self.states, self.actions, self.log_probs = [], [], []
        self.rewards, self.dones, self.values, self.cut_values = [], [], [], []

    def __len__(self):
        return len(self.rewards)

    def add(self, state, action, log_prob, reward, done, value, cut_value=None):
        self.states.append(np.asarray(state, dtype=float))
        self.actions.append(float(action))
        self.log_probs.append(float(log_prob))
        self.rewards.append(float(reward))
        self.dones.append(bool(done))
        self.values.append(float(value))
        self.cut_values.append(math.nan if cut_value is None else float(cut_value))

    def arrays(self):
        return (np.array(self.states), np.array(self.actions), np.array(self.log_probs),
                np.array(self.rewards), np.array(self.dones, dtype=float), np.array(self.values), np.array(self.cut_values))


def ppo_update(actor: Mlp, log_std, critic: Mlp, rollout: RolloutBuffer, last_value, cfg: PpoConfig,
               actor_opt: MomentumSGD, critic_opt: MomentumSGD, rng):
    """Several epochs of clipped-surrogate ascent for the actor and return regression for the critic

    Args:
        actor (Mlp): Network producing the action mean
        log_std (np.ndarray): Shape (1,) learned log standard deviation, updated in place
        critic (Mlp): State-value network
        rollout (RolloutBuffer): Transitions collected under the current parameters
        last_value (float): Critic value of the state following the last transition

    Returns:
        dict: policy_loss, value_loss, approx_kl, clip_fraction
    """
    if len(rollout) < 2:
        logger.error(f"ppo_update called with a rollout of {len(rollout)} steps")
        raise ValueError("Rollout needs at least two steps")
    states, actions, old_log_probs, rewards, dones, values, cut_values = rollout.arrays()
    advantages, returns = compute_gae(rewards, values, dones, last_value, cfg.gamma, cfg.gae_lambda, cut_values)
    if cfg.normalize_advantages and advantages.std() > 1e-8:
        advantages = (advantages - advantages.mean()) / advantages.std()

    n = len(actions)
    stats = {"policy_loss": [], "value_loss": [], "approx_kl": [], "clip_fraction": []}
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            m = len(idx)
            mean_out, actor_cache = actor.forward(states[idx])
            mean = mean_out[:, 0]
            std = math.exp(log_std[0])
            log_prob = gaussian_log_prob(actions[idx], mean, log_std[0])
            ratio = np.exp(log_prob - old_log_probs[idx])
            adv = advantages[idx]
            unclipped = ratio * adv
            clipped = np.clip(ratio, 1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) * adv
            # min() picks the unclipped branch wherever it is not larger
            active = unclipped <= clipped
            d_obj_d_ratio = np.where(active, adv, 0.0) / m
            d_ratio_d_mean = ratio * (actions[idx] - mean) / std ** 2
            d_ratio_d_log_std = ratio * (((actions[idx] - mean) / std) ** 2 - 1.0)

            grad_mean = -(d_obj_d_ratio * d_ratio_d_mean)
            grad_log_std = np.array([-np.sum(d_obj_d_ratio * d_ratio_d_log_std) - cfg.entropy_coef])
            actor_grads = actor.backward(actor_cache, grad_mean[:, None]) + [grad_log_std]
            check_finite(actor_grads, "PPO actor gradient")
            actor_opt.step(actor_grads)
            np.clip(log_std, cfg.min_log_std, cfg.max_log_std, out=log_std)

            value_loss, critic_grads = critic.gradient(states[idx], mse_loss, returns[idx][:, None])
            critic_opt.step(critic_grads)

            stats["policy_loss"].append(-float(np.mean(np.minimum(unclipped, clipped))))
            stats["value_loss"].append(value_loss)
            stats["approx_kl"].append(float(np.mean(old_log_probs[idx] - log_prob)))
            stats["clip_fraction"].append(float(np.mean(np.abs(ratio - 1.0) > cfg.clip_epsilon)))
    return {key: float(np.mean(vals)) for key, vals in stats.items()}


def select_action_lk(actor: Mlp, state, bounds, log_std=None, rng=None, training=False):
    """Acceleration from the policy head: the mean in evaluation, a Gaussian sample in training"""
    mean = float(actor.predict(state)[0])
    if training and log_std is not None and rng is not None:
        mean = mean + math.exp(log_std[0]) * rng.normal()
    return float(np.clip(mean, bounds[0], bounds[1]))


class PpoAgent:
    """Actor, critic, log-std and rollout for the LK acceleration policy

    Args:
        state_dim (int): Length of the (scaled) input vector
        cfg (PpoConfig): Hyperparameters
        rng: numpy Generator shared with the caller
        bounds (tuple): Executed acceleration bounds (low, high)
    """

    def __init__(self, state_dim, cfg: PpoConfig = None, rng=None, bounds=(-4.5, 2.6)):
        self.cfg = cfg or PpoConfig()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.bounds = bounds
        self.actor = Mlp([state_dim, *self.cfg.hidden_sizes, 1], rng=self.rng, output_scale=0.01)
        self.critic = Mlp([state_dim, *self.cfg.hidden_sizes, 1], rng=self.rng)
        self.log_std = np.array([self.cfg.init_log_std], dtype=float)
        self.noise = LinearNoiseSchedule(self.cfg.noise_initial, self.cfg.noise_final, self.cfg.noise_decay_steps)
        self.rollout = RolloutBuffer()
        self.env_steps = 0
        self._build_optimizers()

    def _build_optimizers(self):
        self.actor_opt = MomentumSGD(self.actor.params + [self.log_std], self.cfg.actor_lr, self.cfg.momentum,
                                     self.cfg.max_grad_norm)
        self.critic_opt = MomentumSGD(self.critic.params, self.cfg.critic_lr, self.cfg.momentum,
                                      self.cfg.max_grad_norm)

    def value(self, state):
        return float(self.critic.predict(state)[0])

    def act(self, state, training=True):
        """Choose an acceleration

        Returns:
            tuple: (executed accel, sampled action, log-prob of the sample, state value).
            Outside training the sample is the mean and the log-prob is 0.
        """
        if not training:
            accel = select_action_lk(self.actor, state, self.bounds)
            return accel, accel, 0.0, 0.0
        mean = float(self.actor.predict(state)[0])
        sample = mean + math.exp(self.log_std[0]) * self.rng.normal()
        log_prob = float(gaussian_log_prob(sample, mean, self.log_std[0]))
        executed = exploration_noise(sample, self.rng, self.noise, self.env_steps, *self.bounds)
        return executed, sample, log_prob, self.value(state)

    def remember(self, state, sample, log_prob, reward, done, value, cut_value=None):
        """Store one step; ``cut_value`` is V(s') when the time limit ended the episode"""
        self.rollout.add(state, sample, log_prob, reward, done, value, cut_value)
        self.env_steps += 1

    @property
    def ready(self):
        return len(self.rollout) >= self.cfg.rollout_length

    def update(self, last_value=0.0):
        stats = ppo_update(self.actor, self.log_std, self.critic, self.rollout, last_value, self.cfg,
                           self.actor_opt, self.critic_opt, self.rng)
        self.rollout.clear()
        logger.debug(f"PPO update: {stats}, log_std {self.log_std[0]:.3f}")
        return stats

    def to_arrays(self, prefix="lk"):
        arrays = self.actor.to_arrays(f"{prefix}.actor")
        arrays.update(self.critic.to_arrays(f"{prefix}.critic"))
        arrays[f"{prefix}.log_std"] = self.log_std.copy()
        return arrays

    def load_arrays(self, arrays, prefix="lk"):
        self.actor = Mlp.from_arrays(arrays, f"{prefix}.actor")
        self.critic = Mlp.from_arrays(arrays, f"{prefix}.critic")
        self.log_std = np.array(arrays[f"{prefix}.log_std"], dtype=float)
        self._build_optimizers()

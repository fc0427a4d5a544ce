from app.rl.checkpoint import load_checkpoint, save_checkpoint
from app.rl.dqn import DqnAgent, DqnConfig, dqn_targets, dqn_update, select_action_lc
from app.rl.mlp import MomentumSGD, Mlp, mlp_forward, mlp_gradient, mse_loss, softmax_nll_loss
from app.rl.ppo import (LinearNoiseSchedule, PpoAgent, PpoConfig, RolloutBuffer, clipped_surrogate, compute_gae,
                        exploration_noise, ppo_update, select_action_lk)
from app.rl.replay import Batch, ReplayBuffer, Transition

__all__ = [
    "load_checkpoint", "save_checkpoint", "DqnAgent", "DqnConfig", "dqn_targets", "dqn_update",
    "select_action_lc", "MomentumSGD", "Mlp", "mlp_forward", "mlp_gradient", "mse_loss", "softmax_nll_loss",
    "LinearNoiseSchedule", "PpoAgent", "PpoConfig", "RolloutBuffer", "clipped_surrogate", "compute_gae",
    "exploration_noise", "ppo_update", "select_action_lk", "Batch", "ReplayBuffer", "Transition",
]

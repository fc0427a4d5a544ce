import math
from dataclasses import dataclass


@dataclass
class RewardWeights:
    alpha_lk: float = 0.1
    beta_lk: float = 1.0
    gamma_lk: float = 1.0
    p: float = 10.0
    q: float = 10.0
    alpha_lc: float = 1.0
    beta_lc: float = 1.0
    p_prime: float = 20.0
    q_prime: float = 20.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not math.isfinite(value):
                raise ValueError(f"Reward weight {name} must be finite")
        for name in ("p", "q", "p_prime", "q_prime"):
            if getattr(self, name) <= 0:
                raise ValueError(f"Reward magnitude {name} must be positive")


def lk_reward(accel, collided, arrived, weights: RewardWeights):
    """Lane-keeping reward: speed-change penalty, collision penalty, arrival bonus"""
    r_sc = -abs(accel)
    r_c = -weights.p if collided else 0.0
    r_a = weights.q if arrived else 0.0
    return weights.alpha_lk * r_sc + weights.beta_lk * r_c + weights.gamma_lk * r_a


def lc_reward(collided, arrived, weights: RewardWeights):
    """Lane-changing reward: only the safety outcome of the manoeuvre counts"""
    r_c = -weights.p_prime if collided else 0.0
    r_a = weights.q_prime if arrived else 0.0
    return weights.alpha_lc * r_c + weights.beta_lc * r_a

from app.env.delay import AugmentedState, DelayBuffer, DelayedMergeEnv, k_steps_for
from app.env.merge_env import EgoAction, EnvConfig, LaneChange, MergeEnv, StepOutcome, Terminal
from app.env.observation import EgoObservation, ObservationLayout, StyleChannel, observe
from app.env.rewards import RewardWeights, lc_reward, lk_reward

__all__ = [
    "AugmentedState", "DelayBuffer", "DelayedMergeEnv", "k_steps_for", "EgoAction", "EnvConfig",
    "LaneChange", "MergeEnv", "StepOutcome", "Terminal", "EgoObservation", "ObservationLayout",
    "StyleChannel", "observe", "RewardWeights", "lc_reward", "lk_reward",
]

from app.safety.controller import (LaneChangeDecision, NeighborView, SafetyConfig, SafetyController,
                                   SafetyDecision, SafetySource, SafetyVariant, pair_violation, safe_lc,
                                   safe_lk, view_from_observation, view_from_world)

__all__ = [
    "LaneChangeDecision", "NeighborView", "SafetyConfig", "SafetyController", "SafetyDecision",
    "SafetySource", "SafetyVariant", "pair_violation", "safe_lc", "safe_lk",
    "view_from_observation", "view_from_world",
]

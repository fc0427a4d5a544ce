"""Fixed-length, lane-sorted, zero-padded ego observations."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from app.traffic.road import RoadConfig
from app.traffic.world import World

BLOCK_SIZE = 4   # (x, y, v, d)
EGO_BLOCK_SIZE = 3   # (x, y, v)


class StyleChannel(str, Enum):
    TRUE_LABEL = "true_label"
    ESTIMATE = "estimate"
    ZERO = "zero"


@dataclass
class ObservationLayout:
    """Slot geometry: lane groups (main lanes + ramp) x (behind + ahead) slots"""
    road: RoadConfig = field(default_factory=RoadConfig)
    radius: float = 50.0
    behind_slots: int = 2
    ahead_slots: int = 2
    speed_scale: float = 15.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("Sensing radius must be positive")
        if self.behind_slots < 0 or self.ahead_slots < 0:
            raise ValueError("Slot counts must be non-negative")

    @property
    def groups(self):
        return self.road.lane_groups

    @property
    def size(self):
        return EGO_BLOCK_SIZE + self.groups * (self.behind_slots + self.ahead_slots) * BLOCK_SIZE

    def lane_number(self, lane):
        return float(lane + 1)

    def scale_vector(self):
        """Per-entry multipliers that bring the raw vector to order-one magnitudes"""
        slot_scale = np.array([1.0 / self.radius, 1.0 / self.groups, 1.0 / self.speed_scale, 1.0])
        behind = np.tile(slot_scale, self.groups * self.behind_slots)
        ahead = np.tile(slot_scale, self.groups * self.ahead_slots)
        ego = np.array([1.0 / self.road.main_length, 1.0 / self.groups, 1.0 / self.speed_scale])
        return np.concatenate([behind, ego, ahead])


@dataclass
class EgoObservation:
    ego: np.ndarray
    behind: np.ndarray
    ahead: np.ndarray
    behind_ids: list
    ahead_ids: list

    def vector(self):
        """Behind blocks (lane-sorted), the ego block, then ahead blocks"""
        return np.concatenate([self.behind.ravel(), self.ego, self.ahead.ravel()])

    def __len__(self):
        return self.behind.size + self.ego.size + self.ahead.size

    def slot_ids(self):
        """(side, group, slot, vehicle id) for every occupied slot"""
        occupied = []
        for side, ids in (("behind", self.behind_ids), ("ahead", self.ahead_ids)):
            for group, row in enumerate(ids):
                for slot, vid in enumerate(row):
                    if vid is not None:
                        occupied.append((side, group, slot, vid))
        return occupied

    def neighbor_blocks(self):
        """Yield (vehicle id, relative x, lane index, speed) for occupied slots"""
        for side, group, slot, vid in self.slot_ids():
            block = self.behind[group, slot] if side == "behind" else self.ahead[group, slot]
            yield vid, float(block[0]), int(round(block[1])) - 1, float(block[2])

    def copy(self):
        return EgoObservation(self.ego.copy(), self.behind.copy(), self.ahead.copy(),
                              [list(row) for row in self.behind_ids], [list(row) for row in self.ahead_ids])


def empty_observation(layout: ObservationLayout):
    return EgoObservation(
        ego=np.zeros(EGO_BLOCK_SIZE),
        behind=np.zeros((layout.groups, layout.behind_slots, BLOCK_SIZE)),
        ahead=np.zeros((layout.groups, layout.ahead_slots, BLOCK_SIZE)),
        behind_ids=[[None] * layout.behind_slots for _ in range(layout.groups)],
        ahead_ids=[[None] * layout.ahead_slots for _ in range(layout.groups)],
    )


def observe(world: World, layout: ObservationLayout, style_channel=StyleChannel.ZERO, estimator=None):
    """Build the ego observation from the world

    Args:
        world (World): World with an inserted ego
        layout (ObservationLayout): Slot geometry and sensing radius
        style_channel (StyleChannel): Source of the d entry of every slot
        estimator: Callable (world, ids) -> {id: P(cooperative)}; required for ESTIMATE

    Returns:
        EgoObservation
    """
    ego = world.ego
    if ego is None:
        raise RuntimeError("Cannot observe without an ego vehicle")
    obs = empty_observation(layout)
    obs.ego[:] = (ego.x, layout.lane_number(ego.lane), ego.v)

    candidates = {}
    for veh in world.surrounding():
        rel = veh.x - ego.x
        if abs(rel) > layout.radius:
            continue
        side = "behind" if rel < 0 else "ahead"
        candidates.setdefault((side, veh.lane), []).append((abs(rel), veh.id, rel, veh))

    kept = []
    for (side, lane), members in candidates.items():
        members.sort(key=lambda item: (item[0], item[1]))
        capacity = layout.behind_slots if side == "behind" else layout.ahead_slots
        for slot, (_, vid, rel, veh) in enumerate(members[:capacity]):
            kept.append((side, lane, slot, rel, veh))

    styles = {}
    if style_channel is StyleChannel.TRUE_LABEL:
        styles = {veh.id: veh.style.code for *_, veh in kept}
    elif style_channel is StyleChannel.ESTIMATE:
        if estimator is None:
            raise ValueError("StyleChannel.ESTIMATE requires a style estimator")
        probabilities = estimator(world, [veh.id for *_, veh in kept]) if kept else {}
        styles = {vid: 2.0 * p - 1.0 for vid, p in probabilities.items()}

    for side, lane, slot, rel, veh in kept:
        block = (rel, layout.lane_number(lane), veh.v, styles.get(veh.id, 0.0))
        if side == "behind":
            obs.behind[lane, slot] = block
            obs.behind_ids[lane][slot] = veh.id
        else:
            obs.ahead[lane, slot] = block
            obs.ahead_ids[lane][slot] = veh.id
    return obs

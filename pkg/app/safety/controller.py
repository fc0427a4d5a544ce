"""Kinematic look-ahead safety filter for lane-keeping and lane-changing actions.

Both checks predict one step ahead with explicit Δt. The ``stopping`` variant then asks
whether the follower could still brake at a_min without the bumper gap falling under
``d_safe + headway * v`` while its leader keeps its predicted speed.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from app.traffic.road import RoadConfig, VehicleState
from app.utils.logger import logger


class SafetyVariant(str, Enum):
    ONE_STEP = "one_step"
    STOPPING = "stopping"


class SafetySource(str, Enum):
    OBSERVED = "observed"
    FRESH = "fresh"


@dataclass
class SafetyConfig:
    d_safe: float = 2.5
    a_min: float = 4.5
    dt: float = 0.1
    variant: SafetyVariant = SafetyVariant.STOPPING
    headway: float = 0.5
    source: SafetySource = SafetySource.OBSERVED

    def __post_init__(self):
        if self.d_safe <= 0:
            raise ValueError("d_safe must be positive")
        if self.a_min <= 0 or self.dt <= 0:
            raise ValueError("a_min and dt must be positive")
        if self.headway < 0:
            raise ValueError("headway must be non-negative")


@dataclass
class NeighborView:
    """Vehicles the filter reasons about, all in absolute road coordinates"""
    leader: VehicleState = None
    merge_rear: VehicleState = None
    merge_front: VehicleState = None


@dataclass
class LaneChangeDecision:
    allowed: bool
    fallback_accel: float = None


@dataclass
class SafetyDecision:
    accel: float
    lane_change: bool
    intervened: bool
    reason: str = ""


def pair_violation(x_f, v_f, a_f, x_l, v_l, a_l, length_l, cfg: SafetyConfig):
    """Whether a follower/leader pair becomes unsafe after one step.

    Works elementwise on numpy arrays as well as on floats.

    Args:
        x_f, v_f, a_f: Follower front position, speed and acceleration
        x_l, v_l, a_l: Leader front position, speed and acceleration
        length_l: Leader length
        cfg (SafetyConfig): Threshold and prediction settings

    Returns:
        bool or ndarray of bool
    """
    dt = cfg.dt
    x_f1 = x_f + v_f * dt + 0.5 * a_f * dt * dt
    x_l1 = x_l + v_l * dt + 0.5 * a_l * dt * dt
    gap = (x_l1 - length_l) - x_f1
    if cfg.variant is SafetyVariant.ONE_STEP:
        return gap <= cfg.d_safe

    v_f1 = np.maximum(0.0, v_f + a_f * dt)
    v_l1 = np.maximum(0.0, v_l + a_l * dt)
    closing = np.maximum(0.0, v_f1 - v_l1)
    min_gap = gap - closing * closing / (2.0 * cfg.a_min)
    return min_gap <= cfg.d_safe + cfg.headway * v_f1


def safe_lk(a_e, ego: VehicleState, target: VehicleState, cfg: SafetyConfig):
    """Correct a lane-keeping acceleration against the same-lane leader

    Returns:
        float: ``a_e`` when safe (or without a leader), otherwise ``-a_min``
    """
    if target is None:
        return a_e
    unsafe = pair_violation(ego.x, ego.v, a_e, target.x, target.v, 0.0, target.length, cfg)
    return -cfg.a_min if bool(unsafe) else a_e


def safe_lc(ego: VehicleState, rear_neighbor: VehicleState, front_neighbor: VehicleState,
            cfg: SafetyConfig, a_e=None):
    """Judge a lane change against the destination-lane neighbours

    Args:
        ego (VehicleState): Ego before the change
        rear_neighbor (VehicleState|None): Destination-lane vehicle behind the ego
        front_neighbor (VehicleState|None): Destination-lane vehicle ahead of the ego
        cfg (SafetyConfig): Filter settings
        a_e (float|None): Commanded ego acceleration; defaults to ``ego.a``

    Returns:
        LaneChangeDecision: allowed, or suppressed with the fallback acceleration -a_min
    """
    accel = ego.a if a_e is None else a_e
    if front_neighbor is not None and bool(pair_violation(
            ego.x, ego.v, accel, front_neighbor.x, front_neighbor.v, 0.0, front_neighbor.length, cfg)):
        return LaneChangeDecision(allowed=False, fallback_accel=-cfg.a_min)
    if rear_neighbor is not None and bool(pair_violation(
            rear_neighbor.x, rear_neighbor.v, 0.0, ego.x, ego.v, accel, ego.length, cfg)):
        return LaneChangeDecision(allowed=False, fallback_accel=-cfg.a_min)
    return LaneChangeDecision(allowed=True)


class SafetyController:
    """Applies safe_lc / safe_lk to the agents' combined action"""

    def __init__(self, cfg: SafetyConfig, road: RoadConfig):
        self.cfg = cfg
        self.road = road
        self.interventions = 0

    def filter(self, accel, lane_change, ego: VehicleState, view: NeighborView) -> SafetyDecision:
        if lane_change and ego.lane == self.road.ramp_lane:
            decision = safe_lc(ego, view.merge_rear, view.merge_front, self.cfg, a_e=accel)
            if not decision.allowed:
                self.interventions += 1
                logger.debug(f"Lane change suppressed at x={ego.x:.2f}")
                return SafetyDecision(decision.fallback_accel, False, True, "lane_change_suppressed")
            return SafetyDecision(accel, True, False)

        corrected = safe_lk(accel, ego, view.leader, self.cfg)
        if corrected != accel:
            self.interventions += 1
            logger.debug(f"Acceleration {accel:.2f} corrected to {corrected:.2f} at x={ego.x:.2f}")
            return SafetyDecision(corrected, False, True, "acceleration_corrected")
        return SafetyDecision(accel, False, False)


def _nearest(vehicles, lane, x):
    rear, front = None, None
    for veh in vehicles:
        if veh.lane != lane:
            continue
        if veh.x < x:
            if rear is None or veh.x > rear.x:
                rear = veh
        elif front is None or veh.x < front.x:
            front = veh
    return rear, front


def view_from_vehicles(ego: VehicleState, vehicles, road: RoadConfig) -> NeighborView:
    """Pick the leader and the merge-lane neighbours out of a vehicle list"""
    others = [veh for veh in vehicles if veh.id != ego.id]
    _, leader = _nearest(others, ego.lane, ego.x)
    rear, front = _nearest(others, road.merge_lane_index, ego.x)
    return NeighborView(leader=leader, merge_rear=rear, merge_front=front)


def view_from_world(world, ego: VehicleState) -> NeighborView:
    return view_from_vehicles(ego, world.vehicles.values(), world.road)


def view_from_observation(obs, ego: VehicleState, road: RoadConfig) -> NeighborView:
    """Rebuild neighbours from (possibly delayed) slot blocks around the observed ego position"""
    observed_ego_x = float(obs.ego[0])
    vehicles = [
        VehicleState(id=vid, lane=lane, x=observed_ego_x + rel_x, v=speed, length=road.vehicle_length)
        for vid, rel_x, lane, speed in obs.neighbor_blocks()
    ]
    return view_from_vehicles(ego, vehicles, road)

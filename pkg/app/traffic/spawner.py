"""Demand-driven vehicle insertion at the upstream end of every main lane."""
import math

import numpy as np

from app.traffic.idm import max_safe_speed
from app.traffic.road import DemandProfile, DrivingStyle, RoadConfig, StyleRanges, VehicleState
from app.utils.logger import logger

SECONDS_PER_HOUR = 3600.0
MAX_BACKLOG = 20


class Spawner:
    """Poisson arrivals per lane with style-dependent driver parameters.

    Arrivals that cannot be inserted because the lane entry is blocked wait in a
    per-lane backlog and are retried on every later step. A lane holds at most
    ``max_backlog`` waiting arrivals; the excess is dropped and counted in ``dropped``.
    """

    def __init__(self, road: RoadConfig, demand: DemandProfile, styles: StyleRanges, rng: np.random.Generator,
                 max_backlog=MAX_BACKLOG):
        if max_backlog < 1:
            raise ValueError("max_backlog must be at least 1")
        if len(demand.lane_rates) != road.num_main_lanes:
            raise ValueError(
                f"Demand lists {len(demand.lane_rates)} lane rates for {road.num_main_lanes} main lanes"
            )
        self.road = road
        self.demand = demand
        self.styles = styles
        self.rng = rng
        self.arrival_means = np.asarray(demand.lane_rates, dtype=float) / SECONDS_PER_HOUR * road.dt
        self.backlog = np.zeros(road.num_main_lanes, dtype=np.int64)
        self.arrivals = np.zeros(road.num_main_lanes, dtype=np.int64)
        self.inserted = np.zeros(road.num_main_lanes, dtype=np.int64)
        self.dropped = np.zeros(road.num_main_lanes, dtype=np.int64)
        self.max_backlog = max_backlog
        self._next_id = 0

    def draw_arrivals(self, n_steps=1):
        """Sample Poisson arrival counts, shape (n_steps, num_main_lanes)"""
        return self.rng.poisson(self.arrival_means, size=(n_steps, self.road.num_main_lanes))

    def draw_style(self) -> DrivingStyle:
        u = self.rng.random()
        if u < self.demand.p_mainstream:
            return DrivingStyle.MAINSTREAM
        if self.rng.random() < self.demand.p_cooperative:
            return DrivingStyle.COOPERATIVE
        return DrivingStyle.AGGRESSIVE

    def spawn(self, lane_tails):
        """Insert at most one waiting vehicle per lane.

        Args:
            lane_tails (dict): lane -> rearmost VehicleState in that lane (or None)

        Returns:
            list: (VehicleState, DriverParams) pairs for the vehicles inserted this step
        """
        arrivals = self.draw_arrivals()[0]
        self.arrivals += arrivals
        self.backlog += arrivals
        excess = np.maximum(0, self.backlog - self.max_backlog)
        if excess.any():
            self.dropped += excess
            self.backlog -= excess
            logger.debug(f"Entry backlog full, dropped arrivals per lane: {excess.tolist()}")

        new_vehicles = []
        for lane in range(self.road.num_main_lanes):
            if self.backlog[lane] == 0:
                continue
            tail = lane_tails.get(lane)
            gap = math.inf if tail is None else tail.rear
            if gap < self.styles.s0:
                # Entry blocked: keep the arrival waiting
                continue
            style = self.draw_style()
            params = self.styles.sample(style, self.rng)
            entry_speed = entry_speed_for(gap, None if tail is None else tail.v, params)
            vehicle = VehicleState(
                id=f"veh{self._next_id}",
                lane=lane,
                x=0.0,
                v=float(entry_speed),
                a=0.0,
                length=self.road.vehicle_length,
                style=style,
            )
            self._next_id += 1
            self.backlog[lane] -= 1
            self.inserted[lane] += 1
            new_vehicles.append((vehicle, params))
        return new_vehicles

    def expected_arrivals(self, seconds):
        """Mean arrival count per lane over a horizon, for diagnostics"""
        return np.asarray(self.demand.lane_rates, dtype=float) * seconds / SECONDS_PER_HOUR


def entry_speed_for(gap, v_lead, params):
    """Entry speed used when a vehicle is inserted ``gap`` meters behind a leader"""
    if math.isinf(gap):
        return params.v0
    return min(params.v0, max_safe_speed(gap, v_lead, params))

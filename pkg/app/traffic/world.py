"""Seedable multi-lane highway world: IDM traffic, demand spawning, Euler integration."""
import math
from collections import deque

import numpy as np
import pandas as pd

from app.traffic.idm import idm_acceleration
from app.traffic.road import (DemandProfile, DriverParams, DrivingStyle, EgoCommand, RoadConfig,
                              StyleRanges, VehicleState)
from app.traffic.spawner import Spawner
from app.utils.logger import logger

EGO_ID = "ego"
TRAJECTORY_COLUMNS = ["t", "id", "lane", "x", "v", "a", "style"]


class World:
    """Single-threaded traffic world. Identical seeds and ego commands give identical runs."""

    def __init__(self, road: RoadConfig = None, demand: DemandProfile = None, styles: StyleRanges = None,
                 seed=0, history_len=20, record_trajectory=False):
        self.road = road or RoadConfig()
        self.demand = demand or DemandProfile()
        self.styles = styles or StyleRanges()
        self.rng = np.random.default_rng(seed)
        self.spawner = Spawner(self.road, self.demand, self.styles, self.rng)
        self.vehicles = {}
        self.params = {}
        self.history = {}
        self.history_len = history_len
        self.ego_id = None
        self.t = 0.0
        self.steps = 0
        self.last_lane_change = None
        self.record_trajectory = record_trajectory
        self.trajectory_rows = []

    # ------------------------------------------------------------------ queries
    @property
    def ego(self):
        if self.ego_id is None:
            return None
        return self.vehicles.get(self.ego_id)

    def surrounding(self):
        return [veh for vid, veh in self.vehicles.items() if vid != self.ego_id]

    def lane_vehicles(self, lane):
        """Vehicles in ``lane`` sorted by increasing position"""
        return sorted((veh for veh in self.vehicles.values() if veh.lane == lane), key=lambda veh: (veh.x, veh.id))

    def lanes(self):
        grouped = {}
        for veh in self.vehicles.values():
            grouped.setdefault(veh.lane, []).append(veh)
        for lane in grouped:
            grouped[lane].sort(key=lambda veh: (veh.x, veh.id))
        return grouped

    def neighbors_at(self, lane, x, exclude=None):
        """Nearest vehicles behind and ahead of position ``x`` in ``lane``

        Returns:
            tuple: (rear VehicleState|None, front VehicleState|None)
        """
        rear, front = None, None
        for veh in self.lane_vehicles(lane):
            if veh.id == exclude:
                continue
            if veh.x < x:
                rear = veh
            elif front is None:
                front = veh
        return rear, front

    def leader_of(self, vehicle):
        """Same-lane leader and bumper gap (``math.inf`` without a leader)"""
        _, front = self.neighbors_at(vehicle.lane, vehicle.x + 1e-12, exclude=vehicle.id)
        if front is None:
            return None, math.inf
        return front, front.rear - vehicle.x

    # ----------------------------------------------------------------- mutation
    def add_vehicle(self, state: VehicleState, params: DriverParams = None):
        if state.id in self.vehicles:
            raise ValueError(f"Vehicle id {state.id} already present")
        if state.style is not DrivingStyle.EGO and params is None:
            params = self.styles.sample(DrivingStyle.MAINSTREAM, self.rng)
        self.vehicles[state.id] = state
        if params is not None:
            self.params[state.id] = params
        self.history[state.id] = deque(maxlen=self.history_len)
        return state

    def ramp_entry_clear(self):
        """True when no ramp vehicle blocks the ramp entry"""
        entry = self.road.ramp_start
        for veh in self.lane_vehicles(self.road.ramp_lane):
            if veh.id != self.ego_id and veh.rear - entry < self.styles.s0:
                return False
        return True

    def insert_ego(self, v_init=8.0):
        """Place the ego at the ramp entry"""
        if self.ego_id is not None:
            raise RuntimeError("Ego already inserted")
        ego = VehicleState(id=EGO_ID, lane=self.road.ramp_lane, x=self.road.ramp_start, v=float(v_init),
                           a=0.0, length=self.road.vehicle_length, style=DrivingStyle.EGO)
        self.ego_id = EGO_ID
        self.add_vehicle(ego)
        self._record_history(only=EGO_ID)
        return ego

    def warmup(self, seconds):
        """Advance surrounding traffic only"""
        n_steps = int(round(seconds / self.road.dt))
        for _ in range(n_steps):
            self.step(None)
        logger.debug(f"Warmup of {seconds}s finished with {len(self.surrounding())} vehicles")

    def step(self, command: EgoCommand = None):
        """Advance the world by one time step

        Args:
            command (EgoCommand|None): Ego acceleration and lane-change flag; ignored without an ego

        Returns:
            World: self, for chaining
        """
        dt = self.road.dt
        lanes = self.lanes()

        # Step 1: accelerations from the pre-step state
        accels = {}
        for lane, members in lanes.items():
            for idx, veh in enumerate(members):
                if veh.id == self.ego_id:
                    continue
                params = self.params[veh.id]
                if idx + 1 < len(members):
                    leader = members[idx + 1]
                    gap = leader.rear - veh.x
                    if gap <= 0:
                        logger.debug(f"Overlap between {veh.id} and {leader.id}; emergency braking")
                        accels[veh.id] = -params.b_e
                        continue
                    accels[veh.id] = idm_acceleration(veh.v, leader.v, gap, params)
                else:
                    accels[veh.id] = idm_acceleration(veh.v, None, math.inf, params)

        ego = self.ego
        self.last_lane_change = None
        if ego is not None:
            command = command or EgoCommand()
            accels[ego.id] = float(command.accel)
            # Step 2: discrete lane switch from the ramp into the merge lane
            if command.lane_change and ego.lane == self.road.ramp_lane \
                    and self.road.ramp_start <= ego.x < self.road.ramp_end:
                self.last_lane_change = (ego.lane, self.road.merge_lane_index)
                ego.lane = self.road.merge_lane_index

        # Step 3: forward Euler integration
        for veh in self.vehicles.values():
            accel = accels[veh.id]
            veh.a = accel
            veh.x = veh.x + veh.v * dt
            veh.v = max(0.0, veh.v + accel * dt)
            if veh.id == self.ego_id and veh.lane == self.road.ramp_lane and veh.x >= self.road.ramp_end:
                # The acceleration lane ends here
                veh.x = self.road.ramp_end
                veh.v = 0.0

        # Step 4: despawn vehicles past the end of the road (the ego is judged by the env)
        for vid in [vid for vid, veh in self.vehicles.items()
                    if vid != self.ego_id and veh.x > self.road.main_length]:
            del self.vehicles[vid]
            del self.history[vid]
            self.params.pop(vid, None)

        # Step 5: demand-driven insertion at the lane entries
        tails = {}
        for veh in self.vehicles.values():
            if self.road.is_main_lane(veh.lane) and (veh.lane not in tails or veh.x < tails[veh.lane].x):
                tails[veh.lane] = veh
        for vehicle, params in self.spawner.spawn(tails):
            self.add_vehicle(vehicle, params)

        self.t = round(self.t + dt, 10)
        self.steps += 1
        self._record_history()
        return self

    def _record_history(self, only=None):
        for lane, members in self.lanes().items():
            for idx, veh in enumerate(members):
                if only is not None and veh.id != only:
                    continue
                gap = members[idx + 1].rear - veh.x if idx + 1 < len(members) else math.inf
                self.history[veh.id].append((veh.x, veh.v, gap))
                if self.record_trajectory:
                    self.trajectory_rows.append((self.t, veh.id, veh.lane, veh.x, veh.v, veh.a, veh.style.value))

    # --------------------------------------------------------------- collisions
    def detect_collision(self, involving=None):
        """First same-lane pair whose closed intervals [x - length, x] overlap

        Args:
            involving (str|None): Only report pairs containing this vehicle id

        Returns:
            tuple|None: (rear id, front id) of the colliding pair
        """
        lanes = self.lanes()
        if self.last_lane_change is not None and self.ego is not None:
            # The changing ego occupies both lanes on the step of the change
            origin = self.last_lane_change[0]
            lanes.setdefault(origin, [])
            lanes[origin] = sorted(lanes[origin] + [self.ego], key=lambda veh: (veh.x, veh.id))

        for lane in sorted(lanes):
            members = lanes[lane]
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    rear_veh, front_veh = members[i], members[j]
                    if front_veh.rear > rear_veh.x:
                        break
                    if involving is None or involving in (rear_veh.id, front_veh.id):
                        return rear_veh.id, front_veh.id
        return None

    # ------------------------------------------------------------------- export
    def trajectory_frame(self):
        return pd.DataFrame(self.trajectory_rows, columns=TRAJECTORY_COLUMNS)

    def export_trajectory_csv(self, path):
        """Write recorded rows (t, id, lane, x, v, a, style) to CSV"""
        if not self.record_trajectory:
            raise RuntimeError("Trajectory recording is disabled for this world")
        self.trajectory_frame().to_csv(path, index=False, float_format="%.6f")
        logger.info(f"Trajectory with {len(self.trajectory_rows)} rows written to {path}")
        return path


def step(world: World, ego_command: EgoCommand = None) -> World:
    return world.step(ego_command)


def detect_collision(world: World, involving=None):
    return world.detect_collision(involving=involving)

import pandas as pd
import pytest

from app.traffic.idm import equilibrium_gap
from app.traffic.road import DemandProfile, DriverParams, DrivingStyle, EgoCommand, RoadConfig
from app.traffic.world import EGO_ID, World
from tests.conftest import vehicle


def snapshot(world):
    return sorted((v.id, v.lane, v.x, v.v) for v in world.vehicles.values())


def test_same_seed_gives_identical_traffic():
    first = World(seed=7)
    second = World(seed=7)
    first.warmup(10.0)
    second.warmup(10.0)
    assert snapshot(first) == snapshot(second)
    assert len(first.vehicles) > 0


def test_different_seeds_differ():
    first = World(seed=1)
    second = World(seed=2)
    first.warmup(10.0)
    second.warmup(10.0)
    assert snapshot(first) != snapshot(second)


def test_empty_demand_spawns_nothing(empty_world):
    empty_world.warmup(5.0)
    assert empty_world.vehicles == {}
    assert empty_world.steps == 50
    assert empty_world.t == pytest.approx(5.0)


def test_speeds_never_negative_and_vehicles_stay_on_road():
    world = World(seed=3)
    for _ in range(300):
        world.step(None)
        assert all(v.v >= 0.0 for v in world.vehicles.values())
        assert all(v.x <= world.road.main_length for v in world.vehicles.values())


def test_ego_inserted_at_ramp_entry(empty_world):
    ego = empty_world.insert_ego(8.0)
    assert ego.id == EGO_ID
    assert ego.lane == empty_world.road.ramp_lane
    assert ego.x == pytest.approx(empty_world.road.ramp_start)
    assert ego.v == 8.0
    with pytest.raises(RuntimeError):
        empty_world.insert_ego(8.0)


def test_ego_stops_at_end_of_acceleration_lane(empty_world):
    empty_world.insert_ego(8.0)
    for _ in range(120):
        empty_world.step(EgoCommand(accel=0.0))
    ego = empty_world.ego
    assert ego.lane == empty_world.road.ramp_lane
    assert ego.x == pytest.approx(empty_world.road.ramp_end)
    assert ego.v == 0.0


def test_lane_change_moves_ego_into_merge_lane(empty_world):
    empty_world.insert_ego(8.0)
    empty_world.step(EgoCommand(accel=0.0, lane_change=True))
    assert empty_world.ego.lane == empty_world.road.merge_lane_index
    assert empty_world.last_lane_change == (empty_world.road.ramp_lane, 0)
    # a merged ego ignores further lane-change commands
    empty_world.step(EgoCommand(accel=0.0, lane_change=True))
    assert empty_world.ego.lane == 0
    assert empty_world.last_lane_change is None


def test_collision_uses_closed_intervals(empty_world):
    empty_world.add_vehicle(vehicle("a", 0, 10.0))
    empty_world.add_vehicle(vehicle("b", 0, 15.0))   # rear bumper touches a's front
    assert empty_world.detect_collision() == ("a", "b")
    assert empty_world.detect_collision(involving=EGO_ID) is None


def test_no_collision_with_positive_gap(empty_world):
    empty_world.add_vehicle(vehicle("a", 0, 10.0))
    empty_world.add_vehicle(vehicle("b", 0, 15.5))
    empty_world.add_vehicle(vehicle("c", 1, 12.0))
    assert empty_world.detect_collision() is None


def test_overlapping_vehicles_brake_hard_instead_of_failing(empty_world):
    empty_world.add_vehicle(vehicle("a", 2, 10.0, v=5.0))
    empty_world.add_vehicle(vehicle("b", 2, 12.0, v=5.0))
    empty_world.step(None)
    params = empty_world.params["a"]
    assert empty_world.vehicles["a"].a == -params.b_e


def test_trajectory_export(tmp_path):
    world = World(RoadConfig(), DemandProfile(), seed=5, record_trajectory=True)
    world.warmup(2.0)
    path = world.export_trajectory_csv(tmp_path / "traj.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["t", "id", "lane", "x", "v", "a", "style"]
    assert len(frame) == len(world.trajectory_rows)
    assert set(frame["style"]) <= {s.value for s in DrivingStyle}


def test_trajectory_export_requires_recording(empty_world, tmp_path):
    with pytest.raises(RuntimeError):
        empty_world.export_trajectory_csv(tmp_path / "traj.csv")


def test_duplicate_vehicle_id_rejected(empty_world):
    empty_world.add_vehicle(vehicle("a", 0, 10.0))
    with pytest.raises(ValueError):
        empty_world.add_vehicle(vehicle("a", 1, 20.0))


def test_single_vehicle_kinematics(empty_world):
    empty_world.insert_ego(10.0)
    empty_world.step(EgoCommand(accel=2.6))
    assert empty_world.ego.v == pytest.approx(10.26)
    assert empty_world.ego.x == pytest.approx(71.0)


def test_follower_at_equilibrium_gap_stays_there():
    world = World(RoadConfig(main_length=20000.0), DemandProfile.empty(), seed=0)
    leader_params = DriverParams(v0=10.0, tau=1.0)
    follower_params = DriverParams(v0=20.0, tau=1.0)
    gap = equilibrium_gap(10.0, follower_params)
    world.add_vehicle(vehicle("lead", 2, 100.0, v=10.0), leader_params)
    world.add_vehicle(vehicle("follow", 2, 100.0 - 5.0 - gap, v=10.0), follower_params)

    world.step(None)
    assert world.vehicles["lead"].v == pytest.approx(10.0, abs=1e-9)
    assert world.vehicles["follow"].v == pytest.approx(10.0, abs=1e-9)
    assert world.detect_collision() is None
    for _ in range(999):
        world.step(None)
        assert abs(world.vehicles["follow"].a) < 1e-6
    assert world.vehicles["lead"].rear - world.vehicles["follow"].x == pytest.approx(gap, abs=1e-6)


def test_lane_change_collides_with_origin_lane_vehicle(empty_world):
    empty_world.insert_ego(8.0)
    empty_world.add_vehicle(vehicle("stalled", empty_world.road.ramp_lane, 75.5))
    empty_world.step(EgoCommand(accel=0.0, lane_change=True))
    assert empty_world.ego.lane == empty_world.road.merge_lane_index
    assert empty_world.detect_collision(involving=EGO_ID) == (EGO_ID, "stalled")
    # after the change step the ego only occupies the merge lane
    empty_world.step(EgoCommand(accel=0.0))
    assert empty_world.detect_collision(involving=EGO_ID) is None


def test_no_lane_change_from_the_end_of_the_ramp(empty_world):
    empty_world.insert_ego(8.0)
    while empty_world.ego.v > 0.0:
        empty_world.step(EgoCommand(accel=0.0))
    assert empty_world.ego.x == pytest.approx(empty_world.road.ramp_end)
    empty_world.step(EgoCommand(accel=0.0, lane_change=True))
    assert empty_world.ego.lane == empty_world.road.ramp_lane
    assert empty_world.last_lane_change is None

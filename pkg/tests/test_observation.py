from dataclasses import replace

import numpy as np
import pytest

from app.env.observation import ObservationLayout, StyleChannel, observe
from app.traffic.road import DemandProfile, DrivingStyle, RoadConfig
from app.traffic.world import World
from tests.conftest import vehicle


@pytest.fixture
def layout():
    return ObservationLayout()


@pytest.fixture
def scene(empty_world):
    world = empty_world
    world.add_vehicle(vehicle("a", 0, 80.0, v=10.0, style=DrivingStyle.COOPERATIVE))
    world.add_vehicle(vehicle("d", 0, 90.0, v=11.0, style=DrivingStyle.AGGRESSIVE))
    world.add_vehicle(vehicle("e", 0, 100.0, v=12.0, style=DrivingStyle.COOPERATIVE))
    world.add_vehicle(vehicle("b", 0, 60.0, v=9.0, style=DrivingStyle.AGGRESSIVE))
    world.add_vehicle(vehicle("far", 1, 130.0, v=9.0))
    world.insert_ego(8.0)
    return world


def test_layout_size(layout):
    # 6 lane groups (5 main lanes + ramp), 2 behind + 2 ahead slots of 4 values, plus the ego block
    assert layout.groups == 6
    assert layout.size == 3 + 6 * 4 * 4
    assert layout.scale_vector().shape == (layout.size,)


def test_slots_are_sorted_by_distance_and_truncated(scene, layout):
    obs = observe(scene, layout, StyleChannel.TRUE_LABEL)
    np.testing.assert_allclose(obs.ego, [70.0, 6.0, 8.0])
    assert obs.ahead_ids[0] == ["a", "d"]
    assert obs.behind_ids[0] == ["b", None]
    np.testing.assert_allclose(obs.ahead[0, 0], [10.0, 1.0, 10.0, 1.0])
    np.testing.assert_allclose(obs.ahead[0, 1], [20.0, 1.0, 11.0, -1.0])
    np.testing.assert_allclose(obs.behind[0, 0], [-10.0, 1.0, 9.0, -1.0])
    np.testing.assert_array_equal(obs.behind[0, 1], np.zeros(4))


def test_vehicles_outside_radius_are_dropped(scene, layout):
    obs = observe(scene, layout)
    assert "far" not in [vid for *_, vid in obs.slot_ids()]
    np.testing.assert_array_equal(obs.ahead[1], np.zeros((2, 4)))


def test_zero_channel_hides_styles(scene, layout):
    obs = observe(scene, layout, StyleChannel.ZERO)
    assert np.all(obs.ahead[:, :, 3] == 0.0)
    assert np.all(obs.behind[:, :, 3] == 0.0)


def test_vector_layout(scene, layout):
    obs = observe(scene, layout, StyleChannel.TRUE_LABEL)
    vec = obs.vector()
    assert vec.shape == (layout.size,)
    ego_at = layout.groups * layout.behind_slots * 4
    np.testing.assert_allclose(vec[ego_at:ego_at + 3], obs.ego)
    assert len(obs) == layout.size


def test_estimate_channel_maps_probability_to_signed_code(scene, layout):
    obs = observe(scene, layout, StyleChannel.ESTIMATE, estimator=lambda world, ids: {vid: 0.75 for vid in ids})
    assert obs.ahead[0, 0, 3] == pytest.approx(0.5)
    assert obs.behind[0, 0, 3] == pytest.approx(0.5)


def test_estimate_channel_requires_estimator(scene, layout):
    with pytest.raises(ValueError):
        observe(scene, layout, StyleChannel.ESTIMATE)


def test_observe_without_ego_raises(empty_world, layout):
    with pytest.raises(RuntimeError):
        observe(empty_world, layout)


def test_neighbor_blocks_report_zero_based_lanes(scene, layout):
    blocks = {vid: (rel, lane, speed) for vid, rel, lane, speed in observe(scene, layout).neighbor_blocks()}
    assert blocks["a"] == (10.0, 0, 10.0)
    assert blocks["b"] == (-10.0, 0, 9.0)


def test_insertion_order_does_not_change_the_observation(layout):
    placed = [vehicle("a", 0, 80.0, v=10.0, style=DrivingStyle.COOPERATIVE),
              vehicle("b", 0, 60.0, v=9.0, style=DrivingStyle.AGGRESSIVE),
              vehicle("c", 2, 95.0, v=11.0, style=DrivingStyle.AGGRESSIVE),
              vehicle("d", 0, 90.0, v=11.0, style=DrivingStyle.COOPERATIVE),
              vehicle("e", 1, 70.0, v=8.0)]
    vectors = []
    for order in (placed, placed[::-1], placed[2:] + placed[:2]):
        world = World(RoadConfig(), DemandProfile.empty(), seed=0)
        world.insert_ego(8.0)
        for state in order:
            world.add_vehicle(replace(state))
        vectors.append(observe(world, layout, StyleChannel.TRUE_LABEL).vector())
    np.testing.assert_array_equal(vectors[0], vectors[1])
    np.testing.assert_array_equal(vectors[0], vectors[2])

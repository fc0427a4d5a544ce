import math

import pytest

from app.traffic.idm import desired_gap, equilibrium_gap, idm_acceleration, max_safe_speed
from app.traffic.road import DriverParams


@pytest.fixture
def params():
    return DriverParams(v0=12.0, tau=1.0)


def test_free_road_from_standstill_uses_max_acceleration(params):
    assert idm_acceleration(0.0, None, math.inf, params) == pytest.approx(params.a_max)


def test_free_road_at_desired_speed_is_zero(params):
    assert idm_acceleration(params.v0, None, math.inf, params) == pytest.approx(0.0)


def test_equilibrium_gap_gives_zero_acceleration(params):
    for v in (1.0, 5.0, 9.0, 11.5):
        gap = equilibrium_gap(v, params)
        assert idm_acceleration(v, v, gap, params) == pytest.approx(0.0, abs=1e-9)


def test_equilibrium_gap_grows_with_speed(params):
    gaps = [equilibrium_gap(v, params) for v in (0.0, 2.0, 4.0, 8.0, 11.0)]
    assert gaps == sorted(gaps)
    assert gaps[0] == pytest.approx(params.s0)
    assert math.isinf(equilibrium_gap(params.v0, params))


def test_acceleration_is_monotone_in_gap_and_leader_speed(params):
    by_gap = [idm_acceleration(8.0, 8.0, gap, params) for gap in (3.0, 6.0, 12.0, 24.0, 48.0)]
    assert by_gap == sorted(by_gap)
    by_lead = [idm_acceleration(8.0, v_lead, 15.0, params) for v_lead in (0.0, 4.0, 8.0, 12.0)]
    assert by_lead == sorted(by_lead)


def test_emergency_braking_floor(params):
    assert idm_acceleration(12.0, 0.0, 0.1, params) == -params.b_e


def test_non_positive_gap_raises(params):
    with pytest.raises(ValueError):
        idm_acceleration(5.0, 5.0, 0.0, params)
    with pytest.raises(ValueError):
        idm_acceleration(5.0, 5.0, -1.0, params)


def test_desired_gap_interaction_never_negative(params):
    # a much faster leader would make the raw interaction term negative
    assert desired_gap(0.0, 10.0, params) == pytest.approx(params.s0)
    assert desired_gap(1.0, 30.0, params) == pytest.approx(params.s0)


def test_max_safe_speed_inverts_desired_gap(params):
    v = max_safe_speed(30.0, 5.0, params)
    assert v > 0
    assert desired_gap(v, 5.0, params) == pytest.approx(30.0)
    assert max_safe_speed(params.s0, 5.0, params) == 0.0


def test_driver_params_validation():
    with pytest.raises(ValueError):
        DriverParams(v0=0.0, tau=1.0)
    with pytest.raises(ValueError):
        DriverParams(v0=10.0, tau=-0.5)


def test_acceleration_is_non_increasing_in_speed(params):
    for v_lead in (0.0, 3.0, 8.0, 15.0):
        for gap in (3.0, 10.0, 40.0, math.inf):
            accels = [idm_acceleration(0.25 * i, v_lead, gap, params) for i in range(81)]
            assert all(later <= earlier + 1e-12 for earlier, later in zip(accels, accels[1:]))

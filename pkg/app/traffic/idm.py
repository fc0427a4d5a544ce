"""Intelligent Driver Model car-following law and its inverse helpers."""
import math

from app.traffic.road import DriverParams
from app.utils.logger import logger


def desired_gap(v, v_lead, params: DriverParams):
    """Dynamic desired gap s*; the interaction term never drops below zero"""
    interaction = v * params.tau + v * (v - v_lead) / (2.0 * math.sqrt(params.a_max * params.b))
    return params.s0 + max(0.0, interaction)


def idm_acceleration(v, v_lead, gap, params: DriverParams):
    """Compute the IDM acceleration of a follower.

    Args:
        v (float): Follower speed, m/s
        v_lead (float|None): Leader speed, m/s; None when there is no leader
        gap (float): Bumper-to-bumper gap in meters, ``math.inf`` for a free road
        params (DriverParams): Follower's IDM parameters

    Returns:
        float: Acceleration in m/s², never below -b_e
    """
    if not gap > 0:
        logger.error(f"IDM called with non-positive gap {gap}; collision must be handled first")
        raise ValueError(f"Gap must be positive, got {gap}")

    free_term = (v / params.v0) ** params.delta
    if math.isinf(gap):
        interaction_term = 0.0
    else:
        lead_speed = v if v_lead is None else v_lead
        interaction_term = (desired_gap(v, lead_speed, params) / gap) ** 2

    accel = params.a_max * (1.0 - free_term - interaction_term)
    return max(accel, -params.b_e)


def equilibrium_gap(v, params: DriverParams):
    """Gap at which a follower at speed ``v`` behind a leader at the same speed has zero acceleration"""
    ratio = (v / params.v0) ** params.delta
    if ratio >= 1.0:
        return math.inf
    return (params.s0 + v * params.tau) / math.sqrt(1.0 - ratio)


def max_safe_speed(gap, v_lead, params: DriverParams):
    """Largest speed whose desired gap s* still fits into ``gap`` behind a leader at ``v_lead``.

    Solves s0 + v·τ + v·(v - v_lead)/(2√(ab)) = gap for v ≥ 0.
    """
    if gap <= params.s0:
        return 0.0
    c2 = 1.0 / (2.0 * math.sqrt(params.a_max * params.b))
    c1 = params.tau - v_lead * c2
    c0 = params.s0 - gap
    return (-c1 + math.sqrt(c1 * c1 - 4.0 * c2 * c0)) / (2.0 * c2)

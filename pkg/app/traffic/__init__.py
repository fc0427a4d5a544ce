from app.traffic.idm import equilibrium_gap, idm_acceleration, max_safe_speed
from app.traffic.road import (DemandProfile, DriverParams, DrivingStyle, EgoCommand, RoadConfig,
                              StyleRanges, TrafficConfig, VehicleState)
from app.traffic.spawner import Spawner
from app.traffic.world import EGO_ID, World, detect_collision, step

__all__ = [
    "DemandProfile", "DriverParams", "DrivingStyle", "EgoCommand", "RoadConfig", "StyleRanges",
    "TrafficConfig", "VehicleState", "Spawner", "World", "EGO_ID", "detect_collision", "step",
    "idm_acceleration", "equilibrium_gap", "max_safe_speed",
]

"""Lane-level demand and desired-speed statistics from a vehicle trajectory CSV."""
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from app.traffic.road import DemandProfile
from app.utils.datatype_converter import DataTypeConverter
from app.utils.logger import logger

SCHEMA = {"vehicle_id": "string", "t": "number", "lane": "integer", "x": "number", "v": "number"}
SPEED_QUANTILE = 0.95


@dataclass
class SpeedStats:
    mean: float
    std: float
    minimum: float
    maximum: float
    n_vehicles: int


@dataclass
class DemandIngest:
    profile: DemandProfile
    lane_entries: dict
    duration_seconds: float
    speeds: SpeedStats
    per_vehicle_speed: pd.Series

    def config_fragment(self):
        """Key-value lines that plug the derived demand into an experiment config"""
        rates = ",".join(f"{rate:.1f}" for rate in self.profile.lane_rates)
        lines = [
            f"# derived from {self.duration_seconds:g} s of trajectories, {self.speeds.n_vehicles} vehicles",
            f"# desired speed (p95 per vehicle): mean {self.speeds.mean:.3f} std {self.speeds.std:.3f} "
            f"min {self.speeds.minimum:.3f} max {self.speeds.maximum:.3f}",
            f"demand.lane_rates={rates}",
            f"style.mainstream_v0={self.speeds.mean:.2f}",
        ]
        return "\n".join(lines) + "\n"

    def write_config_fragment(self, path):
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as handle:
            handle.write(self.config_fragment())
        logger.info(f"Demand config fragment written to {path}")
        return path


def read_trajectories(path):
    """Load and type-check a trajectory CSV (vehicle_id, t, lane, x, v)

    Raises:
        ValueError: Empty file, missing columns, or malformed rows (listed by file line)
    """
    try:
        frame = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        logger.error(f"Trajectory file {path} is empty")
        raise ValueError(f"Trajectory file is empty: {path}")
    if frame.empty:
        raise ValueError(f"Trajectory file has no rows: {path}")

    frame, errors = DataTypeConverter.convert_dataframe_columns(frame, SCHEMA)
    if errors:
        listed = "; ".join(f"line {line}: {', '.join(cols)}" for line, cols in list(errors.items())[:20])
        more = f" (+{len(errors) - 20} more)" if len(errors) > 20 else ""
        raise ValueError(f"Malformed rows in {path}: {listed}{more}")
    return frame


def ingest_demand(path, num_lanes=5, duration_seconds=None, first_lane=1):
    """Per-lane hourly flow and desired-speed distribution from trajectories

    Args:
        path (str): Trajectory CSV
        num_lanes (int): Main lanes to report
        duration_seconds (float|None): Observation window; defaults to the span of ``t``
        first_lane (int): Lane label of main lane index 0 in the file

    Returns:
        DemandIngest
    """
    frame = read_trajectories(path)
    duration = duration_seconds if duration_seconds is not None else float(frame["t"].max() - frame["t"].min())
    if duration <= 0:
        raise ValueError("Trajectory duration must be positive; pass duration_seconds explicitly")

    # one entry per vehicle per lane it appears in
    entries = frame.drop_duplicates(["vehicle_id", "lane"]).groupby("lane")["vehicle_id"].count()
    lane_entries, rates = {}, []
    for index in range(num_lanes):
        count = int(entries.get(first_lane + index, 0))
        lane_entries[index] = count
        rates.append(count * 3600.0 / duration)
    ignored = sorted(set(int(lane) for lane in entries.index) - {first_lane + i for i in range(num_lanes)})
    if ignored:
        logger.info(f"Ignoring lanes outside the mainstream: {ignored}")

    per_vehicle = frame.groupby("vehicle_id")["v"].quantile(SPEED_QUANTILE)
    speeds = SpeedStats(
        mean=float(per_vehicle.mean()),
        std=float(per_vehicle.std(ddof=0)) if len(per_vehicle) > 1 else 0.0,
        minimum=float(per_vehicle.min()),
        maximum=float(per_vehicle.max()),
        n_vehicles=int(len(per_vehicle)),
    )
    profile = DemandProfile(lane_rates=tuple(float(np.round(rate, 6)) for rate in rates))
    logger.info(f"Ingested {len(frame)} rows from {path}: rates {profile.lane_rates} veh/h")
    return DemandIngest(profile, lane_entries, duration, speeds, per_vehicle)

import os
import tempfile

# Keep log files out of the working tree; must run before app.utils.logger is imported
os.environ.setdefault("LOG_DIR", os.path.join(tempfile.gettempdir(), "merge_lab_test_logs"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from app.env.merge_env import EnvConfig  # noqa: E402
from app.traffic.road import DemandProfile, DrivingStyle, RoadConfig, TrafficConfig, VehicleState  # noqa: E402
from app.traffic.world import World  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def empty_traffic():
    return TrafficConfig(road=RoadConfig(), demand=DemandProfile.empty())


@pytest.fixture
def quick_env_cfg():
    return EnvConfig(warmup_seconds=0.0, max_steps=200)


@pytest.fixture
def empty_world():
    return World(RoadConfig(), DemandProfile.empty(), seed=0)


def vehicle(vid, lane, x, v=0.0, style=DrivingStyle.MAINSTREAM):
    return VehicleState(id=vid, lane=lane, x=float(x), v=float(v), style=style)

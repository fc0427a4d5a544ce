"""Road geometry, demand and driver parameter records for the highway microsimulator."""
from dataclasses import dataclass, field
from enum import Enum


class DrivingStyle(str, Enum):
    AGGRESSIVE = "aggressive"
    COOPERATIVE = "cooperative"
    MAINSTREAM = "mainstream"
    EGO = "ego"

    @property
    def code(self) -> float:
        """Style channel value: cooperative +1, aggressive -1, anything else 0"""
        if self is DrivingStyle.COOPERATIVE:
            return 1.0
        if self is DrivingStyle.AGGRESSIVE:
            return -1.0
        return 0.0


@dataclass
class RoadConfig:
    """Five-lane mainstream plus an acceleration lane (the ramp) beside lane 0.

    Lanes 0..num_main_lanes-1 are main lanes; the ramp has the dedicated index
    ``num_main_lanes`` and spans the last ``ramp_length`` meters of the mainstream.
    """
    num_main_lanes: int = 5
    main_length: float = 150.0
    ramp_length: float = 80.0
    dt: float = 0.1
    merge_lane_index: int = 0
    vehicle_length: float = 5.0

    def __post_init__(self):
        if self.num_main_lanes < 1:
            raise ValueError("num_main_lanes must be at least 1")
        if not self.main_length > self.ramp_length > 0:
            raise ValueError("Road geometry requires main_length > ramp_length > 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.merge_lane_index < self.num_main_lanes:
            raise ValueError("merge_lane_index must name a main lane")

    @property
    def ramp_lane(self) -> int:
        return self.num_main_lanes

    @property
    def ramp_start(self) -> float:
        return self.main_length - self.ramp_length

    @property
    def ramp_end(self) -> float:
        return self.main_length

    @property
    def lane_groups(self) -> int:
        return self.num_main_lanes + 1

    def is_main_lane(self, lane: int) -> bool:
        return 0 <= lane < self.num_main_lanes


@dataclass
class DriverParams:
    v0: float
    tau: float
    a_max: float = 2.6
    b: float = 4.5
    b_e: float = 9.0
    s0: float = 2.5
    delta: float = 4.0

    def __post_init__(self):
        for name in ("v0", "tau", "a_max", "b", "b_e", "s0", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"DriverParams.{name} must be positive, got {getattr(self, name)}")


@dataclass
class StyleRanges:
    """Uniform sampling ranges of desired speed (m/s) and time headway (s) per style"""
    aggressive_v0: tuple[float, ...] = (10.0, 13.0)
    aggressive_tau: tuple[float, ...] = (0.1, 0.7)
    cooperative_v0: tuple[float, ...] = (8.0, 11.0)
    cooperative_tau: tuple[float, ...] = (0.6, 1.8)
    mainstream_v0: float = 12.21
    mainstream_tau: float = 1.0
    a_max: float = 2.6
    b: float = 4.5
    b_e: float = 9.0
    s0: float = 2.5
    delta: float = 4.0

    def __post_init__(self):
        for name in ("aggressive_v0", "aggressive_tau", "cooperative_v0", "cooperative_tau"):
            low, high = getattr(self, name)
            if not 0 < low <= high:
                raise ValueError(f"StyleRanges.{name} must satisfy 0 < low <= high")

    def sample(self, style: DrivingStyle, rng) -> DriverParams:
        """Draw IDM parameters for a freshly spawned vehicle of the given style"""
        if style is DrivingStyle.AGGRESSIVE:
            v0 = rng.uniform(*self.aggressive_v0)
            tau = rng.uniform(*self.aggressive_tau)
        elif style is DrivingStyle.COOPERATIVE:
            v0 = rng.uniform(*self.cooperative_v0)
            tau = rng.uniform(*self.cooperative_tau)
        elif style is DrivingStyle.MAINSTREAM:
            v0, tau = self.mainstream_v0, self.mainstream_tau
        else:
            raise ValueError(f"Cannot sample driver parameters for style {style.value}")
        return DriverParams(v0=float(v0), tau=float(tau), a_max=self.a_max, b=self.b,
                            b_e=self.b_e, s0=self.s0, delta=self.delta)


@dataclass
class DemandProfile:
    # vehicles/hour for main lanes 0..4 (lane 1..5 in the source data)
    lane_rates: tuple[float, ...] = (1512.0, 1692.0, 1656.0, 1584.0, 1656.0)
    p_cooperative: float = 0.5
    # share of the mainstream style; 0 keeps the aggressive/cooperative mix
    p_mainstream: float = 0.0

    def __post_init__(self):
        if any(rate < 0 for rate in self.lane_rates):
            raise ValueError("Demand rates must be non-negative")
        if not 0.0 <= self.p_cooperative <= 1.0:
            raise ValueError("p_cooperative must lie in [0, 1]")
        if not 0.0 <= self.p_mainstream <= 1.0:
            raise ValueError("p_mainstream must lie in [0, 1]")

    @classmethod
    def empty(cls, num_lanes=5):
        return cls(lane_rates=tuple(0.0 for _ in range(num_lanes)))


@dataclass
class VehicleState:
    """Kinematic record of one vehicle; ``x`` is the front bumper position"""
    id: str
    lane: int
    x: float
    v: float
    a: float = 0.0
    length: float = 5.0
    style: DrivingStyle = DrivingStyle.MAINSTREAM

    @property
    def rear(self) -> float:
        return self.x - self.length

    def copy(self) -> "VehicleState":
        return VehicleState(self.id, self.lane, self.x, self.v, self.a, self.length, self.style)


@dataclass
class EgoCommand:
    accel: float = 0.0
    lane_change: bool = False


@dataclass
class TrafficConfig:
    """Bundle handed to the world; sections road/demand/style of the config file"""
    road: RoadConfig = field(default_factory=RoadConfig)
    demand: DemandProfile = field(default_factory=DemandProfile)
    styles: StyleRanges = field(default_factory=StyleRanges)

import pandas as pd
import pytest

from app.harness.experiment import load_experiment_config
from app.harness.ingest import ingest_demand, read_trajectories


def write_rows(path, rows):
    pd.DataFrame(rows, columns=["vehicle_id", "t", "lane", "x", "v"]).to_csv(path, index=False)
    return str(path)


def test_hourly_rate_from_vehicle_entries(tmp_path):
    rows = []
    for i in range(42):
        rows.append((f"car{i}", i * 10.0, 1, 0.0, 12.0))
        rows.append((f"car{i}", i * 10.0 + 1.0, 1, 12.0, 12.0))
    result = ingest_demand(write_rows(tmp_path / "traj.csv", rows), duration_seconds=600.0)
    assert result.profile.lane_rates[0] == pytest.approx(252.0)
    assert result.profile.lane_rates[1:] == (0.0, 0.0, 0.0, 0.0)
    assert result.lane_entries[0] == 42


def test_lane_changers_count_in_every_lane_they_use(tmp_path):
    rows = [("a", 0.0, 1, 0.0, 10.0), ("a", 1.0, 2, 10.0, 10.0), ("b", 2.0, 2, 0.0, 10.0)]
    result = ingest_demand(write_rows(tmp_path / "traj.csv", rows), duration_seconds=3600.0)
    assert result.lane_entries[0] == 1
    assert result.lane_entries[1] == 2


def test_desired_speed_is_per_vehicle_p95(tmp_path):
    rows = [("solo", float(t), 3, float(t), float(t)) for t in range(21)]
    result = ingest_demand(write_rows(tmp_path / "traj.csv", rows))
    assert result.duration_seconds == 20.0
    assert result.speeds.mean == pytest.approx(19.0)
    assert result.speeds.n_vehicles == 1
    assert result.lane_entries[2] == 1


def test_config_fragment_loads_as_an_experiment(tmp_path):
    rows = [(f"car{i}", float(i), 1, 0.0, 11.0) for i in range(10)]
    result = ingest_demand(write_rows(tmp_path / "traj.csv", rows), duration_seconds=100.0)
    fragment = result.write_config_fragment(str(tmp_path / "demand.env"))
    cfg = load_experiment_config(fragment)
    assert cfg.traffic.demand.lane_rates[0] == pytest.approx(360.0)
    assert cfg.traffic.styles.mainstream_v0 == pytest.approx(11.0)


def test_malformed_rows_are_listed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("vehicle_id,t,lane,x,v\na,0,1,0,10\nb,zero,1,0,10\nc,1,1.5,0,10\n")
    with pytest.raises(ValueError, match="line 3") as error:
        read_trajectories(str(path))
    assert "line 4" in str(error.value)


def test_missing_columns_and_empty_files(tmp_path):
    missing = tmp_path / "missing.csv"
    missing.write_text("vehicle_id,t,lane\na,0,1\n")
    with pytest.raises(ValueError, match="Missing required columns"):
        read_trajectories(str(missing))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError):
        read_trajectories(str(empty))
    header_only = tmp_path / "header.csv"
    header_only.write_text("vehicle_id,t,lane,x,v\n")
    with pytest.raises(ValueError):
        read_trajectories(str(header_only))


def test_zero_duration_needs_explicit_window(tmp_path):
    path = write_rows(tmp_path / "traj.csv", [("a", 5.0, 1, 0.0, 10.0)])
    with pytest.raises(ValueError):
        ingest_demand(path)
    assert ingest_demand(path, duration_seconds=3600.0).profile.lane_rates[0] == pytest.approx(1.0)

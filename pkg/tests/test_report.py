import pandas as pd
import pytest

from app.harness.evaluation import Metrics
from app.harness.report import METRIC_COLUMNS, curve_plot_data, emit_report


def sample_metrics(label="l3is"):
    return Metrics(label=label, success_rate=0.99, success_std=0.01, collision_rate=0.0, collision_std=0.0,
                   timeout_rate=0.01, timeout_std=0.01, avg_reward=8.5, avg_reward_std=0.2,
                   intervention_rate=1.5, intervention_std=0.1, n_seeds=3, n_episodes=3000)


def sample_curve():
    return pd.DataFrame({"seed": [0, 0, 1, 1], "step": [0, 100, 0, 100], "avg_reward": [-5.0, 5.0, -3.0, 7.0],
                         "success_rate": [0.0, 0.5, 0.2, 0.7], "collision_rate": [1.0, 0.5, 0.8, 0.3]})


def test_single_metrics_row(tmp_path):
    written = emit_report([sample_metrics()], str(tmp_path))
    assert written == [str(tmp_path / "metrics.csv")]
    table = pd.read_csv(tmp_path / "metrics.csv")
    assert list(table.columns) == METRIC_COLUMNS
    assert len(table) == 1
    assert table.loc[0, "success_rate"] == pytest.approx(0.99)


def test_outputs_are_byte_identical(tmp_path):
    sweep = pd.DataFrame([(0.0, 0.9, 0.01, 8.0, 0.1, 0.9, 0.01, 8.0, 0.1)],
                         columns=["delay_seconds", "al3is_success", "al3is_success_std", "al3is_reward",
                                  "al3is_reward_std", "l3is_success", "l3is_success_std", "l3is_reward",
                                  "l3is_reward_std"])
    for name in ("first", "second"):
        emit_report([sample_metrics()], str(tmp_path / name), curves={"l3is": sample_curve()}, sweep=sweep)
    for filename in ("metrics.csv", "plot_data.csv", "delay_table.csv"):
        assert (tmp_path / "first" / filename).read_bytes() == (tmp_path / "second" / filename).read_bytes()


def test_curve_plot_data_averages_seeds():
    data = curve_plot_data({"l3is": sample_curve()})
    reward = data[data["series"] == "l3is_reward"]
    assert reward["x"].tolist() == [0.0, 100.0]
    assert reward["y"].tolist() == [-4.0, 6.0]


def test_empty_metrics_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_report([], str(tmp_path))


def test_png_plots(tmp_path):
    pytest.importorskip("matplotlib")
    written = emit_report([sample_metrics()], str(tmp_path), curves={"l3is": sample_curve()}, plots=True)
    assert str(tmp_path / "learning_reward.png") in written
    assert (tmp_path / "learning_success.png").stat().st_size > 0

"""Full-scale runs; excluded by default, select with ``pytest -m slow``."""
import numpy as np
import pytest

from app.harness.evaluation import results_frame, run_eval
from app.harness.experiment import ExperimentConfig, Variant
from app.harness.sweep import delay_sweep
from app.harness.training import run_training, train_style_classifier
from app.traffic.road import DemandProfile, RoadConfig, StyleRanges
from app.traffic.spawner import Spawner

pytestmark = pytest.mark.slow


def test_arrival_rates_over_a_hundred_hours():
    demand = DemandProfile()
    road = RoadConfig()
    spawner = Spawner(road, demand, StyleRanges(), np.random.default_rng(7))
    steps = int(100 * 3600 / road.dt)
    counts = spawner.draw_arrivals(steps).sum(axis=0)
    expected = np.array(demand.lane_rates) * 100
    np.testing.assert_allclose(counts, expected, rtol=0.02)


def test_style_classifier_on_generated_data():
    result = train_style_classifier(ExperimentConfig(variant=Variant.L3IS), seed=0)
    assert result.test_accuracy >= 0.9


def test_trained_l3is_merges_without_collisions(tmp_path):
    cfg = ExperimentConfig(variant=Variant.L3IS)
    report = run_training(cfg, str(tmp_path))
    metrics, _ = run_eval(report.checkpoints, cfg.eval_episodes, list(cfg.seeds), cfg=cfg)
    assert metrics.success_rate >= 0.95
    assert metrics.collision_rate == 0.0


def pooled_std(*stds):
    return float(np.sqrt(np.mean(np.square(stds))))


def test_l3is_beats_the_baseline(tmp_path):
    success = {}
    for variant in (Variant.BASELINE, Variant.L3IS):
        cfg = ExperimentConfig(variant=variant)
        report = run_training(cfg, str(tmp_path / variant.value))
        metrics, _ = run_eval(report.checkpoints, cfg.eval_episodes, list(cfg.seeds), cfg=cfg)
        success[variant] = metrics.success_rate
    assert success[Variant.L3IS] - success[Variant.BASELINE] >= 0.03


def test_success_falls_with_delay_and_augmentation_helps(tmp_path):
    table, _ = delay_sweep(ExperimentConfig(), str(tmp_path), delays=(1.0, 3.0, 10.0))
    rows = table.set_index("delay_seconds")
    for shorter, longer in ((1.0, 3.0), (3.0, 10.0)):
        gap = rows.loc[shorter, "al3is_success"] - rows.loc[longer, "al3is_success"]
        assert gap > pooled_std(rows.loc[shorter, "al3is_success_std"], rows.loc[longer, "al3is_success_std"])
    assert rows.loc[1.0, "al3is_success"] > rows.loc[1.0, "l3is_success"]


def test_full_runs_reproduce_their_metrics(tmp_path):
    cfg = ExperimentConfig(variant=Variant.L3IS, training_steps=36000, eval_episodes=200)
    rows = []
    for attempt in ("first", "second"):
        report = run_training(cfg, str(tmp_path / attempt))
        metrics, results = run_eval(report.checkpoints, cfg.eval_episodes, list(cfg.seeds), cfg=cfg)
        rows.append((metrics.to_row(), results_frame(results).to_csv(index=False, float_format="%.6f"),
                     report.curve().to_csv(index=False, float_format="%.6f")))
    assert rows[0] == rows[1]

"""Delay sensitivity: AL3IS trained per delay against L3IS evaluated under the same delay."""
import os

import pandas as pd

from app.harness.evaluation import results_frame, run_eval
from app.harness.experiment import ExperimentConfig, Variant
from app.harness.training import run_training
from app.utils.logger import logger

SWEEP_COLUMNS = ["delay_seconds", "al3is_success", "al3is_success_std", "al3is_reward", "al3is_reward_std",
                 "l3is_success", "l3is_success_std", "l3is_reward", "l3is_reward_std"]


def _pair(metrics):
    return metrics.success_rate, metrics.success_std, metrics.avg_reward, metrics.avg_reward_std


def delay_sweep(base_cfg: ExperimentConfig, out_dir, delays=None):
    """Train/evaluate both agents at every delay

    The zero-delay row is the plain L3IS result for both columns. L3IS is trained once without
    delay and evaluated behind the delay wrapper (without augmentation) unless
    ``delay.retrain_under_delay`` is set.

    Returns:
        tuple: (table DataFrame, long-form plot data DataFrame)
    """
    delays = tuple(delays if delays is not None else base_cfg.delay.sweep_delays)
    os.makedirs(out_dir, exist_ok=True)
    seeds = list(base_cfg.seeds)

    l3is_cfg = base_cfg.with_overrides(variant=Variant.L3IS, delay_seconds=0.0)
    l3is_dir = os.path.join(out_dir, "l3is")
    l3is = run_training(l3is_cfg, l3is_dir)
    classifiers = l3is.classifiers
    zero, zero_results = run_eval(l3is.checkpoints, base_cfg.eval_episodes, seeds, cfg=l3is_cfg, label="l3is@0")
    results_frame(zero_results).to_csv(os.path.join(l3is_dir, "episodes_delay_0.csv"), index=False,
                                       float_format="%.6f")
    rows = [(0.0, *_pair(zero), *_pair(zero))]

    for delay in delays:
        al3is_cfg = base_cfg.with_overrides(variant=Variant.AL3IS, delay_seconds=float(delay))
        al3is_dir = os.path.join(out_dir, f"al3is_{delay:g}s")
        al3is = run_training(al3is_cfg, al3is_dir, classifiers=classifiers)
        al3is_metrics, _ = run_eval(al3is.checkpoints, base_cfg.eval_episodes, seeds, cfg=al3is_cfg,
                                    label=f"al3is@{delay:g}")

        under_cfg = base_cfg.with_overrides(variant=Variant.L3IS_UNDER_DELAY, delay_seconds=float(delay))
        checkpoints = l3is.checkpoints
        if under_cfg.delay.retrain_under_delay:
            checkpoints = run_training(under_cfg, os.path.join(out_dir, f"l3is_retrained_{delay:g}s"),
                                       classifiers=classifiers).checkpoints
        under_metrics, _ = run_eval(checkpoints, base_cfg.eval_episodes, seeds, cfg=under_cfg,
                                    label=f"l3is_under_delay@{delay:g}")
        rows.append((float(delay), *_pair(al3is_metrics), *_pair(under_metrics)))
        logger.info(f"Delay {delay}s: AL3IS success {al3is_metrics.success_rate:.3f}, "
                    f"L3IS success {under_metrics.success_rate:.3f}")

    table = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    return table, sweep_plot_data(table)


def sweep_plot_data(table):
    """(x, y, series) rows: success and reward per agent against the delay"""
    records = []
    for _, row in table.iterrows():
        for agent in ("al3is", "l3is"):
            records.append((row["delay_seconds"], row[f"{agent}_success"], f"{agent}_success"))
            records.append((row["delay_seconds"], row[f"{agent}_reward"], f"{agent}_reward"))
    return pd.DataFrame(records, columns=["x", "y", "series"])

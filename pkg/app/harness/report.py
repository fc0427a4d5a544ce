"""Tables and plot data for finished evaluations, with optional matplotlib renderings."""
import os

import pandas as pd

from app.harness.evaluation import Metrics
from app.harness.sweep import sweep_plot_data
from app.utils.logger import logger

FLOAT_FORMAT = "%.6f"
METRIC_COLUMNS = list(Metrics.__dataclass_fields__)


def metrics_table(metrics):
    return pd.DataFrame([m.to_row() for m in metrics], columns=METRIC_COLUMNS)


def curve_plot_data(curves):
    """Learning curves (label -> frame with step/avg_reward/success_rate) as (x, y, series) rows"""
    records = []
    for label in sorted(curves):
        frame = curves[label]
        grouped = frame.groupby("step", sort=True)[["avg_reward", "success_rate"]].mean()
        for step, row in grouped.iterrows():
            records.append((float(step), float(row["avg_reward"]), f"{label}_reward"))
            records.append((float(step), float(row["success_rate"]), f"{label}_success"))
    return pd.DataFrame(records, columns=["x", "y", "series"])


def _write_csv(frame, path):
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def render_plot(plot_data, path, xlabel, ylabel_suffix):
    """One PNG with a line per series whose name ends in ``ylabel_suffix``"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    subset = plot_data[plot_data["series"].str.endswith(ylabel_suffix)]
    if subset.empty:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    for series, group in subset.groupby("series", sort=True):
        ax.plot(group["x"], group["y"], marker="o", label=series)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel_suffix)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def emit_report(metrics, out_dir, curves=None, sweep=None, plots=False):
    """Write the metrics table, plot data and (optionally) PNG plots

    Args:
        metrics (list[Metrics]): At least one evaluation summary
        out_dir (str): Target directory
        curves (dict|None): label -> learning-curve frame
        sweep (pd.DataFrame|None): Delay-sweep table
        plots (bool): Also render PNG files

    Returns:
        list[str]: Written file paths
    """
    if not metrics:
        raise ValueError("emit_report needs at least one Metrics entry")
    os.makedirs(out_dir, exist_ok=True)
    written = [_write_csv(metrics_table(metrics), os.path.join(out_dir, "metrics.csv"))]

    plot_frames = []
    if curves:
        plot_frames.append(curve_plot_data(curves))
    if sweep is not None:
        written.append(_write_csv(sweep, os.path.join(out_dir, "delay_table.csv")))
        plot_frames.append(sweep_plot_data(sweep))
    if plot_frames:
        plot_data = pd.concat(plot_frames, ignore_index=True)
        written.append(_write_csv(plot_data, os.path.join(out_dir, "plot_data.csv")))
        if plots:
            if curves:
                curve_data = curve_plot_data(curves)
                for suffix in ("reward", "success"):
                    path = render_plot(curve_data, os.path.join(out_dir, f"learning_{suffix}.png"), "step", suffix)
                    if path:
                        written.append(path)
            if sweep is not None:
                path = render_plot(sweep_plot_data(sweep), os.path.join(out_dir, "delay_success.png"),
                                   "delay (s)", "success")
                if path:
                    written.append(path)
    logger.info(f"Report written to {out_dir} ({len(written)} files)")
    return written

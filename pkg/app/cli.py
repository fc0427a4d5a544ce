"""Command-line surface: train, eval, sweep, ingest, report and serve."""
import glob
import logging
import os
import re
import sys

import click
import pandas as pd

from app.harness.agent import MergeAgent
from app.harness.evaluation import Metrics, results_frame, run_eval
from app.harness.experiment import Variant, experiment_from_dict, load_experiment_config
from app.harness.ingest import ingest_demand
from app.harness.report import METRIC_COLUMNS, emit_report
from app.harness.sweep import delay_sweep
from app.harness.training import run_training
from app.models.run_model import RunModel
from app.utils.logger import enable_console_logging, logger

FLOAT_FORMAT = "%.6f"


def parse_seeds(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter("seeds must be a comma-separated list of integers")


def parse_delays(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter("delays must be a comma-separated list of seconds")


def fail(command, error):
    logger.error(f"Error in {command}: {str(error)}")
    click.echo(f"error: {error}", err=True)
    sys.exit(1)


def experiment_options(func):
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="Key-value config file"),
        click.option("--variant", type=click.Choice([v.value for v in Variant]), default=None),
        click.option("--delay-seconds", type=float, default=None),
        click.option("--seeds", callback=parse_seeds, default=None, help="Comma-separated seeds"),
        click.option("--episodes", type=int, default=None, help="Evaluation episodes per seed"),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                     help="Runs directory (defaults to RUNS_DIR)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_cfg(config_path, variant, delay_seconds, seeds, episodes, **extra):
    return load_experiment_config(
        config_path,
        variant=Variant(variant) if variant else None,
        delay_seconds=delay_seconds,
        seeds=seeds,
        eval_episodes=episodes,
        **extra,
    )


def write_eval_outputs(run_dir, metrics, results, suffix=""):
    paths = [
        os.path.join(run_dir, f"metrics{suffix}.csv"),
        os.path.join(run_dir, f"episodes{suffix}.csv"),
    ]
    pd.DataFrame([metrics.to_row()], columns=METRIC_COLUMNS).to_csv(paths[0], index=False,
                                                                    float_format=FLOAT_FORMAT)
    results_frame(results).to_csv(paths[1], index=False, float_format=FLOAT_FORMAT)
    return paths


def echo_metrics(metrics: Metrics):
    click.echo(f"{metrics.label}: success {metrics.success_rate:.4f} ± {metrics.success_std:.4f}, "
               f"collision {metrics.collision_rate:.4f}, timeout {metrics.timeout_rate:.4f}, "
               f"reward {metrics.avg_reward:.3f} ± {metrics.avg_reward_std:.3f}, "
               f"interventions/episode {metrics.intervention_rate:.3f}")


@click.group()
@click.option("--verbose", is_flag=True, help="Mirror log records to stderr")
def cli(verbose):
    """On-ramp merging lab"""
    if verbose:
        enable_console_logging(logging.INFO)


@cli.command()
@experiment_options
@click.option("--steps", type=int, default=None, help="Environment steps per seed")
@click.option("--no-safety", is_flag=True, help="Ablation: disable the safety filter")
@click.option("--no-inference", is_flag=True, help="Ablation: zero the style channel")
@click.option("--plots", is_flag=True, help="Render PNG plots")
def train(config_path, variant, delay_seconds, seeds, episodes, out_dir, steps, no_safety, no_inference, plots):
    """Train the configured variant for every seed, then evaluate it"""
    try:
        cfg = load_cfg(config_path, variant, delay_seconds, seeds, episodes, training_steps=steps,
                       use_safety=False if no_safety else None, use_inference=False if no_inference else None)
        model = RunModel(out_dir)
        run_id, run_dir = model.create_run("train", cfg)
        report = run_training(cfg, run_dir)
        metrics, results = run_eval(report.checkpoints, cfg.eval_episodes, list(cfg.seeds), cfg=cfg)
        written = write_eval_outputs(run_dir, metrics, results)
        written += emit_report([metrics], run_dir, curves={cfg.variant.value: report.curve()}, plots=plots)
        written += list(report.checkpoints.values())
        written.append(os.path.join(run_dir, "learning_curve.csv"))
        model.add_artifacts(run_id, written)
        model.update_run(run_id, status="finished")
        echo_metrics(metrics)
        click.echo(f"run {run_id}: {run_dir}")
    except Exception as e:
        fail("train", e)


def checkpoints_of_run(model: RunModel, run_id):
    run_dir = model.run_path(run_id)
    found = {}
    for path in sorted(glob.glob(os.path.join(run_dir, "seed_*", "agent.npz"))):
        match = re.search(r"seed_(-?\d+)", path)
        found[int(match.group(1))] = path
    if not found:
        raise ValueError(f"Run {run_id} holds no agent checkpoints")
    return found


def stored_config(checkpoints):
    path = next(iter(checkpoints.values())) if isinstance(checkpoints, dict) else checkpoints
    _, meta = MergeAgent.load(path)
    return experiment_from_dict(meta.get("config", {}))


@cli.command(name="eval")
@experiment_options
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None, help="Agent checkpoint (.npz)")
@click.option("--run", "source_run", default=None, help="Evaluate the checkpoints of a training run")
def evaluate(config_path, variant, delay_seconds, seeds, episodes, out_dir, checkpoint, source_run):
    """Deterministic evaluation of saved agents"""
    try:
        if (checkpoint is None) == (source_run is None):
            raise ValueError("Pass exactly one of --checkpoint or --run")
        model = RunModel(out_dir)
        checkpoints = checkpoint if checkpoint is not None else checkpoints_of_run(model, source_run)
        # seeds/episodes alone keep the configuration stored in the checkpoint
        cfg = None
        if config_path or variant or delay_seconds is not None:
            cfg = load_cfg(config_path, variant, delay_seconds, seeds, episodes)
        stored = stored_config(checkpoints)
        eval_seeds = list(seeds or (cfg or stored).seeds)
        if isinstance(checkpoints, dict) and not seeds and cfg is None:
            eval_seeds = sorted(checkpoints)
        n_episodes = episodes or (cfg or stored).eval_episodes
        run_id, run_dir = model.create_run("eval", cfg, extra={"source": source_run or checkpoint})
        metrics, results = run_eval(checkpoints, n_episodes, eval_seeds, cfg=cfg)
        written = write_eval_outputs(run_dir, metrics, results)
        model.add_artifacts(run_id, written)
        model.update_run(run_id, status="finished", variant=metrics.label)
        echo_metrics(metrics)
        click.echo(f"run {run_id}: {run_dir}")
    except Exception as e:
        fail("eval", e)


@cli.command()
@experiment_options
@click.option("--delays", callback=parse_delays, default=None, help="Comma-separated delays in seconds")
@click.option("--steps", type=int, default=None, help="Environment steps per seed")
@click.option("--plots", is_flag=True, help="Render PNG plots")
def sweep(config_path, variant, delay_seconds, seeds, episodes, out_dir, delays, steps, plots):
    """Delay sensitivity of AL3IS against L3IS under the same delay"""
    try:
        cfg = load_cfg(config_path, None, None, seeds, episodes, training_steps=steps)
        model = RunModel(out_dir)
        run_id, run_dir = model.create_run("sweep", cfg, extra={"delays": list(delays or cfg.delay.sweep_delays)})
        table, _ = delay_sweep(cfg, run_dir, delays)
        rows = [Metrics(label=f"delay_{row.delay_seconds:g}s", success_rate=row.al3is_success,
                        success_std=row.al3is_success_std, collision_rate=float("nan"), collision_std=float("nan"),
                        timeout_rate=float("nan"), timeout_std=float("nan"), avg_reward=row.al3is_reward,
                        avg_reward_std=row.al3is_reward_std, intervention_rate=float("nan"),
                        intervention_std=float("nan"), n_seeds=len(cfg.seeds), n_episodes=cfg.eval_episodes)
                for row in table.itertuples()]
        written = emit_report(rows, run_dir, sweep=table, plots=plots)
        model.add_artifacts(run_id, written)
        model.update_run(run_id, status="finished")
        click.echo(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
        click.echo(f"run {run_id}: {run_dir}")
    except Exception as e:
        fail("sweep", e)


@cli.command()
@click.argument("trajectory_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--lanes", type=int, default=5, help="Number of main lanes")
@click.option("--first-lane", type=int, default=1, help="Label of the first main lane in the file")
@click.option("--duration", type=float, default=None, help="Observation window in seconds")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the demand config fragment here")
def ingest(trajectory_csv, lanes, first_lane, duration, out_path):
    """Derive lane demand and desired speeds from a trajectory CSV"""
    try:
        result = ingest_demand(trajectory_csv, num_lanes=lanes, duration_seconds=duration, first_lane=first_lane)
        if out_path:
            result.write_config_fragment(out_path)
        click.echo(result.config_fragment(), nl=False)
    except Exception as e:
        fail("ingest", e)


@cli.command()
@click.option("--run", "run_ids", multiple=True, required=True, help="Run ids to include")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--runs-dir", type=click.Path(file_okay=False), default=None)
@click.option("--plots", is_flag=True, help="Render PNG plots")
def report(run_ids, out_dir, runs_dir, plots):
    """Combine the metrics and learning curves of finished runs"""
    try:
        model = RunModel(runs_dir)
        metrics, curves, sweep_table = [], {}, None
        for run_id in run_ids:
            run_dir = model.run_path(run_id)
            if model.get_run(run_id) is None:
                raise ValueError(f"Run not found: {run_id}")
            metrics_path = os.path.join(run_dir, "metrics.csv")
            if os.path.isfile(metrics_path):
                for row in pd.read_csv(metrics_path).to_dict(orient="records"):
                    row["label"] = f"{run_id}:{row['label']}"
                    metrics.append(Metrics(**row))
            curve_path = os.path.join(run_dir, "learning_curve.csv")
            if os.path.isfile(curve_path):
                curves[run_id] = pd.read_csv(curve_path)
            delay_path = os.path.join(run_dir, "delay_table.csv")
            if os.path.isfile(delay_path):
                sweep_table = pd.read_csv(delay_path)
        written = emit_report(metrics, out_dir, curves=curves or None, sweep=sweep_table, plots=plots)
        for path in written:
            click.echo(path)
    except Exception as e:
        fail("report", e)


@cli.command()
@click.option("--host", default=lambda: os.getenv("HOST", "0.0.0.0"))
@click.option("--port", type=int, default=lambda: int(os.getenv("PORT", "5000")))
@click.option("--runs-dir", type=click.Path(file_okay=False), default=None)
def serve(host, port, runs_dir):
    """Serve the read-only results browser"""
    from app import create_app

    debug = os.getenv("FLASK_ENV", "production") == "development"
    logger.info(f"Serving results browser on {host}:{port}")
    create_app(runs_dir).run(host=host, port=port, debug=debug)

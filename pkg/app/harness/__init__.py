from app.harness.agent import MergeAgent, build_env
from app.harness.evaluation import EpisodeResult, Metrics, aggregate_metrics, evaluate_policy, run_eval
from app.harness.experiment import ExperimentConfig, Variant, load_experiment_config
from app.harness.ingest import DemandIngest, ingest_demand
from app.harness.report import emit_report
from app.harness.sweep import delay_sweep
from app.harness.training import TrainingReport, run_training, train_agent

__all__ = [
    "MergeAgent", "build_env", "EpisodeResult", "Metrics", "aggregate_metrics", "evaluate_policy",
    "run_eval", "ExperimentConfig", "Variant", "load_experiment_config", "DemandIngest", "ingest_demand",
    "emit_report", "delay_sweep", "TrainingReport", "run_training", "train_agent",
]

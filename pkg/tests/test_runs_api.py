import json

import pandas as pd
import pytest

from app import create_app
from app.harness.report import METRIC_COLUMNS
from app.models.run_model import MANIFEST_NAME, RunModel
from tests.helpers import tiny_config
from tests.test_report import sample_metrics


@pytest.fixture
def runs_dir(tmp_path):
    model = RunModel(str(tmp_path))
    run_id, run_dir = model.create_run("train", tiny_config(), run_id="train-demo")
    metrics_path = f"{run_dir}/metrics.csv"
    pd.DataFrame([sample_metrics().to_row()], columns=METRIC_COLUMNS).to_csv(metrics_path, index=False)
    (tmp_path / "train-demo" / "notes.txt").write_text("not an artifact")
    model.add_artifacts(run_id, [metrics_path])
    model.update_run(run_id, status="finished")
    return tmp_path


@pytest.fixture
def client(runs_dir):
    return create_app(str(runs_dir)).test_client()


def test_list_runs(client):
    response = client.get("/api/v1/runs")
    assert response.status_code == 200
    body = response.get_json()
    assert body["status"] == "success"
    assert [run["run_id"] for run in body["data"]] == ["train-demo"]
    assert body["data"][0]["status"] == "finished"


def test_get_run_includes_metrics(client):
    response = client.get("/api/v1/runs/train-demo")
    assert response.status_code == 200
    data = response.get_json()["data"]
    assert data["variant"] == "baseline"
    assert data["artifacts"] == ["metrics.csv"]
    assert data["metrics"][0]["success_rate"] == pytest.approx(0.99)


def test_unknown_and_invalid_runs(client):
    assert client.get("/api/v1/runs/missing").status_code == 404
    assert client.get("/api/v1/runs/bad$id").status_code == 400


def test_artifact_download(client):
    response = client.get("/api/v1/runs/train-demo/artifacts/metrics.csv")
    assert response.status_code == 200
    assert response.data.decode().startswith(",".join(METRIC_COLUMNS))


def test_only_recorded_artifacts_are_served(client):
    assert client.get("/api/v1/runs/train-demo/artifacts/notes.txt").status_code == 404
    assert client.get("/api/v1/runs/train-demo/artifacts/sub/../../other.csv").status_code == 404


def test_manifest_records_provenance(runs_dir):
    manifest = json.loads((runs_dir / "train-demo" / MANIFEST_NAME).read_text())
    assert manifest["config_hash"] == tiny_config().config_hash()
    assert manifest["seeds"] == [0]
    assert manifest["std_provenance"] == "across seeds"
    assert "numpy" in manifest["versions"]
    assert manifest["created_at"] and manifest["updated_at"]

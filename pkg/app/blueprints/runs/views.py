import os

import pandas as pd
from flask import current_app, jsonify, send_file

from app.blueprints.runs import runs_bp
from app.models.run_model import RunModel
from app.utils.logger import logger


def get_run_model():
    return RunModel(current_app.config['RUNS_DIR'])


def read_metrics(run_dir):
    """Metrics table of a run as records, or [] when the run has none"""
    path = os.path.join(run_dir, "metrics.csv")
    if not os.path.isfile(path):
        return []
    return pd.read_csv(path).to_dict(orient="records")


@runs_bp.route('', methods=['GET'])
def list_runs():
    """List run manifests (newest first)

    Returns:
        JSON response with the manifests or an error message
    """
    try:
        runs = get_run_model().list_runs()
        summaries = [{key: run.get(key) for key in ("run_id", "command", "variant", "config_hash", "status",
                                                    "created_at", "updated_at")} for run in runs]
        return jsonify({'status': 'success', 'data': summaries}), 200
    except Exception as e:
        logger.error(f"Error in list_runs: {str(e)}")
        return jsonify({'status': 'error', 'message': 'Could not list runs'}), 500


@runs_bp.route('/<run_id>', methods=['GET'])
def get_run(run_id):
    """Manifest and metrics table of one run"""
    try:
        model = get_run_model()
        manifest = model.get_run(run_id)
        if manifest is None:
            return jsonify({'status': 'error', 'message': 'Run not found'}), 404
        data = dict(manifest)
        data['metrics'] = read_metrics(model.run_path(run_id))
        return jsonify({'status': 'success', 'data': data}), 200
    except ValueError as e:
        return jsonify({'status': 'error', 'message': str(e)}), 400
    except Exception as e:
        logger.error(f"Error in get_run: {str(e)}")
        return jsonify({'status': 'error', 'message': 'Could not read run'}), 500


@runs_bp.route('/<run_id>/artifacts/<path:name>', methods=['GET'])
def get_artifact(run_id, name):
    """Send one recorded artifact file"""
    try:
        path = get_run_model().artifact_path(run_id, name)
        if path is None:
            return jsonify({'status': 'error', 'message': 'Artifact not found'}), 404
        return send_file(path, as_attachment=True, download_name=os.path.basename(path))
    except ValueError as e:
        return jsonify({'status': 'error', 'message': str(e)}), 400
    except Exception as e:
        logger.error(f"Error in get_artifact: {str(e)}")
        return jsonify({'status': 'error', 'message': 'Could not send artifact'}), 500

import json
import os
import platform
import re
import uuid
from datetime import datetime
from importlib import metadata

from app.utils.logger import logger


MANIFEST_NAME = "manifest.json"
TRACKED_PACKAGES = ("numpy", "pandas", "Flask", "click", "python-dotenv", "matplotlib")
RUN_ID_PATTERN = re.compile(r"^[A-Za-z0-9_.-]+$")


def package_versions():
    versions = {"python": platform.python_version()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def stamp(manifest, is_update=False):
    """Set ISO timestamps on a manifest (created_at only on creation)"""
    now = datetime.now().isoformat(timespec="seconds")
    if not is_update:
        manifest["created_at"] = now
    manifest["updated_at"] = now
    return manifest


class RunModel:
    """File-backed model class for run directories and their manifests"""

    def __init__(self, runs_dir=None):
        """Initialize the RunModel with the runs directory (RUNS_DIR env, default ./runs)"""
        self.runs_dir = runs_dir or os.getenv("RUNS_DIR", os.path.join(os.getcwd(), "runs"))
        os.makedirs(self.runs_dir, exist_ok=True)

    def run_path(self, run_id):
        if not run_id or not RUN_ID_PATTERN.match(run_id):
            raise ValueError(f"Invalid run id: {run_id}")
        return os.path.join(self.runs_dir, run_id)

    def create_run(self, command, cfg=None, run_id=None, extra=None):
        """Create a run directory and write its manifest

        Args:
            command (str): CLI verb that produced the run
            cfg (ExperimentConfig|None): Configuration to hash and store
            run_id (str|None): Explicit id; generated when omitted
            extra (dict|None): Additional manifest fields

        Returns:
            tuple: (run_id, run directory)
        """
        run_id = run_id or f"{command}-{uuid.uuid4().hex[:10]}"
        path = self.run_path(run_id)
        os.makedirs(path, exist_ok=True)
        manifest = {
            "run_id": run_id,
            "command": command,
            "variant": cfg.variant.value if cfg is not None else None,
            "config_hash": cfg.config_hash() if cfg is not None else None,
            "config": cfg.to_dict() if cfg is not None else None,
            "seeds": list(cfg.seeds) if cfg is not None else [],
            "versions": package_versions(),
            "std_provenance": "across seeds",
            "status": "running",
            "artifacts": [],
        }
        manifest.update(extra or {})
        self._write(run_id, stamp(manifest))
        logger.info(f"Run {run_id} created in {path}")
        return run_id, path

    def update_run(self, run_id, **fields):
        """Merge fields into a manifest; returns the updated manifest or None on error"""
        try:
            manifest = self.get_run(run_id)
            if manifest is None:
                return None
            manifest.update(fields)
            self._write(run_id, stamp(manifest, is_update=True))
            return manifest
        except (OSError, ValueError) as e:
            logger.error(f"Error in update_run: {str(e)}")
            return None

    def add_artifacts(self, run_id, paths):
        """Record artifact files (stored relative to the run directory)"""
        manifest = self.get_run(run_id)
        if manifest is None:
            return None
        base = self.run_path(run_id)
        names = list(manifest.get("artifacts", []))
        for path in paths:
            rel = os.path.relpath(path, base)
            if rel not in names:
                names.append(rel)
        return self.update_run(run_id, artifacts=sorted(names))

    def get_run(self, run_id):
        """Read one manifest

        Returns:
            dict|None: Manifest, or None if missing or unreadable
        """
        try:
            with open(os.path.join(self.run_path(run_id), MANIFEST_NAME)) as handle:
                return json.load(handle)
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error reading manifest of run {run_id}: {str(e)}")
            return None

    def list_runs(self):
        """All readable manifests, newest first"""
        runs = []
        for name in sorted(os.listdir(self.runs_dir)):
            if not RUN_ID_PATTERN.match(name) or not os.path.isdir(os.path.join(self.runs_dir, name)):
                continue
            manifest = self.get_run(name)
            if manifest is not None:
                runs.append(manifest)
        return sorted(runs, key=lambda m: (m.get("created_at") or "", m["run_id"]), reverse=True)

    def artifact_path(self, run_id, name):
        """Absolute path of a recorded artifact, or None when it is not part of the run"""
        manifest = self.get_run(run_id)
        if manifest is None or name not in manifest.get("artifacts", []):
            return None
        path = os.path.realpath(os.path.join(self.run_path(run_id), name))
        if not path.startswith(os.path.realpath(self.run_path(run_id)) + os.sep) or not os.path.isfile(path):
            return None
        return path

    def _write(self, run_id, manifest):
        path = os.path.join(self.run_path(run_id), MANIFEST_NAME)
        tmp = f"{path}.tmp"
        with open(tmp, "w") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
        os.replace(tmp, path)

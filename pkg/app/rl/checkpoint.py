"""Versioned numpy checkpoint files"""
import json
import os
import zipfile

import numpy as np

from app.utils.logger import logger

FORMAT_VERSION = 1
VERSION_KEY = "__format_version__"
META_KEY = "__meta__"


def save_checkpoint(path, arrays, meta=None):
    """Write named arrays plus JSON metadata to an ``.npz`` archive

    Args:
        path (str): Target file; must end in ``.npz``
        arrays (dict): Name -> numpy array
        meta (dict): JSON-serialisable metadata

    Returns:
        str: The written path
    """
    if not str(path).endswith(".npz"):
        raise ValueError(f"Checkpoint path must end in .npz: {path}")
    reserved = {VERSION_KEY, META_KEY} & set(arrays)
    if reserved:
        raise ValueError(f"Reserved checkpoint keys used: {sorted(reserved)}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    payload = dict(arrays)
    payload[VERSION_KEY] = np.array(FORMAT_VERSION)
    payload[META_KEY] = np.array(json.dumps(meta or {}, sort_keys=True))
    np.savez(path, **payload)
    logger.info(f"Checkpoint saved to {path} ({len(arrays)} arrays)")
    return path


def load_checkpoint(path):
    """Read a checkpoint written by ``save_checkpoint``

    Returns:
        tuple: (arrays dict, meta dict)

    Raises:
        ValueError: Missing, corrupt or foreign files and version mismatches
    """
    if not os.path.exists(path):
        raise ValueError(f"Checkpoint not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as archive:
            contents = {key: archive[key] for key in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile, EOFError) as e:
        logger.error(f"Error in load_checkpoint: {str(e)}")
        raise ValueError(f"Corrupt checkpoint {path}: {str(e)}")

    if VERSION_KEY not in contents or META_KEY not in contents:
        logger.error(f"Checkpoint {path} lacks version or metadata entries")
        raise ValueError(f"Not a merge-lab checkpoint: {path}")
    version = int(contents.pop(VERSION_KEY))
    if version != FORMAT_VERSION:
        raise ValueError(f"Unsupported checkpoint format {version} (expected {FORMAT_VERSION})")
    try:
        meta = json.loads(str(contents.pop(META_KEY)))
    except json.JSONDecodeError as e:
        raise ValueError(f"Corrupt checkpoint metadata in {path}: {str(e)}")
    return contents, meta

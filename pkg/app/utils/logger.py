import logging
import os
import sys
from logging.handlers import RotatingFileHandler

# Log files live under LOG_DIR (default ./log)
LOG_DIR = os.getenv("LOG_DIR", os.path.join(os.getcwd(), "log"))
os.makedirs(LOG_DIR, exist_ok=True)

LOG_FILE = os.path.join(LOG_DIR, "merge_lab.log")

logger = logging.getLogger("merge_lab")

formatter = logging.Formatter("%(asctime)s [%(levelname)s] - %(module)s - %(message)s", datefmt="%Y-%m-%d %H:%M:%S")

# Training runs are chatty: rotate at 50MB and keep one backup
if not any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
    file_handler = RotatingFileHandler(LOG_FILE, maxBytes=50 * 1024 * 1024, backupCount=1)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

# MERGE_LAB_ENV=production keeps only errors
ENV_MODE = os.getenv("MERGE_LAB_ENV", "development")
logger.setLevel(logging.ERROR if ENV_MODE == "production" else logging.DEBUG)


def enable_console_logging(level=logging.INFO):
    """Mirror log records to stderr (used by the CLI --verbose flag)"""
    for existing in logger.handlers:
        if isinstance(existing, logging.StreamHandler) and not isinstance(existing, RotatingFileHandler):
            existing.setLevel(level)
            return existing
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    console.setLevel(level)
    logger.addHandler(console)
    return console

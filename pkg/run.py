from dotenv import load_dotenv

# Load environment variables (RUNS_DIR, LOG_DIR, MERGE_LAB_* overrides) from .env
load_dotenv()

from app.cli import cli  # noqa: E402

# This block is for running the lab directly, e.g. `python run.py train --variant l3is`
if __name__ == '__main__':
    cli()

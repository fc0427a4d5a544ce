from flask import Flask
import os
from app.utils.logger import logger


def create_app(runs_dir=None):
    app = Flask(__name__)

    # Run directories browsed by the results API
    app.config['RUNS_DIR'] = runs_dir or os.getenv("RUNS_DIR", os.path.join(os.getcwd(), "runs"))
    app.config['JSON_SORT_KEYS'] = False

    # Register Blueprints
    from app.blueprints.runs import runs_bp

    app.register_blueprint(runs_bp, url_prefix='/api/v1/runs')

    logger.info("Registered URLs:")
    for rule in app.url_map.iter_rules():
        logger.info(rule)

    return app

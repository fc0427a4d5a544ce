# Results browser: read-only routes over run directories

from flask import Blueprint

runs_bp = Blueprint('runs', __name__)

# Views import the blueprint, so they are loaded after it exists
from . import views  # noqa: E402,F401

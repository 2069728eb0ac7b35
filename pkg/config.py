# config.py
import os

from dotenv import load_dotenv

load_dotenv()

ROOT = os.path.dirname(os.path.abspath(__file__))

EXAMPLES_DIR = os.getenv("BERKDYN_EXAMPLES", os.path.join(ROOT, "data"))
LOG_LEVEL = os.getenv("BERKDYN_LOG_LEVEL", "WARNING").upper()

POWER_TOL = float(os.getenv("BERKDYN_POWER_TOL", "1e-10"))
POWER_MAX_ITER = int(os.getenv("BERKDYN_POWER_MAX_ITER", "1000000"))
WORKERS = int(os.getenv("BERKDYN_WORKERS", "1"))


def example_path(name: str) -> str:
    """Path of a bundled golden document; BERKDYN_EXAMPLES is read at call time so tests can redirect it."""
    return os.path.join(os.getenv("BERKDYN_EXAMPLES", EXAMPLES_DIR), name)

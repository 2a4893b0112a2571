"""
Script to run a DISC benchmark experiment.

Usage:
    python scripts/run_experiment.py --test lshaped --q 2 --out results/lshaped_q2
"""
import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.bench.experiment import run_experiment  # noqa: E402


if __name__ == "__main__":
    sys.exit(run_experiment())

"""
Shared fixtures.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.approx.oracle import CoefficientOracle  # noqa: E402
from src.mesh.initial import centered_square, lshape, unit_square  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run desk-scale experiment checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale experiment check, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def square_forest():
    return unit_square().to_forest()


@pytest.fixture
def lshape_forest():
    return lshape().to_forest()


@pytest.fixture
def centered_forest():
    return centered_square().to_forest()


def constant_oracle(a: float = 1.0, f: float = 0.0) -> CoefficientOracle:
    return CoefficientOracle(
        eval_A=lambda x: np.broadcast_to(a * np.eye(2), (len(x), 2, 2)).copy(),
        eval_f=lambda x: np.full(len(x), f),
        r=a,
        M=a,
    )


@pytest.fixture
def laplace_oracle():
    return constant_oracle(1.0, 0.0)

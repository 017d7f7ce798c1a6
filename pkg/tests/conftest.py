import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from campanato import (
    build_grid_space,
    line_space,
    random_metric_space,
    two_point_space,
)


@pytest.fixture(scope="session")
def two_point():
    return two_point_space()


@pytest.fixture(scope="session")
def line3():
    return line_space([0.0, 1.0, 3.0])


@pytest.fixture(scope="session")
def random8():
    return random_metric_space(8, seed=2)


@pytest.fixture(scope="session")
def random12():
    return random_metric_space(12, seed=1)


@pytest.fixture(scope="session")
def random16():
    return random_metric_space(16, seed=0)


@pytest.fixture(scope="session")
def grid64():
    return build_grid_space(1, 1.0, 64)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)

"""Shared fixtures"""

import numpy as np
import pytest

from natsearch.models.grid import GridEnvironment
from natsearch.models.noise import DepthNoiseModel
from natsearch.terrain.dem import Dem, write_dem


@pytest.fixture
def env16():
    return GridEnvironment(16, 16)


@pytest.fixture
def noise():
    return DepthNoiseModel()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def flat_dem_file(tmp_path):
    """7x7 flat posts at 1 m resolution (3x3 nodes at spacing 3)."""
    path = tmp_path / "flat.asc"
    write_dem(Dem(heights=np.zeros((7, 7)), resolution=1.0), path)
    return path


def _small_config(**overrides):
    data = {
        "schema_version": 1,
        "grid": {"rows": 4, "cols": 4},
        "k": 1,
        "agents": 1,
        "policy": "rnd",
        "trials": 2,
        "budget": 20,
        "seed": 7,
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return data


@pytest.fixture
def small_config():
    """Factory for a minimal fast config dictionary: 4x4 grid, one agent."""
    return _small_config

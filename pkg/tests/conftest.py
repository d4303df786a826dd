"""Shared fixtures for the vexp-solver test suite."""

import numpy as np
import pytest
from dotenv import load_dotenv

from vexp_solver.grid_core import Grid


@pytest.fixture(scope="session", autouse=True)
def load_env():
    load_dotenv()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_interval():
    """[0, 1] with free ends, n = 101."""
    return Grid(1, 101, 0.0, 1.0, dirichlet=False)

"""
Shared fixtures for the test suite
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.social_space import GroupState
from src.world import World


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="Run the long replicate-level acceptance tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running multi-replicate test")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Fixed-seed generator"""
    return np.random.default_rng(20240601)


@pytest.fixture
def make_world():
    """
    Factory for small hand-built worlds

    ``nodes`` is a list of (group, sex, (x, y)); ``links`` a list of (i, j)
    formed at step 0 and expiring at ``expires_at``.
    """

    def _make(nodes, links=(), n_groups=1, centers=None, expires_at=1000, strict=True):
        if centers is None:
            centers = [(0.5, 0.5)] * n_groups
        groups = [GroupState(id=g, center=centers[g], target_size=0) for g in range(n_groups)]
        world = World(groups, region_side=1.0, strict=strict)
        for group, sex, position in nodes:
            world.add_node(group, sex, position, born_at=0)
        for i, j in links:
            world.add_link(i, j, formed_at=0, expires_at=expires_at)
        return world

    return _make

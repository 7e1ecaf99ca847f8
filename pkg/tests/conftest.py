"""
Shared fixtures for the exdyn tests.
"""

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from core.basin_grid import ClassifyParams
from core.complex_map import parse_map
from core.finite_space import FiniteSemiFlow, FiniteTopology

settings.register_profile("exdyn", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("exdyn")

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture
def sierpinski():
    """min_open[0] = {0}, min_open[1] = {0, 1}; both points go to 1."""
    topo = FiniteTopology(2, (frozenset({0}), frozenset({0, 1})))
    return FiniteSemiFlow(2, (1, 1)), topo


@pytest.fixture
def three_cycle_flow():
    """0 -> 1 -> 2 -> 0 with 3 feeding into the cycle, discrete topology."""
    return FiniteSemiFlow(4, (1, 2, 0, 1)), FiniteTopology.discrete(4)


@pytest.fixture
def basilica():
    return parse_map("z^2-1")


@pytest.fixture
def quick_params():
    return ClassifyParams(max_iterations=300, workers=1)


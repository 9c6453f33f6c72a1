"""
Shared fixtures for the resindex test suite
"""

import sys

import numpy as np
import pytest
from click.testing import CliRunner
from loguru import logger

from resindex.core.pendula.pendula_models import PendulaParams
from resindex.core.system.system_models import LtiSystem
from resindex.services.pendula.pendula_service import PendulaService

# Paper-style benchmark table: rows attacker, columns defender (left, middle, right, all)
BENCHMARK_TABLE = {
    "left": {"left": 6.79, "middle": 0.04, "right": 6.85, "all": 31.32},
    "middle": {"left": 1.80, "middle": 6.79, "right": 1.79, "all": 10.95},
    "right": {"left": 6.90, "middle": 0.04, "right": 6.79, "all": 31.63},
    "all": {"left": 1.19, "middle": 0.02, "right": 1.19, "all": 7.32},
}


def within_table_tolerance(actual: float, expected: float) -> bool:
    """+-0.05 absolute or 2 % relative, whichever is larger"""
    return abs(actual - expected) <= max(0.05, 0.02 * abs(expected))


@pytest.fixture(autouse=True)
def reset_logger():
    """CLI tests point loguru at CliRunner streams; restore a plain stderr sink afterwards"""
    yield
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


@pytest.fixture
def rng():
    return np.random.default_rng(20240515)


@pytest.fixture
def pendula_service():
    return PendulaService()


@pytest.fixture
def pendula_all(pendula_service):
    """Attacker and defender on every pendulum"""
    return pendula_service.build_from_names("all", "all")


@pytest.fixture
def symmetric_params():
    return PendulaParams(damping=(0.1, 0.1, 0.1))


@pytest.fixture
def scalar_system():
    """dx/dt = -x + u_a + u_d"""
    return LtiSystem(a=[[-1.0]], b_attack=[[1.0]], b_defend=[[1.0]])


@pytest.fixture
def decoupled_system():
    """Defender reaches only the first of two decoupled modes"""
    return LtiSystem(a=[[-1.0, 0.0], [0.0, -2.0]], b_attack=[[1.0], [1.0]], b_defend=[[1.0], [0.0]])


@pytest.fixture
def cli_runner():
    return CliRunner()

from random import Random

import pytest

from app.algebra.etale import EtaleAlgebra, quadratic_algebra
from app.config import SolverConfig, use_config


@pytest.fixture
def q_sqrt2() -> EtaleAlgebra:
    return quadratic_algebra(2)


@pytest.fixture
def q_sqrt2_sqrt3() -> EtaleAlgebra:
    return EtaleAlgebra((2, 3))


@pytest.fixture
def rng() -> Random:
    return Random(20240917)


@pytest.fixture
def small_config():
    """작은 예산 설정"""
    config = SolverConfig(budget=200, precision_cap=64, extra_primes=4)
    with use_config(config):
        yield config


@pytest.fixture
def base_config() -> dict:
    return SolverConfig().model_dump()

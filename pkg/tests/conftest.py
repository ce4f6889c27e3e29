import math
from functools import lru_cache

import pytest

from spdcsim.experiments import ExperimentConfig, bell_arms, twin_fields


@lru_cache(maxsize=8)
def twin_columns(s2: float, eta: float = 1.0, reps: int = 1_000_000, seed: int = 42):
    cfg = ExperimentConfig(kind="twin", gl=math.asinh(math.sqrt(s2)), eta=eta,
                           reps=reps, seed=seed)
    return twin_fields(cfg)


@lru_cache(maxsize=8)
def bell_columns(G: float, reps: int = 1_000_000, seed: int = 42):
    cfg = ExperimentConfig(kind="bell", G=G, reps=reps, seed=seed)
    return bell_arms(cfg)


@pytest.fixture(scope="session")
def twin_cache():
    return twin_columns


@pytest.fixture(scope="session")
def bell_cache():
    return bell_columns

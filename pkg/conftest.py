"""Shared pytest fixtures."""

import numpy as np
import pytest

from config import get_settings
from core.types import JointPairDistribution
from services.storage import get_artifact_store


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def uniform_joint():
    return JointPairDistribution(np.full((2, 2), 0.25))


@pytest.fixture
def two_coin_joint():
    """Equal mixture of a coin that always lands heads and one that always lands tails."""
    return JointPairDistribution(np.diag([0.5, 0.5]), ("H", "T"))


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    """Fresh output directory used as the configured default."""
    monkeypatch.setenv("PAIRCAL_OUTPUT_DIR", str(tmp_path))
    get_settings.cache_clear()
    get_artifact_store.cache_clear()
    yield tmp_path
    get_settings.cache_clear()
    get_artifact_store.cache_clear()

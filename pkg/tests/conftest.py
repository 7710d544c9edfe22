import numpy as np
import pytest
from scipy import special

from stable_area.models import InversionConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def airy():
    """(Ai, Ai', Bi, Bi') at x from scipy."""
    def _airy(x):
        return special.airy(x)
    return _airy


@pytest.fixture
def fast_inversion():
    return InversionConfig(node_count=16)

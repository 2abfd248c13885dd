import numpy as np
import pytest

from tverberg.core import ColoredConfig


@pytest.fixture
def square():
    """Q1 = {(0,0), (1,0)}, Q2 = {(0,1), (1,1)}."""
    return ColoredConfig.from_colors([[[0, 0], [1, 0]], [[0, 1], [1, 1]]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_cfg(rng, k_max=4, r_max=4, d_max=4, k_min=2, r_min=2, d_min=1):
    k = int(rng.integers(k_min, k_max + 1))
    r = int(rng.integers(r_min, r_max + 1))
    d = int(rng.integers(d_min, d_max + 1))
    return ColoredConfig(rng.standard_normal((r, k, d)))


def random_hyper_cfg(rng, k_max=4, r_max=4, d_max=4, scale=1.0):
    k = int(rng.integers(2, k_max + 1))
    r = int(rng.integers(2, r_max + 1))
    d = int(rng.integers(1, d_max + 1))
    z = scale * rng.standard_normal((r, k, d))
    x0 = np.sqrt(1 + np.sum(z**2, axis=-1, keepdims=True))
    return ColoredConfig(np.concatenate([x0, z], axis=-1), model="hyperboloid")

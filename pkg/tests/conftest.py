import numpy as np
import pytest

from resonance_py.grid import GridSpec
from resonance_py.potentials import compact, sinc


@pytest.fixture
def small_grid() -> GridSpec:
    return GridSpec(L=6.0, N=241)


@pytest.fixture
def well():
    """Double barrier: zero inside |x| < 8/3, height 2 up to |x| = 4."""
    return compact(4.0, (0.0, 0.0, 2.0), shape='steps')


@pytest.fixture
def sinc_potential():
    return sinc(1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

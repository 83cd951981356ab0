import numpy as np
import pytest

from helpers import fig1_tree


@pytest.fixture
def rng():
    return np.random.default_rng(20251127)


@pytest.fixture
def fig1():
    return fig1_tree()

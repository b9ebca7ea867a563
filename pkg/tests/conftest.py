import numpy as np
import pytest

import helpers


@pytest.fixture
def g1():
    return helpers.g1()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_image(rng):
    def make(height=16, width=16):
        return rng.uniform(0.0, 1.0, size=(height, width))

    return make

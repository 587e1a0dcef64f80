import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("frachaos", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("frachaos")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

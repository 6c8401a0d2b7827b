import hypothesis
import numpy as np
import pytest

from toda_growth.config import get_settings

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile("fast")


@pytest.fixture(autouse=True)
def fresh_settings():
    """Every test starts from the settings on disk."""
    yield get_settings(refresh=True)
    get_settings(refresh=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

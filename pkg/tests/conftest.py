import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from traffics.graphs import TestGraph

TestGraph.__test__ = False  # dataclass, not a test case

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_collection_modifyitems(config, items):
    # Acceptance runs last so unit failures surface first.
    items.sort(key=lambda it: it.fspath.basename == "test_acceptance.py")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(1234)

import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from trajdist.geometry import gen_pair

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FAMILIES = ("kappa-packed", "kappa-bounded", "backbone")

# acceptance verdict lines, repeated in the terminal summary
VERDICTS: list[str] = []


@functools.lru_cache(maxsize=None)
def cached_pair(family: str, n: int, seed: int):
    P, Q = gen_pair(family, n, seed)
    P.setflags(write=False)
    Q.setflags(write=False)
    return P, Q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)

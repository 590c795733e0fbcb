import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from se2geodesics import Covector, GroupElement

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def random_natural(rng, h3_max=3.0):
    return Covector.from_angle(rng.uniform(0, 2 * math.pi), rng.uniform(-h3_max, h3_max))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def assert_group_close(g1: GroupElement, g2: GroupElement, tol):
    assert abs(g1.x - g2.x) <= tol, (g1, g2)
    assert abs(g1.y - g2.y) <= tol, (g1, g2)
    assert abs(g1.theta - g2.theta) <= tol, (g1, g2)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

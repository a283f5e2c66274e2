import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from camouflage import build_ring, solve_policy_family, uniform_joint

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ring():
    mdp, scheme = build_ring()
    return mdp, scheme, solve_policy_family(mdp), uniform_joint(3, 2)


def seeds(count, base=0):
    return [np.random.default_rng(base + k) for k in range(count)]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])

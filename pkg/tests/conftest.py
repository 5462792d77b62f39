import os
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE_KEY = pytest.StashKey[list]()
_START_KEY = pytest.StashKey[float]()
SUITE_BUDGET_SECONDS = 300.0


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []
    config.stash[_START_KEY] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    lines = session.config.stash[_ACCEPTANCE_KEY]
    if not lines:
        return
    elapsed = time.perf_counter() - session.config.stash[_START_KEY]
    passed = elapsed < SUITE_BUDGET_SECONDS
    lines.append(f"criterion 9 [{'PASS' if passed else 'FAIL'}] suite runtime: {elapsed:.1f}s (budget {SUITE_BUDGET_SECONDS:.0f}s)")
    if not passed:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, title, passed, detail=""):
        lines.append(f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}")
        print(lines[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

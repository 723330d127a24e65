import sys

import pytest
from hypothesis import settings

from wcps.scheme import fibonacci_preset, golden_ratio

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def tau():
    return golden_ratio()


@pytest.fixture(scope="session")
def fib():
    return fibonacci_preset("full")


@pytest.fixture(scope="session")
def fib_half():
    return fibonacci_preset("half")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

import acceptance_log
from gambler.core_value import Params

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def p6():
    return Params(Fraction(3, 5), 1)


@pytest.fixture
def p6g9():
    return Params(Fraction(3, 5), Fraction(9, 10))


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)

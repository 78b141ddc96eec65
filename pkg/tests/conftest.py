import pytest

import golden
from apscert import UnfoldContext, parse_system


@pytest.fixture(scope="session")
def example1():
    return parse_system(golden.EXAMPLE1)


@pytest.fixture(scope="session")
def ctx1(example1):
    return UnfoldContext.from_system(example1)


@pytest.fixture
def fresh_ctx(example1):
    return UnfoldContext.from_system(example1)


def keys(system):
    return {r.key for r in system}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

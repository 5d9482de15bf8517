import pytest

from gammalab.index import Instance

# filled by test_acceptance.py, printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def n4():
    return Instance(4, frozenset({0, 2}), prime=5)


@pytest.fixture
def n4_gf2():
    return Instance(4, frozenset({0, 2}), prime=2)


@pytest.fixture
def n5():
    return Instance(5, frozenset({0, 2}), prime=5)


@pytest.fixture
def n6():
    return Instance(6, frozenset({0, 2, 4}), prime=5)

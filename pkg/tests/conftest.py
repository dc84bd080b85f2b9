import pytest

from compdim.seqcore import DyadicBlockGeometric, DyadicBlockSchedule, PowerLawTelescoping

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def family1():
    """a_n = 1/(n(n+1)): x_n = 1/n, s_k = 4**-k."""
    return PowerLawTelescoping(2.0)


@pytest.fixture(scope="session")
def family2():
    """Middle-third Cantor sequence, s_k = 3**-k."""
    return DyadicBlockGeometric(1.0 / 3.0)


@pytest.fixture(scope="session")
def alternating():
    return DyadicBlockSchedule((1.0 / 3.0, 0.2), (64, 64))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

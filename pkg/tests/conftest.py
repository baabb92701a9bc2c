import pytest

_LOG = []


@pytest.fixture
def acceptance_log():
    return _LOG


def pytest_terminal_summary(terminalreporter):
    if _LOG:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LOG, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)

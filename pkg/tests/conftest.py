import pytest

from tlsfit import pillbox_surface_map


@pytest.fixture(scope="session")
def pillbox():
    return pillbox_surface_map()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(REPORT):
        terminalreporter.write_line(REPORT[num])

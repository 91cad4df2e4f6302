import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def report_criterion():
    """Record a one-line verdict for an acceptance criterion (printed at the end of the run)."""

    def record(key, passed, message):
        line = f"criterion {key}: {'PASS' if passed else 'FAIL'}  {message}"
        ACCEPTANCE_LINES[key] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(str(k).split(".")[0]), str(k))):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

import numpy as np
import pytest

# one line per acceptance criterion, printed after the run so the
# verdicts are visible even when pytest captures stdout
_CRITERION_LINES = []


def record_criterion(number, ok, detail):
    status = "PASS" if ok else "FAIL"
    _CRITERION_LINES.append(f"criterion {number:>2}: {status}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_CRITERION_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

import os
import sys

# The dict-based reference implementations live next to the tests.
sys.path.insert(0, os.path.dirname(__file__))


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdicts after capture ends."""
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:  # acceptance module not part of this run
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)

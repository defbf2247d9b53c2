def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdict after capture ends."""
    try:
        from test_figures import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)

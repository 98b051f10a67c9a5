import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criteria verdict lines into every terminal report."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT_LINES", None)
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

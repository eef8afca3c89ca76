"""Echo the acceptance-criterion pass/fail lines in the terminal summary.

Pytest's fd-level capture swallows writes made during passing tests, so the
one-line-per-criterion reports from test_acceptance.py are replayed here
where they always reach the terminal (and any tee'd log).
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    module = sys.modules.get("test_acceptance")
    if module is None:
        return
    lines = getattr(module, "ACCEPTANCE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

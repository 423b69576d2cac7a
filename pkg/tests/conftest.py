"""Shared test reporting.

The acceptance tests record one verdict line per criterion; printing
them from the terminal-summary hook makes every run show the full
scorecard even though pytest captures in-test output.
"""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)

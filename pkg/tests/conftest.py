"""Shared pytest wiring: the acceptance suite records one line per
criterion and this hook prints them after the run, win or lose."""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines:
        terminalreporter.write_line(line)

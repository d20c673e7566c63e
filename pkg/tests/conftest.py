"""Shared test helpers and the acceptance-summary hook."""

from contextlib import contextmanager

ACCEPTANCE_LINES = []


@contextmanager
def criterion(number: int, name: str):
    """Record one pass/fail line per acceptance criterion."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_LINES.append(f"criterion {number} FAIL  {name}")
        raise
    ACCEPTANCE_LINES.append(f"criterion {number} PASS  {name}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

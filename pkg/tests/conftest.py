"""Shared fixtures and the acceptance scoreboard.

The acceptance tests register one line per criterion here; the
terminal summary prints the scoreboard after the run so pass/fail
status and the measured numbers are visible in one place even when
the suite is long.
"""

from __future__ import annotations

import pytest

_SCOREBOARD: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    _SCOREBOARD.append((name, passed, detail))


@pytest.fixture
def criterion_log():
    return record_criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _SCOREBOARD:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _SCOREBOARD:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}")

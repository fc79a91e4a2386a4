"""Shared pytest hooks: collect acceptance verdicts and print them at the end of the run."""
from __future__ import annotations

import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def verdict():
    """Record one ``PASS``/``FAIL`` line for an acceptance criterion."""

    def record(label: str, checks: list[tuple[str, bool, str]]) -> bool:
        ok = all(c[1] for c in checks)
        failed = "; ".join(f"{name} ({detail})" for name, good, detail in checks if not good)
        summary = ", ".join(f"{name}: {detail}" for name, _, detail in checks)
        ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'} {label} | {failed if failed else summary}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip("."))):
        terminalreporter.write_line(line)

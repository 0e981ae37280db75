"""Shared fixtures and the acceptance-criteria reporting hook."""
import pytest

from slpeq.generate import GenConfig, generate_corpus

# One line per acceptance criterion, echoed after the run so the pass/fail
# status of each is visible in the terminal output.
_ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion_report():
    """Record one pass/fail line for a criterion, then assert it."""

    def _report(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        assert ok, line

    return _report


@pytest.fixture(scope="session")
def small_pairs():
    """Oracle-scale shared corpus; treat the samples as read-only."""
    return list(generate_corpus(GenConfig().small(), 2024, 120, "fix"))

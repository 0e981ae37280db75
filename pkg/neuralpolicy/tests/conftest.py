"""Fixtures for the neural-policy tests plus the secondary criterion hook."""
import pytest

from neural_fixtures import TOY_CONFIG, write_toy_files
from neuralpolicy.train import train_model

_SECONDARY_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _SECONDARY_LINES:
        terminalreporter.section("acceptance criteria (secondary)")
        for line in _SECONDARY_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion_report():
    def _report(name: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _SECONDARY_LINES.append(line)
        assert ok, line
    return _report


@pytest.fixture(scope="session")
def overfit_ckpt(tmp_path_factory):
    """A checkpoint memorizing the toy step files; reused across modules."""
    directory = tmp_path_factory.mktemp("overfit")
    src, tgt = write_toy_files(directory)
    out = directory / "overfit.pt"
    result = train_model(src, tgt, out, TOY_CONFIG, epochs=200, seed=0)
    assert result.loss_curve[-1] < 0.05, "overfit fixture failed to converge"
    return out

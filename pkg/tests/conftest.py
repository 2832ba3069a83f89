import pytest

_LINES: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance verdict line; the lines are repeated in the terminal summary."""

    def _record(criterion: int, ok: bool, detail: str) -> None:
        _LINES.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")

    return _record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

import pytest

_LINES = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion and fail on FAIL."""
    lines = request.config.stash.setdefault(_LINES, {})

    def record(label: str, passed: bool, detail: str) -> None:
        line = f"criterion {label}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[label] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for label in sorted(lines, key=lambda s: (int(s.rstrip("ab")), s)):
            terminalreporter.write_line(lines[label])

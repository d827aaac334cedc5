import pytest

_LINES: list[str] = []


@pytest.fixture()
def verdict(request):
    """Print and record one PASS/FAIL line for an acceptance criterion."""

    def emit(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        print(line)
        _LINES.append(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)

import pytest

_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion; echoed in the terminal summary."""

    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)

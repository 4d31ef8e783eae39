import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line: ``report(n, title, passed, detail)``."""

    def add(number, title, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        _LINES.append(f"[{status}] criterion {number:>2}: {title}" + (f" | {detail}" if detail else ""))
        print(_LINES[-1])

    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

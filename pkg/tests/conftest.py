import pytest

_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL/SKIP line for the terminal summary."""

    def record(criterion, status, detail):
        line = f"criterion {criterion}: {status}  {detail}"
        _VERDICTS.append(line)
        print(line, flush=True)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

import pytest

CRITERIA: list[str] = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; lines are echoed in the terminal summary."""
    def emit(n, ok, detail):
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
        CRITERIA.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

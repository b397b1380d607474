import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion for the summary."""

    def record(number: int, name: str, passed: bool, detail: str = ""):
        _CRITERIA[number] = (name, bool(passed), detail)
        print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'} {name} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d} {name}  {detail}")

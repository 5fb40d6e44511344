import pytest

ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def record(capsys):
    """Log one acceptance criterion as a PASS/FAIL line, live and in the final summary."""
    def _record(number: int, title: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((number, title, bool(ok), detail))
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:>2} {title}: {detail}")

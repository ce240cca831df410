import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Record an acceptance outcome; the summary prints one line per criterion."""
    def _record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])

import pytest

_RESULTS: dict[int, tuple[str, list[str]]] = {}


class Criterion:
    """Collects named sub-checks for one acceptance criterion and fails at the end if any failed."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.lines: list[str] = []
        self.failed: list[str] = []

    def check(self, name: str, ok: bool, detail: str = ""):
        ok = bool(ok)
        self.lines.append(f"    [{'ok' if ok else 'FAIL'}] {name}: {detail}")
        if not ok:
            self.failed.append(name)

    def note(self, text: str):
        self.lines.append(f"    [info] {text}")

    def finish(self):
        status = "FAIL" if self.failed else "PASS"
        _RESULTS[self.number] = (f"criterion {self.number} ({self.title}): {status}", self.lines)
        print(f"\ncriterion {self.number} ({self.title}): {status}")
        for line in self.lines:
            print(line)
        assert not self.failed, f"failed sub-checks: {', '.join(self.failed)}"


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        head, lines = _RESULTS[k]
        terminalreporter.write_line(head)
        for line in lines:
            terminalreporter.write_line(line)

"""Shared fixtures; collects acceptance outcomes and prints one line per criterion."""

import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class Recorder:
    def __call__(self, number: int, title: str, passed: bool, detail: str = "") -> bool:
        prev = _ACCEPTANCE.get(number)
        if prev is not None:
            # criteria split across several tests pass only if every part passes
            passed = prev[1] and passed
            detail = f"{prev[2]}; {detail}" if detail else prev[2]
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        return bool(passed)


@pytest.fixture(scope="session")
def acceptance():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:>2}. {title}: {detail}")

from __future__ import annotations

import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    """Record one acceptance line; printed again at the end of the session."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _VERDICTS[number] = (ok, detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        ok, detail = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} | {detail}")

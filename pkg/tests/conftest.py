import re

import pytest

_VERDICTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line; returns the boolean for asserting."""

    def emit(label: str, ok: bool, detail: str = "") -> bool:
        ok = bool(ok)
        _VERDICTS.append((label, ok, detail))
        print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance checks")
    for label, ok, detail in _VERDICTS:
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    tr.section("acceptance criteria")
    by_crit: dict[int, list[bool]] = {}
    for label, ok, _ in _VERDICTS:
        num = re.match(r"criterion (\d+)", label)
        if num:
            by_crit.setdefault(int(num.group(1)), []).append(ok)
    for num in sorted(by_crit):
        oks = by_crit[num]
        tr.write_line(f"{'PASS' if all(oks) else 'FAIL'} criterion {num} "
                      f"({sum(oks)}/{len(oks)} checks pass)")

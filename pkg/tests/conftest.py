import math

import pytest

from cmjtrees.rates import RateSequence


@pytest.fixture
def yule():
    return RateSequence.constant(1.0)


@pytest.fixture
def square():
    return RateSequence.power(2)


def harmonic(n):
    return math.fsum(1.0 / k for k in range(1, n + 1))


# -- acceptance summary: one line per criterion, printed after every run --------

ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


def record(criterion: str, part: str, ok: bool, detail: str = "") -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion} / {part}: {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        failed = [f"{name} ({detail})" for name, good, detail in parts if not good]
        line = f"{'PASS' if ok else 'FAIL'}  {crit}"
        if failed:
            line += "  -- failed: " + "; ".join(failed)
        tr.write_line(line)

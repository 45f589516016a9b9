import random
from fractions import Fraction

import pytest

ACCEPTANCE_LINES = []


def random_omegas(count, length, seed, lo=0.1, hi=10.0):
    """Corpus of random Jacobi prefixes, values uniform in (lo, hi) as exact rationals.

    Doubles are converted exactly, so the float and exact backends see the
    same numbers.
    """
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        vals = []
        while len(vals) < length:
            x = rng.uniform(lo, hi)
            if lo < x < hi:
                vals.append(Fraction(x))
        out.append(vals)
    return out


@pytest.fixture(scope="session")
def corpus():
    return random_omegas(100, 30, seed=20240611)


@pytest.fixture
def report_line():
    """Record a one-line acceptance verdict that is echoed in the terminal summary."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

from fractions import Fraction

import pytest
from hypothesis import settings

from qsolovay.io import load_config

settings.register_profile("exact", max_examples=60, deadline=None)
settings.load_profile("exact")


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def fx(cfg):
    return cfg.fixtures()


def bisect_root(x: Fraction, ell: int, eps: Fraction) -> tuple[Fraction, Fraction]:
    """Plain bisection on [0, max(1, x)]: an oracle independent of integer-root code."""
    lo, hi = Fraction(0), max(Fraction(1), x)
    while hi - lo > eps:
        mid = (lo + hi) / 2
        if mid**ell <= x:
            lo = mid
        else:
            hi = mid
    return lo, hi


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Repetition-coded reals and the interval covers built from a qS witness.

Level m of the cover takes every sigma of length m, maps it to the
repetition code q(sigma) = 0.x1 x2x2 x3x3x3 ..., and places an open interval
of radius r = 2^(-(m^2 - 2k)/(2 ell)) around f(q(sigma)).

The radius is irrational in general, but the union measure has the exact
form S + 2 C r (S a rational span total, C the number of connected
components), and r^(2 ell) is a power of two, so the measure bound
lambda(U_m) <= 2^(m+1) r is decided exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any

from .rational import (
    BitSource,
    RationalInterval,
    qstr,
    repetition_encode,
    root_enclosure,
)
from .reals import LeftCEReal
from .reduction import WitnessFunction

DEFAULT_RADIUS_EPS = Fraction(1, 1 << 40)


def repetition_real(alpha_bits: BitSource, depth: int) -> LeftCEReal:
    """Stages are repetition codes of growing prefixes of alpha.

    Only prefixes of length m with m(m+1)/2 <= depth (and m within the
    accessor) are used; later stages repeat the last one.
    """
    m_max = 0
    while (m_max + 1) * (m_max + 2) // 2 <= depth and m_max + 1 <= alpha_bits.depth:
        m_max += 1

    def stage(n: int) -> Fraction:
        m = min(n, m_max)
        return repetition_encode(alpha_bits.prefix(m)) if m else Fraction(0)

    return LeftCEReal(stage, None, f"rep({alpha_bits.label})")


def radius_power_exponent(m: int, k: int) -> int:
    """r^(2 ell) = 2^-(m^2 - 2k); returns m^2 - 2k."""
    return m * m - 2 * k


def bound_log2(m: int, k: int, ell: int) -> Fraction:
    """log2 of the measure bound 2^m * 2 * r."""
    return m + 1 - Fraction(radius_power_exponent(m, k), 2 * ell)


def first_level_below(k: int, ell: int, limit: int = 10_000) -> int:
    """Least m >= 1 with 2^(m+1) r <= 2^-m, by exact exponent arithmetic."""
    for m in range(1, limit):
        # m + 1 - (m^2 - 2k)/(2 ell) <= -m
        if 2 * ell * (2 * m + 1) <= radius_power_exponent(m, k):
            return m
    raise ValueError("no level found")


@dataclass(frozen=True)
class MLTestLevel:
    m: int
    k: int
    ell: int
    intervals: tuple[tuple[Fraction, RationalInterval], ...]
    span: Fraction
    components: int
    holds: bool

    @property
    def radius(self) -> RationalInterval:
        return root_enclosure(Fraction(1, 1) / Fraction(2) ** radius_power_exponent(self.m, self.k),
                              2 * self.ell, DEFAULT_RADIUS_EPS)

    @property
    def total_upper(self) -> Fraction:
        """Rational upper bound for the union measure."""
        return self.span + 2 * self.components * self.radius.hi

    def bound(self) -> RationalInterval:
        return self.radius.scale(2 ** (self.m + 1))

    def to_dict(self, with_intervals: bool = True) -> dict[str, Any]:
        r = self.radius
        out: dict[str, Any] = {
            "m": self.m,
            "k": self.k,
            "l": self.ell,
            "count": len(self.intervals),
            "span": qstr(self.span),
            "components": self.components,
            "total_upper": qstr(self.total_upper),
            "bound": self.bound().to_dict(),
            "bound_log2": qstr(bound_log2(self.m, self.k, self.ell)),
            "holds": self.holds,
        }
        if with_intervals:
            out["intervals"] = [
                {"center": qstr(c), "r_lo": qstr(r.lo), "r_hi": qstr(r.hi)} for c, _ in self.intervals
            ]
        return out


def _overlaps(delta: Fraction, m: int, k: int, ell: int) -> bool:
    """delta < 2r, decided through 2ell-th powers."""
    # delta^(2l) < 2^(2l) * 2^-(m^2 - 2k)
    e = radius_power_exponent(m, k)
    lhs = delta ** (2 * ell)
    rhs = Fraction(2) ** (2 * ell - e)
    return lhs < rhs


def ml_test_level(f: WitnessFunction, m: int, k: int, ell: int) -> MLTestLevel:
    """Cover level m for the witness function f; undefined f(q(sigma)) are skipped."""
    if m < 1 or ell < 1:
        raise ValueError("levels need m >= 1 and ell >= 1")
    radius = root_enclosure(
        Fraction(1) / Fraction(2) ** radius_power_exponent(m, k), 2 * ell, DEFAULT_RADIUS_EPS
    )
    centers = []
    for sigma in product("01", repeat=m):
        fq = f(repetition_encode("".join(sigma)))
        if fq is not None:
            centers.append(fq)
    intervals = tuple((c, radius) for c in centers)
    span, comps = Fraction(0), 0
    ordered = sorted(centers)
    for i, c in enumerate(ordered):
        if i and _overlaps(c - ordered[i - 1], m, k, ell):
            span += c - ordered[i - 1]
        else:
            comps += 1
    holds = _measure_within_bound(span, comps, m, k, ell)
    return MLTestLevel(m, k, ell, intervals, span, comps, holds)


def _measure_within_bound(span: Fraction, comps: int, m: int, k: int, ell: int) -> bool:
    """span + 2 comps r <= 2^(m+1) r, i.e. span <= (2^(m+1) - 2 comps) r."""
    coeff = 2 ** (m + 1) - 2 * comps
    if span == 0:
        return coeff >= 0
    if coeff <= 0:
        return False
    # span^(2l) <= coeff^(2l) * 2^-(m^2 - 2k)
    return span ** (2 * ell) <= Fraction(coeff) ** (2 * ell) / Fraction(2) ** radius_power_exponent(m, k)

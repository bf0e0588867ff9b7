"""Left-c.e. reals as nondecreasing rational stage sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .rational import Q, RationalLike, expansion_bits, h1_value, is_dyadic

StageFn = Callable[[int], Fraction]

DEFAULT_DEPTH = 64
DEFAULT_COERCION_BITS = 2 * DEFAULT_DEPTH


def _memo(fn: StageFn) -> StageFn:
    cache: dict[int, Fraction] = {}

    def stage(n: int) -> Fraction:
        if n < 0:
            raise IndexError("stages are indexed from 0")
        if n not in cache:
            cache[n] = fn(n)
        return cache[n]

    return stage


@dataclass(frozen=True)
class LeftCEReal:
    """A computable nondecreasing rational sequence, optionally with a known limit.

    ``gap_bound(n)`` bounds ``exact_limit - stage(n)`` from above when given.
    """

    stage_fn: StageFn
    exact_limit: Fraction | None = None
    label: str = ""
    gap_bound: StageFn | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "stage_fn", _memo(self.stage_fn))

    def stage(self, n: int) -> Fraction:
        return self.stage_fn(n)

    def stages(self, depth: int) -> list[Fraction]:
        return [self.stage(n) for n in range(depth)]

    def limit(self) -> Fraction:
        if self.exact_limit is None:
            raise ValueError(f"{self.label or 'real'} has no exact limit")
        return self.exact_limit

    def validate(self, depth: int = DEFAULT_DEPTH) -> None:
        """Spot-check monotonicity and, with a limit, the convergence bound."""
        prev = None
        for n in range(depth):
            s = self.stage(n)
            if prev is not None and s < prev:
                raise ValueError(f"{self.label}: stage {n} decreases ({prev} -> {s})")
            if self.exact_limit is not None:
                if s > self.exact_limit:
                    raise ValueError(f"{self.label}: stage {n} exceeds the limit")
                if self.gap_bound is not None and self.exact_limit - s > self.gap_bound(n):
                    raise ValueError(f"{self.label}: stage {n} violates the declared gap bound")
            prev = s

    def __repr__(self) -> str:
        lim = "?" if self.exact_limit is None else str(self.exact_limit)
        return f"LeftCEReal({self.label or 'anonymous'}, limit={lim})"


def power_gap(base: int, shift: int = 0, coeff: RationalLike = 1) -> StageFn:
    """gap(n) = coeff * base^-(n + shift)."""
    coeff = Q(coeff)
    if base < 2 or coeff <= 0:
        raise ValueError("power gaps need base >= 2 and a positive coefficient")
    return lambda n: coeff / Fraction(base) ** (n + shift)


def fixture(
    limit: RationalLike, gap: StageFn, label: str = "", check_depth: int = DEFAULT_DEPTH
) -> LeftCEReal:
    """stage(n) = limit - gap(n); gap must be positive and nonincreasing."""
    limit = Q(limit)
    prev = None
    for n in range(check_depth):
        g = gap(n)
        if g <= 0:
            raise ValueError(f"gap({n}) = {g} is not positive")
        if prev is not None and g > prev:
            raise ValueError(f"gap schedule increases at n={n}")
        prev = g
    return LeftCEReal(lambda n: limit - gap(n), limit, label, gap_bound=gap)


def constant(q: RationalLike, label: str = "") -> LeftCEReal:
    q = Q(q)
    return LeftCEReal(lambda n: q, q, label or str(q), gap_bound=lambda n: Fraction(0))


@dataclass(frozen=True)
class RealName:
    """approx(n) = z with |x - z/2^n| <= 2^-n."""

    approx: Callable[[int], int]
    label: str = ""

    def __call__(self, n: int) -> int:
        return self.approx(n)

    def consistent(self, depth: int) -> bool:
        for n in range(depth):
            a = Fraction(self(n), 1 << n)
            b = Fraction(self(n + 1), 1 << (n + 1))
            if abs(a - b) > Fraction(1, 1 << n) + Fraction(1, 1 << (n + 1)):
                return False
        return True

    def holds_for(self, x: RationalLike, depth: int) -> bool:
        x = Q(x)
        return all(abs(x - Fraction(self(n), 1 << n)) <= Fraction(1, 1 << n) for n in range(depth))


def name_of(x: LeftCEReal) -> RealName:
    """Nearest-integer name of a fixture limit, ties broken downward."""
    if x.exact_limit is None:
        raise ValueError("name requires fixture")
    lim = x.exact_limit

    def approx(n: int) -> int:
        return math.ceil(lim * (1 << n) - Fraction(1, 2))

    return RealName(approx, x.label)


def add(x: LeftCEReal, y: LeftCEReal) -> LeftCEReal:
    lim = None
    if x.exact_limit is not None and y.exact_limit is not None:
        lim = x.exact_limit + y.exact_limit
    gap = None
    if x.gap_bound is not None and y.gap_bound is not None:
        gx, gy = x.gap_bound, y.gap_bound
        gap = lambda n: gx(n) + gy(n)  # noqa: E731
    return LeftCEReal(lambda n: x.stage(n) + y.stage(n), lim, f"({x.label}+{y.label})", gap)


def scale(x: LeftCEReal, q: RationalLike) -> LeftCEReal:
    q = Q(q)
    if q <= 0:
        raise ValueError("scale factor must be positive")
    lim = None if x.exact_limit is None else q * x.exact_limit
    gap = None
    if x.gap_bound is not None:
        gx = x.gap_bound
        gap = lambda n: q * gx(n)  # noqa: E731
    return LeftCEReal(lambda n: q * x.stage(n), lim, f"{q}*{x.label}", gap)


def in_unit_interval(x: LeftCEReal) -> bool:
    """Range check used before any bit-level encoding."""
    return x.exact_limit is not None and 0 < x.exact_limit < 1


def h1_stage(a: Fraction, precision: int) -> Fraction:
    """sum_{i <= precision} (a_i + 1) 4^-i over the truncated expansion of a."""
    bits = expansion_bits(a, precision)
    return (1 - Fraction(1, 4**precision)) / 3 + Fraction(int(bits, 4) if bits else 0, 4**precision)


def h1_transform(
    x: LeftCEReal,
    coercion_bits: int = DEFAULT_COERCION_BITS,
    depth: int = DEFAULT_DEPTH,
) -> LeftCEReal:
    """Interleave every stage: bit b becomes the pair (b, 1-b).

    Stage n is truncated to ``coercion_bits + n`` bits and padded with ``01``
    pairs up to that length, which keeps the sequence nondecreasing and lets
    it reach the interleaved limit when the source stages attain their limit.

    The map is discontinuous from the left at dyadic points, so a dyadic
    limit that the stages never reach would give a sequence converging to
    something other than the interleaved limit; that case is rejected.
    """
    lim = None
    if x.exact_limit is not None:
        lim = h1_value(x.exact_limit)
        if is_dyadic(x.exact_limit) and x.exact_limit not in x.stages(depth):
            raise ValueError(
                f"{x.label}: dyadic limit {x.exact_limit} is not attained within {depth} stages; "
                "interleaved stages would converge to the all-ones form"
            )

    def stage(n: int) -> Fraction:
        a = x.stage(n)
        if not 0 <= a < 1:
            raise ValueError(f"{x.label}: stage {n} = {a} is outside [0, 1)")
        return h1_stage(a, coercion_bits + n)

    return LeftCEReal(stage, lim, f"h1({x.label})")

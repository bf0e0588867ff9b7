"""Exact rationals, binary expansions, bit-pair codes and root enclosures.

Bit strings are plain ``str`` objects over ``'0'``/``'1'``, most significant
bit first, read as ``0.b1 b2 ...``.  Dyadic rationals always use the
terminating expansion (infinitely many trailing zeros).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Union

import gmpy2

from .errors import InsufficientPrecision, NotDyadicError, UndecidedComparison

RationalLike = Union[int, str, Fraction]

REFINE_CAP = 64


def Q(x: RationalLike) -> Fraction:
    """Coerce ``x`` to a Fraction.  Floats are rejected on purpose."""
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact value {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a rational")


def qstr(q: Fraction) -> str:
    """Serialize as ``"numerator/denominator"``, always with the slash."""
    q = Q(q)
    return f"{q.numerator}/{q.denominator}"


def is_dyadic(q: Fraction) -> bool:
    d = Q(q).denominator
    return d & (d - 1) == 0


def _check_bits(bits: str) -> str:
    if any(c not in "01" for c in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return bits


def bits_value(bits: str) -> Fraction:
    """Value of ``0.b1 b2 ... bn``."""
    _check_bits(bits)
    if not bits:
        return Fraction(0)
    return Fraction(int(bits, 2), 1 << len(bits))


def expansion_bits(q: Fraction, n: int) -> str:
    """First ``n`` bits of the expansion of ``q`` in [0, 1) (floor truncation)."""
    q = Q(q)
    if not 0 <= q < 1:
        raise ValueError(f"{q} is outside [0, 1)")
    if n == 0:
        return ""
    z = (q.numerator << n) // q.denominator
    return format(z, f"0{n}b")


def to_binary_expansion(q: Fraction, n: int) -> str:
    """Terminating expansion of a dyadic ``q`` in [0, 1), truncated or padded to ``n`` bits."""
    q = Q(q)
    if not is_dyadic(q):
        raise NotDyadicError(f"{q} is not dyadic")
    return expansion_bits(q, n)


def terminating_bits(q: Fraction) -> str:
    """Shortest expansion of a dyadic ``q`` in [0, 1); ``""`` for zero."""
    q = Q(q)
    if not is_dyadic(q):
        raise NotDyadicError(f"{q} is not dyadic")
    return expansion_bits(q, q.denominator.bit_length() - 1)


def dprime_check(q: Fraction) -> tuple[bool, int | None]:
    """Membership of ``q`` in the complementary-pair set and its pair count ``k``.

    The terminating expansion is padded by one zero when its length is odd, so
    that 0.101 is read as 0.1010 (k = 2).  A trailing ``00`` pair is never
    accepted.
    """
    q = Q(q)
    if not is_dyadic(q):
        raise NotDyadicError(f"{q} is not dyadic")
    if not 0 < q < 1:
        raise ValueError(f"{q} is outside (0, 1)")
    bits = terminating_bits(q)
    if len(bits) % 2:
        bits += "0"
    if all(bits[i] != bits[i + 1] for i in range(0, len(bits), 2)):
        return True, len(bits) // 2
    return False, None


@dataclass(frozen=True)
class BitSource:
    """Finite-depth accessor for the expansion bits of some real (1-indexed)."""

    bits: str
    label: str = ""

    @classmethod
    def of_rational(cls, q: Fraction, depth: int, label: str = "") -> BitSource:
        return cls(expansion_bits(q, depth), label or qstr(q))

    @property
    def depth(self) -> int:
        return len(self.bits)

    def bit(self, i: int) -> int:
        if i < 1:
            raise IndexError("bits are 1-indexed")
        if i > len(self.bits):
            raise InsufficientPrecision(
                f"bit {i} requested from {self.label or 'source'} of depth {len(self.bits)}"
            )
        return 1 if self.bits[i - 1] == "1" else 0

    def prefix(self, n: int) -> str:
        if n > len(self.bits):
            raise InsufficientPrecision(
                f"{n} bits requested from {self.label or 'source'} of depth {len(self.bits)}"
            )
        return self.bits[:n]


def dprime_round_up_bits(q: Fraction, beta_bits: BitSource) -> str:
    """Shortest even-length prefix of ``beta_bits`` whose value is >= ``q``."""
    q = Q(q)
    z = 0
    k = 0
    while True:
        k += 1
        z = 4 * z + 2 * beta_bits.bit(2 * k - 1) + beta_bits.bit(2 * k)
        # z / 4^k >= q
        if z * q.denominator >= q.numerator << (2 * k):
            return beta_bits.prefix(2 * k)


def dprime_round_up(q: Fraction, beta_bits: BitSource) -> Fraction:
    """Least even-prefix value q' of beta with q <= q'.  For beta in R', q' is in D'."""
    return bits_value(dprime_round_up_bits(q, beta_bits))


def interleave_encode(bits: str) -> str:
    """Send each bit b to the pair (b, 1-b)."""
    _check_bits(bits)
    return "".join(b + ("1" if b == "0" else "0") for b in bits)


def interleave_decode(bits: str) -> str:
    _check_bits(bits)
    if len(bits) % 2:
        raise ValueError("interleaved strings have even length")
    return bits[0::2]


def repetition_bits(sigma: str) -> str:
    """``x1 x2 x2 x3 x3 x3 ...``: bit i repeated i times."""
    _check_bits(sigma)
    if not sigma:
        raise ValueError("repetition code needs a nonempty string")
    return "".join(b * (i + 1) for i, b in enumerate(sigma))


def repetition_encode(sigma: str) -> Fraction:
    return bits_value(repetition_bits(sigma))


def dprime_upto(kmax: int) -> list[Fraction]:
    """Every element of D' with at most ``kmax`` complementary pairs, sorted."""
    vals = {
        bits_value(interleave_encode("".join(s)))
        for k in range(1, kmax + 1)
        for s in product("01", repeat=k)
    }
    return sorted(vals)


def prefix_agreement_counterexamples(beta: Fraction, m: int, kmax: int) -> list[Fraction]:
    """q in D' (k(q) <= kmax) with q < beta, beta - q <= 2^-(2m+1), yet a differing bit among the first 2m."""
    beta = Q(beta)
    head = expansion_bits(beta, 2 * m)
    bad = []
    for q in dprime_upto(kmax):
        if q < beta and beta - q <= Fraction(1, 1 << (2 * m + 1)):
            if expansion_bits(q, 2 * m) != head:
                bad.append(q)
    return bad


def _periodic_expansion(q: Fraction) -> tuple[str, str]:
    """(preperiod, period) of the binary expansion of q in [0, 1); period is '' when terminating."""
    num, den = q.numerator, q.denominator
    digits: list[str] = []
    seen: dict[int, int] = {}
    rem = num
    while rem and rem not in seen:
        seen[rem] = len(digits)
        rem *= 2
        digits.append("1" if rem >= den else "0")
        if rem >= den:
            rem -= den
    if not rem:
        return "".join(digits), ""
    start = seen[rem]
    return "".join(digits[:start]), "".join(digits[start:])


def _base4(bits: str) -> Fraction:
    return Fraction(int(bits, 4), 4 ** len(bits)) if bits else Fraction(0)


def h1_value(q: Fraction) -> Fraction:
    """Exact value of the interleaved expansion of ``q`` in [0, 1).

    Every bit a_i contributes (a_i + 1) 4^-i, so the result is
    1/3 + sum a_i 4^-i, with the expansion summed as an eventually periodic
    series.
    """
    q = Q(q)
    if not 0 <= q < 1:
        raise ValueError(f"{q} is outside [0, 1)")
    pre, per = _periodic_expansion(q)
    total = _base4(pre)
    if per:
        r = len(per)
        total += _base4(per) / 4 ** len(pre) / (1 - Fraction(1, 4**r))
    return Fraction(1, 3) + total


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q: RationalLike) -> RationalInterval:
        q = Q(q)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, q: RationalLike) -> bool:
        return self.lo <= Q(q) <= self.hi

    def __add__(self, other: RationalInterval | Fraction | int) -> RationalInterval:
        if isinstance(other, RationalInterval):
            return RationalInterval(self.lo + other.lo, self.hi + other.hi)
        return RationalInterval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self) -> RationalInterval:
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other: RationalInterval | Fraction | int) -> RationalInterval:
        return self + (-other)

    def __rsub__(self, other: Fraction | int) -> RationalInterval:
        return (-self) + other

    def scale(self, c: RationalLike) -> RationalInterval:
        c = Q(c)
        a, b = self.lo * c, self.hi * c
        return RationalInterval(min(a, b), max(a, b))

    def pow(self, n: int) -> RationalInterval:
        """n-th power of a nonnegative interval."""
        if self.lo < 0:
            raise ValueError("pow is defined here for nonnegative intervals only")
        return RationalInterval(self.lo**n, self.hi**n)

    def to_dict(self) -> dict[str, str]:
        return {"lo": qstr(self.lo), "hi": qstr(self.hi)}


def _exponent_for(eps: Fraction) -> int:
    """Least p >= 0 with 2^-p <= eps."""
    m = math.ceil(1 / eps)
    return (m - 1).bit_length()


def root_enclosure(x: RationalLike, ell: int, eps: RationalLike) -> RationalInterval:
    """Dyadic-grid enclosure [lo, hi] of the ell-th root of x.

    lo^ell <= x <= hi^ell always holds, hi - lo <= eps, and the result is a
    point whenever x is the ell-th power of a rational.
    """
    x, eps = Q(x), Q(eps)
    if x < 0 or ell < 1 or eps <= 0:
        raise ValueError("root_enclosure needs x >= 0, ell >= 1, eps > 0")
    if x == 0 or ell == 1:
        return RationalInterval(x, x)
    rn, exact_n = gmpy2.iroot(x.numerator, ell)
    rd, exact_d = gmpy2.iroot(x.denominator, ell)
    if exact_n and exact_d:
        return RationalInterval.point(Fraction(int(rn), int(rd)))
    p = _exponent_for(eps)
    r, _ = gmpy2.iroot((x.numerator << (ell * p)) // x.denominator, ell)
    r = int(r)
    return RationalInterval(Fraction(r, 1 << p), Fraction(r + 1, 1 << p))


def power_root(x: RationalLike, num: int, ell: int, eps: RationalLike) -> RationalInterval:
    """Enclosure of x^(num/ell) for x >= 0."""
    return root_enclosure(Q(x) ** num, ell, eps)


Enclosure = Callable[[Fraction], RationalInterval]


def decide_less(
    a: Enclosure, b: Enclosure, eps: RationalLike = Fraction(1, 1 << 24), cap: int = REFINE_CAP
) -> bool:
    """Decide a < b for two quantities given as eps -> enclosure maps.

    Refines by halving eps up to ``cap`` times; equal quantities never
    separate and end in UndecidedComparison.
    """
    eps = Q(eps)
    for _ in range(cap + 1):
        ia, ib = a(eps), b(eps)
        if ia.hi < ib.lo:
            return True
        if ia.lo >= ib.hi:
            return False
        eps /= 2
    raise UndecidedComparison("enclosures did not separate")


def sign_of(f: Enclosure, eps: RationalLike = Fraction(1, 1 << 24), cap: int = REFINE_CAP) -> int:
    """Sign of a quantity given as eps -> enclosure; 0 only when an enclosure is exactly [0, 0]."""
    eps = Q(eps)
    for _ in range(cap + 1):
        iv = f(eps)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
        if iv.lo == iv.hi == 0:
            return 0
        eps /= 2
    raise UndecidedComparison("sign not decided within refinement cap")

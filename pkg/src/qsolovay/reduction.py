"""Solovay and quasi-Solovay reduction witnesses.

A witness for alpha <=_qS beta is a partial rational function f with
constants d, ell such that f(q) < alpha and (alpha - f(q))^ell < d (beta - q)
for every rational q < beta; ell = 1 is Solovay reducibility.

Partial functions are evaluated under a step budget and return ``None``
when undefined within it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import InsufficientDepth, InsufficientPrecision
from .rational import (
    REFINE_CAP,
    BitSource,
    Q,
    RationalLike,
    bits_value,
    dprime_round_up_bits,
    h1_value,
    interleave_decode,
    qstr,
    root_enclosure,
)
from .reals import LeftCEReal, RealName

DEFAULT_BUDGET = 10**6
DEFAULT_SEARCH_LIMIT = 4096
H1_BIT_DEPTH = 256

StageLike = Callable[[int], Fraction]


class _OutOfBudget(Exception):
    pass


class Budget:
    def __init__(self, steps: int = DEFAULT_BUDGET) -> None:
        self.remaining = steps

    def spend(self, n: int = 1) -> None:
        self.remaining -= n
        if self.remaining < 0:
            raise _OutOfBudget


def _stages(x: LeftCEReal | StageLike) -> StageLike:
    return x.stage if isinstance(x, LeftCEReal) else x


class WitnessFunction:
    """Base class: a partial map from rationals to rationals."""

    kind = "abstract"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        raise NotImplementedError

    def __call__(self, q: RationalLike, budget: int = DEFAULT_BUDGET) -> Fraction | None:
        try:
            return self.evaluate(Q(q), Budget(budget))
        except (_OutOfBudget, InsufficientPrecision):
            return None

    def params(self) -> dict[str, Any]:
        return {}

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": self.params()}


@dataclass(frozen=True, eq=False)
class Affine(WitnessFunction):
    slope: Fraction
    intercept: Fraction = Fraction(0)
    kind = "affine"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        budget.spend()
        return self.slope * q + self.intercept

    def params(self) -> dict[str, Any]:
        return {"slope": qstr(self.slope), "intercept": qstr(self.intercept)}


@dataclass(frozen=True, eq=False)
class SequenceStep(WitnessFunction):
    """f(q) = a_{n+1} for the least n with b_n <= q < b_{n+1}; f(q) = a_0 below b_0."""

    a: StageLike
    b: StageLike
    depth: int
    kind = "sequence_step"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        if q < self.b(0):
            budget.spend()
            return self.a(0)
        for n in range(self.depth - 1):
            budget.spend()
            if q < self.b(n + 1):
                return self.a(n + 1)
        raise _OutOfBudget

    def params(self) -> dict[str, Any]:
        return {"depth": self.depth}


@dataclass(frozen=True, eq=False)
class DprimeDecode(WitnessFunction):
    """Round q up to an even prefix of beta, then keep the odd-position bits."""

    beta_bits: BitSource
    kind = "dprime_decode"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        prefix = dprime_round_up_bits(q, self.beta_bits)
        budget.spend(len(prefix))
        return bits_value(interleave_decode(prefix))

    def params(self) -> dict[str, Any]:
        return {"beta": self.beta_bits.label, "bit_depth": self.beta_bits.depth}


@dataclass(frozen=True, eq=False)
class Sum(WitnessFunction):
    parts: tuple[WitnessFunction, ...]
    kind = "sum"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        return sum((p.evaluate(q, budget) for p in self.parts), Fraction(0))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": {"parts": [p.to_dict() for p in self.parts]}}


@dataclass(frozen=True, eq=False)
class Compose(WitnessFunction):
    """outer(inner(q))."""

    outer: WitnessFunction
    inner: WitnessFunction
    kind = "compose"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        return self.outer.evaluate(self.inner.evaluate(q, budget), budget)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "params": {"outer": self.outer.to_dict(), "inner": self.inner.to_dict()},
        }


@dataclass(frozen=True, eq=False)
class Table(WitnessFunction):
    pairs: dict[Fraction, Fraction]
    kind = "table"

    def evaluate(self, q: Fraction, budget: Budget) -> Fraction:
        budget.spend()
        if q not in self.pairs:
            raise _OutOfBudget
        return self.pairs[q]

    def params(self) -> dict[str, Any]:
        return {"pairs": [[qstr(k), qstr(v)] for k, v in sorted(self.pairs.items())]}


@dataclass(frozen=True)
class QSWitness:
    """f with constants d, ell; ``valid_from`` is an exclusive lower end of the guaranteed q-range."""

    f: WitnessFunction
    d: int
    ell: int = 1
    valid_from: Fraction | None = None

    def __post_init__(self) -> None:
        if not (isinstance(self.d, int) and isinstance(self.ell, int)):
            raise TypeError("witness constants are naturals")
        if self.d < 1 or self.ell < 1:
            raise ValueError("witness constants must satisfy d >= 1, ell >= 1")

    @property
    def is_solovay(self) -> bool:
        return self.ell == 1

    def in_range(self, q: Fraction) -> bool:
        return self.valid_from is None or q > self.valid_from

    def to_dict(self) -> dict[str, Any]:
        out = {"f": self.f.to_dict(), "d": self.d, "l": self.ell}
        if self.valid_from is not None:
            out["valid_from"] = qstr(self.valid_from)
        return out


@dataclass(frozen=True)
class CheckRecord:
    q: Fraction
    fq: Fraction | None
    lhs: Fraction | None
    rhs: Fraction | None
    status: str  # ok | fails | undefined | out_of_range
    strictly_below: bool | None = None

    @property
    def holds(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        opt = lambda v: None if v is None else qstr(v)  # noqa: E731
        return {
            "q": qstr(self.q),
            "f(q)": opt(self.fq),
            "lhs": opt(self.lhs),
            "rhs": opt(self.rhs),
            "holds": self.holds,
            "status": self.status,
            "strictly_below": self.strictly_below,
        }


@dataclass(frozen=True)
class CheckReport:
    records: tuple[CheckRecord, ...]
    witness: QSWitness = field(repr=False)

    @property
    def holds(self) -> bool:
        return bool(self.records) and all(r.holds for r in self.records)

    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.holds]

    def to_dict(self) -> dict[str, Any]:
        return {
            "d": self.witness.d,
            "l": self.witness.ell,
            "holds": self.holds,
            "records": [r.to_dict() for r in self.records],
        }


def check_witness(
    alpha: LeftCEReal, beta: LeftCEReal, w: QSWitness, qs: Iterable[RationalLike]
) -> CheckReport:
    """Exact per-q check of (alpha - f(q))^ell < d (beta - q).

    A record holds when the inequality holds and f(q) <= alpha.  Whether
    f(q) is strictly below alpha is reported separately in
    ``strictly_below``: on dyadic fixtures the interleaving gadget returns
    alpha itself, where the inequality is trivially strict.
    """
    a, b = alpha.limit(), beta.limit()
    records = []
    for q in qs:
        q = Q(q)
        if q >= b:
            raise ValueError(f"q = {q} is not below beta = {b}")
        if not w.in_range(q):
            records.append(CheckRecord(q, None, None, None, "out_of_range"))
            continue
        fq = w.f(q)
        if fq is None:
            records.append(CheckRecord(q, None, None, None, "undefined"))
            continue
        diff = a - fq
        lhs = diff**w.ell if diff >= 0 else None
        rhs = w.d * (b - q)
        ok = lhs is not None and lhs < rhs
        records.append(CheckRecord(q, fq, lhs, rhs, "ok" if ok else "fails", fq < a))
    return CheckReport(tuple(records), w)


def witness_from_sequences(
    a: LeftCEReal | StageLike, b: LeftCEReal | StageLike, d: int, ell: int, depth: int
) -> QSWitness:
    """Witness built from stage pairs with (alpha - a_n)^ell <= d (beta - b_n)."""
    return QSWitness(SequenceStep(_stages(a), _stages(b), depth), d, ell)


def index_function(
    w: QSWitness,
    alpha: LeftCEReal,
    beta: LeftCEReal,
    depth: int,
    search_limit: int = DEFAULT_SEARCH_LIMIT,
) -> list[int]:
    """Strictly increasing g with f(b_n) < a_{g(n)} for n < depth.

    A stage b_n equal to beta's known limit lies outside the witness domain;
    there the only admissible choice is a stage equal to alpha's limit, which
    is searched for instead.
    """
    g: list[int] = []
    beta_lim = beta.exact_limit
    for n in range(depth):
        bn = beta.stage(n)
        if beta_lim is not None and bn >= beta_lim:
            target = alpha.limit()
            hit = lambda s: alpha.stage(s) >= target  # noqa: E731
        else:
            fb = w.f(bn)
            if fb is None:
                raise InsufficientDepth(f"witness undefined at b_{n} = {bn}")
            hit = lambda s, fb=fb: fb < alpha.stage(s)  # noqa: E731
        s = g[-1] + 1 if g else 0
        while not hit(s):
            s += 1
            if s >= search_limit:
                raise InsufficientDepth(f"no stage of alpha found for n = {n} within {search_limit}")
        g.append(s)
    return g


def sequence_pairs_hold(
    alpha: LeftCEReal, beta: LeftCEReal, g: Sequence[int], d: int, ell: int
) -> bool:
    """(alpha - a_{g(n)})^ell <= d (beta - b_n) for every n, exactly."""
    a, b = alpha.limit(), beta.limit()
    return all((a - alpha.stage(s)) ** ell <= d * (b - beta.stage(n)) for n, s in enumerate(g))


def reflexive_witness() -> QSWitness:
    return QSWitness(Affine(Fraction(1)), d=2, ell=1)


def compose(w1: QSWitness, w2: QSWitness) -> QSWitness:
    """From alpha <= beta via w1 and beta <= gamma via w2, a witness for alpha <= gamma.

    The q-range is w2's; where w2's values fall below w1's range the
    composite is not guaranteed, and the checker will say so.
    """
    return QSWitness(
        Compose(w1.f, w2.f), d=w1.d**w2.ell * w2.d, ell=w1.ell * w2.ell, valid_from=w2.valid_from
    )


def join_constant(c0: int, c1: int, ell0: int, ell1: int, cap: int = REFINE_CAP) -> int:
    """ceil((c0^(1/ell0) + c1^(1/ell0))^ell1), with ell0 <= ell1.

    Enclosures are refined until the ceiling is determined.  A value sitting
    exactly on an integer never separates; that tie is settled by the
    minimal polynomial of the algebraic number.
    """
    eps = Fraction(1, 1 << 16)
    for _ in range(cap + 1):
        s = root_enclosure(c0, ell0, eps) + root_enclosure(c1, ell0, eps)
        lo, hi = math.ceil(s.lo**ell1), math.ceil(s.hi**ell1)
        if lo == hi:
            return hi
        eps /= 2
    return lo if _algebraic_equals(c0, c1, ell0, ell1, lo) else hi


def _algebraic_equals(c0: int, c1: int, ell0: int, ell1: int, n: int) -> bool:
    import sympy

    x = sympy.Symbol("x")
    value = (sympy.root(c0, ell0) + sympy.root(c1, ell0)) ** ell1
    return sympy.minimal_polynomial(value, x) == x - n


def join(w0: QSWitness, w1: QSWitness, gamma: RationalLike | None = None) -> QSWitness:
    """From alpha <= gamma via w0 and beta <= gamma via w1, a witness for alpha + beta <= gamma.

    When the exponents differ the bound needs gamma - q < 1, so ``gamma``
    must be given and the result is restricted to q > gamma - 1.
    """
    if w0.ell > w1.ell:
        w0, w1 = w1, w0
    lows = [v for v in (w0.valid_from, w1.valid_from) if v is not None]
    if w0.ell < w1.ell:
        if gamma is None:
            raise ValueError("joining different exponents needs gamma for the gamma - q < 1 range")
        lows.append(Q(gamma) - 1)
    c2 = join_constant(w0.d, w1.d, w0.ell, w1.ell)
    return QSWitness(Sum((w0.f, w1.f)), d=c2, ell=w1.ell, valid_from=max(lows) if lows else None)


def scale_witness(w: QSWitness, q: RationalLike) -> QSWitness:
    """Witness for (q alpha) <= beta from alpha <= beta."""
    q = Q(q)
    if q <= 0:
        raise ValueError("scale factor must be positive")
    f = w.f if q == 1 else Compose(Affine(q), w.f)
    return QSWitness(f, d=math.ceil(q**w.ell * w.d), ell=w.ell, valid_from=w.valid_from)


def h1_witness(alpha: LeftCEReal, bit_depth: int = H1_BIT_DEPTH) -> QSWitness:
    """Witness for alpha <=_qS h1(alpha) with d = 1, ell = 4, valid on (beta - 2^-5, beta)."""
    a = alpha.limit()
    if not 0 < a < 1:
        raise ValueError(f"{alpha.label}: limit {a} is outside (0, 1)")
    beta = h1_value(a)
    bits = BitSource.of_rational(beta, bit_depth, f"h1({qstr(a)})")
    return QSWitness(DprimeDecode(bits), d=1, ell=4, valid_from=beta - Fraction(1, 32))


def _root_exponent(d: int, ell: int) -> int:
    """Least e >= 0 with d <= 2^(e ell), so that d^(1/ell) <= 2^e."""
    e = 0
    while d > 1 << (e * ell):
        e += 1
    return e


def turing_via_qs(w: QSWitness, beta_name: RealName, n: int, max_extra: int = 64) -> int:
    """Level n of a name of alpha, computed from a name of beta through the witness.

    gamma = (z - 2) / 2^N with z = beta_name(N) is a lower bound of beta with
    2^-N <= beta - gamma <= 3 * 2^-N <= 2^(-ell n'), so
    alpha - f(gamma) <= d^(1/ell) 2^-n' <= 2^-(n+1).  The output rounds the
    midpoint of [f(gamma), f(gamma) + 2^-(n+1)].
    """
    n_prime = n + 1 + _root_exponent(w.d, w.ell)
    for _ in range(max_extra):
        N = w.ell * n_prime + 2
        gamma = Fraction(beta_name(N) - 2, 1 << N)
        if w.in_range(gamma):
            break
        n_prime += 1
    else:
        raise InsufficientDepth("could not place gamma inside the witness range")
    fg = w.f(gamma)
    if fg is None:
        raise InsufficientDepth(f"witness undefined at gamma = {gamma}")
    centre = fg + Fraction(1, 1 << (n + 2))
    return math.floor(centre * (1 << n) + Fraction(1, 2))

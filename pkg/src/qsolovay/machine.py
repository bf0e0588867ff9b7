"""Finite prefix-free machines with an explicit step bound.

A machine is a table of programs, each declared to halt after some number
of steps with an output, or to diverge.  Halting within the bound is
decidable, so truncated halting probabilities are exact rationals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rational import Q, RationalLike
from .reals import DEFAULT_COERCION_BITS, LeftCEReal, h1_transform


@dataclass(frozen=True)
class Program:
    bits: str
    halts: bool
    output: str | None = None
    steps: int = 0


@dataclass(frozen=True)
class PrefixFreeMachine:
    id: str
    programs: tuple[Program, ...]
    step_bound: int = 1000

    def __post_init__(self) -> None:
        seen = set()
        for p in self.programs:
            if any(c not in "01" for c in p.bits):
                raise ValueError(f"{self.id}: program {p.bits!r} is not a bit string")
            if p.bits in seen:
                raise ValueError(f"{self.id}: duplicate program {p.bits!r}")
            seen.add(p.bits)
        dom = sorted(p.bits for p in self.domain())
        # in lexicographic order a prefix sorts immediately before some extension
        for a, b in zip(dom, dom[1:]):
            if b.startswith(a):
                raise ValueError(f"{self.id}: halting set is not prefix-free ({a!r} < {b!r})")

    def domain(self) -> list[Program]:
        """Programs halting within the step bound, in enumeration order."""
        halting = [p for p in self.programs if p.halts and p.steps <= self.step_bound]
        return sorted(halting, key=lambda p: (p.steps, len(p.bits), p.bits))

    def run(self, bits: str) -> str | None:
        for p in self.domain():
            if p.bits == bits:
                return p.output
        return None


def omega_T(m: PrefixFreeMachine, T: RationalLike = 1) -> Fraction:
    """sum over the halting set of 2^(-|p|/T), for T in (0, 1] with 1/T a natural."""
    T = Q(T)
    if not 0 < T <= 1:
        raise ValueError("T must lie in (0, 1]")
    inv = 1 / T
    if inv.denominator != 1:
        raise ValueError(f"unsupported T = {T}: 1/T must be a natural")
    j = inv.numerator
    return sum((Fraction(1, 1 << (len(p.bits) * j)) for p in m.domain()), Fraction(0))


def omega_real(m: PrefixFreeMachine) -> LeftCEReal:
    """Omega as the partial sums of halting programs in enumeration order."""
    dom = m.domain()
    weights = [Fraction(1, 1 << len(p.bits)) for p in dom]

    def stage(n: int) -> Fraction:
        return sum(weights[: min(n, len(weights))], Fraction(0))

    total = sum(weights, Fraction(0))
    return LeftCEReal(stage, total, f"Omega[{m.id}]")


def omega_tower(m: PrefixFreeMachine, n: int, coercion_bits: int = DEFAULT_COERCION_BITS) -> LeftCEReal:
    """n-fold interleaving transform of the machine's Omega."""
    if n < 0:
        raise ValueError("tower level must be >= 0")
    x = omega_real(m)
    for _ in range(n):
        x = h1_transform(x, coercion_bits)
    return x


def complexity_profile(m: PrefixFreeMachine, target: str) -> int | None:
    """Shortest declared-halting program printing ``target``; None if there is none."""
    lengths = [len(p.bits) for p in m.domain() if p.output == target]
    return min(lengths) if lengths else None


def complexity_curve(m: PrefixFreeMachine, bits: str) -> list[int | None]:
    """complexity_profile of every prefix of ``bits`` (report data only)."""
    return [complexity_profile(m, bits[:n]) for n in range(1, len(bits) + 1)]


def toy34() -> PrefixFreeMachine:
    """The two-halting-program machine with Omega = 3/4."""
    return PrefixFreeMachine(
        "toy34",
        (Program("0", True, "1", 1), Program("10", True, "0", 2), Program("11", False)),
        step_bound=10,
    )

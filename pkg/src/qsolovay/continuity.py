"""Continuous cofinal functions built from reduction witnesses, and back.

Polylines come from a witness by picking breakpoints (b_n, f(b_n)) that sit
strictly inside the region hanging below the next breakpoint: a wedge of
slope d for Solovay witnesses, the curve z - (d (w - x))^(1/ell) for
quasi-Solovay ones.  ``smooth_hoelder`` replaces every polyline piece by a
concave power arc A - d (t - x)^(1/ell) through the same endpoints.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence, Union

from .errors import BudgetExceeded, InsufficientDepth, UndecidedComparison
from .rational import REFINE_CAP, Q, RationalInterval, RationalLike, qstr, root_enclosure
from .reals import LeftCEReal
from .reduction import DEFAULT_SEARCH_LIMIT, QSWitness

DEFAULT_EPS_T = Fraction(1, 1 << 24)
DEFAULT_EVAL_EPS = Fraction(1, 1 << 20)

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class RegionSpec:
    """The closed region below the anchor (w, z): -(d (w - x))^(1/ell) + z <= y <= z.

    ``kind`` is "D" (ell = 1, a wedge of slope d) or "E".  Membership is
    decided exactly by comparing ell-th powers.
    """

    w: Fraction
    z: Fraction
    d: int
    ell: int = 1

    @property
    def kind(self) -> str:
        return "D" if self.ell == 1 else "E"

    def contains(self, x: RationalLike, y: RationalLike) -> bool:
        x, y = Q(x), Q(y)
        if x > self.w or y > self.z:
            return False
        return (self.z - y) ** self.ell <= self.d * (self.w - x)

    def interior(self, x: RationalLike, y: RationalLike) -> bool:
        x, y = Q(x), Q(y)
        if x >= self.w or y >= self.z:
            return False
        return (self.z - y) ** self.ell < self.d * (self.w - x)


# -- segments -----------------------------------------------------------------


@dataclass(frozen=True)
class LinearSegment:
    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction
    kind = "linear"

    @property
    def slope(self) -> Fraction:
        return (self.y1 - self.y0) / (self.x1 - self.x0)

    def value(self, x: Fraction, eps: Fraction = DEFAULT_EVAL_EPS) -> RationalInterval:
        return RationalInterval.point(self.y0 + self.slope * (x - self.x0))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ConstantSegment:
    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction
    kind = "constant"

    def value(self, x: Fraction, eps: Fraction = DEFAULT_EVAL_EPS) -> RationalInterval:
        return RationalInterval.point(self.y0)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind}


@dataclass(frozen=True)
class PowerSegment:
    """g(x) = A - d (t - x)^(1/ell) on [x0, x1], with t > x1 the root of the matching equation."""

    x0: Fraction
    y0: Fraction
    x1: Fraction
    y1: Fraction
    d: int
    ell: int
    t: RationalInterval
    A: RationalInterval
    kind = "power"

    @property
    def s(self) -> Fraction:
        return Fraction(1, self.ell)

    def residual(self, x: Fraction, eps: Fraction) -> RationalInterval:
        return _residual(self.x0, self.x1, self.y1 - self.y0, self.d, self.ell, x, eps)

    def refined(self, eps_t: Fraction) -> PowerSegment:
        if self.t.width <= eps_t:
            return self
        t = _bisect_root(self.x0, self.x1, self.y1 - self.y0, self.d, self.ell, self.t, eps_t)
        return replace(self, t=t, A=_arc_height(self, t))

    def value(self, x: Fraction, eps: Fraction = DEFAULT_EVAL_EPS) -> RationalInterval:
        # exact by construction of t
        if x == self.x0:
            return RationalInterval.point(self.y0)
        if x == self.x1:
            return RationalInterval.point(self.y1)
        seg = self
        for _ in range(REFINE_CAP):
            iv = seg._value(x, eps / (8 * self.d))
            if iv.width <= eps:
                return iv
            seg = seg.refined(seg.t.width / 4)
        raise UndecidedComparison(f"could not enclose g({x}) to width {eps}")

    def _value(self, x: Fraction, root_eps: Fraction) -> RationalInterval:
        # g(x) = y1 + d ((t - x1)^s - (t - x)^s) is increasing in t for x <= x1
        lo_t, hi_t = self.t.lo, self.t.hi
        lo = self.y1 + self.d * (
            root_enclosure(lo_t - self.x1, self.ell, root_eps).lo
            - root_enclosure(lo_t - x, self.ell, root_eps).hi
        )
        hi = self.y1 + self.d * (
            root_enclosure(hi_t - self.x1, self.ell, root_eps).hi
            - root_enclosure(hi_t - x, self.ell, root_eps).lo
        )
        return RationalInterval(lo, hi)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "s": qstr(self.s),
            "d": self.d,
            "t": self.t.to_dict(),
            "A": self.A.to_dict(),
        }


Segment = Union[LinearSegment, ConstantSegment, PowerSegment]


@dataclass(frozen=True)
class PiecewiseCurve:
    """Constant ``head`` on (-inf, x_0], then one segment per breakpoint gap."""

    breakpoints: tuple[Point, ...]
    segments: tuple[Segment, ...]
    provenance: str = ""
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.breakpoints:
            raise ValueError("a curve needs at least one breakpoint")
        if len(self.segments) != len(self.breakpoints) - 1:
            raise ValueError("one segment per breakpoint gap")
        xs = [x for x, _ in self.breakpoints]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be strictly increasing in x")
        ys = [y for _, y in self.breakpoints]
        if any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("breakpoint values must be nondecreasing")

    @property
    def head(self) -> Fraction:
        return self.breakpoints[0][1]

    @property
    def xs(self) -> list[Fraction]:
        return [x for x, _ in self.breakpoints]

    @property
    def right_end(self) -> Fraction:
        return self.breakpoints[-1][0]

    def segment_at(self, x: Fraction) -> Segment | None:
        """The segment containing x, or None in the head region."""
        xs = self.xs
        if x <= xs[0]:
            return None
        if x > xs[-1]:
            raise ValueError(f"x = {x} lies beyond the last breakpoint {xs[-1]}")
        return self.segments[bisect.bisect_left(xs, x) - 1]

    def eval(self, x: RationalLike, eps: RationalLike = DEFAULT_EVAL_EPS) -> RationalInterval:
        x, eps = Q(x), Q(eps)
        seg = self.segment_at(x)
        if seg is None:
            return RationalInterval.point(self.head)
        return seg.value(x, eps)

    __call__ = eval

    def slopes(self) -> list[Fraction]:
        return [s.slope for s in self.segments if isinstance(s, LinearSegment)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "provenance": self.provenance,
            "head": qstr(self.head),
            "breakpoints": [[qstr(x), qstr(y)] for x, y in self.breakpoints],
            "segments": [s.to_dict() for s in self.segments],
        }

    def sample_rows(self, n: int, eps: RationalLike = DEFAULT_EVAL_EPS) -> list[tuple[str, str, str]]:
        """(x, y_lo, y_hi) on a grid from a little left of x_0 to the last breakpoint."""
        x0, x1 = self.xs[0], self.right_end
        width = x1 - x0 if x1 > x0 else Fraction(1)
        start = x0 - width / 8
        rows = []
        for i in range(n):
            x = start + (x1 - start) * Fraction(i, max(n - 1, 1))
            iv = self.eval(x, eps)
            rows.append((qstr(x), qstr(iv.lo), qstr(iv.hi)))
        return rows


def eval_curve(c: PiecewiseCurve, x: RationalLike, eps: RationalLike = DEFAULT_EVAL_EPS) -> RationalInterval:
    return c.eval(x, eps)


def _linear_curve(points: Sequence[Point], provenance: str, meta: dict[str, Any]) -> PiecewiseCurve:
    segs = tuple(LinearSegment(x0, y0, x1, y1) for (x0, y0), (x1, y1) in zip(points, points[1:]))
    return PiecewiseCurve(tuple(points), segs, provenance, meta)


# -- polylines from witnesses --------------------------------------------------


def _build_polyline(
    alpha: LeftCEReal,
    beta: LeftCEReal,
    w: QSWitness,
    b: LeftCEReal | Callable[[int], Fraction],
    steps: int,
    search_limit: int,
) -> tuple[list[Point], list[int]]:
    stage = b.stage if isinstance(b, LeftCEReal) else b
    a_lim, b_lim = alpha.limit(), beta.limit()

    def point(i: int) -> Point:
        x = stage(i)
        y = w.f(x)
        if y is None:
            raise InsufficientDepth(f"witness undefined at b_{i} = {x}")
        if (a_lim - y) ** w.ell >= w.d * (b_lim - x) or y > a_lim:
            raise ValueError(f"witness fails at b_{i} = {x}; not a valid reduction on these fixtures")
        return x, y

    i = 0
    while not w.in_range(stage(i)):
        i += 1
        if i >= search_limit:
            raise InsufficientDepth("no stage of b inside the witness range")
    points = [point(i)]
    used = [i]
    while len(points) <= steps:
        i += 1
        if i >= search_limit:
            raise InsufficientDepth(
                f"interior-point search exhausted {search_limit} stages after {len(points)} breakpoints"
            )
        x, y = point(i)
        if y <= points[-1][1] or x <= points[-1][0]:
            continue  # thinning: keep f(b_n) strictly increasing
        region = RegionSpec(x, y, w.d, w.ell)
        if all(region.interior(px, py) for px, py in points):
            points.append((x, y))
            used.append(i)
    return points, used


def build_lipschitz(
    alpha: LeftCEReal,
    beta: LeftCEReal,
    w: QSWitness,
    b: LeftCEReal | Callable[[int], Fraction],
    steps: int,
    search_limit: int = DEFAULT_SEARCH_LIMIT,
) -> PiecewiseCurve:
    """Polyline with every slope < d from a Solovay witness (ell = 1)."""
    if w.ell != 1:
        raise ValueError("build_lipschitz needs a Solovay witness (ell = 1)")
    points, used = _build_polyline(alpha, beta, w, b, steps, search_limit)
    return _linear_curve(points, "lipschitz", {"d": w.d, "l": 1, "stages": used})


def build_hoelder_polyline(
    alpha: LeftCEReal,
    beta: LeftCEReal,
    w: QSWitness,
    b: LeftCEReal | Callable[[int], Fraction],
    steps: int,
    search_limit: int = DEFAULT_SEARCH_LIMIT,
) -> PiecewiseCurve:
    """Polyline whose breakpoints are interior to the power regions of later breakpoints."""
    points, used = _build_polyline(alpha, beta, w, b, steps, search_limit)
    return _linear_curve(points, "hoelder-polyline", {"d": w.d, "l": w.ell, "stages": used})


def anchored_violations(
    c: PiecewiseCurve, d: int, ell: int, xs: Iterable[RationalLike]
) -> list[tuple[Fraction, Fraction]]:
    """Pairs (x, r) with r a breakpoint, x < r and (c(r) - c(x))^ell > d (r - x).

    Only meaningful on curves with exact evaluation (polylines).
    """
    bad = []
    xs = [Q(x) for x in xs]
    for r, yr in c.breakpoints:
        for x in xs:
            if x < r:
                yx = c.eval(x)
                if not yx.is_point:
                    raise ValueError("anchored check needs exactly evaluable curves")
                if (yr - yx.lo) ** ell > d * (r - x):
                    bad.append((x, r))
    return bad


# -- smoothing -----------------------------------------------------------------


def _residual(r0, r1, rise, d, ell, x, eps) -> RationalInterval:
    """d (x - r0)^s - d (x - r1)^s - rise, for x >= r1."""
    u = root_enclosure(x - r0, ell, eps)
    v = root_enclosure(x - r1, ell, eps)
    return RationalInterval(d * (u.lo - v.hi) - rise, d * (u.hi - v.lo) - rise)


def _sign_at(r0, r1, rise, d, ell, x) -> int:
    eps = Fraction(1, 1 << 32)
    for _ in range(REFINE_CAP + 1):
        iv = _residual(r0, r1, rise, d, ell, x, eps)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
        if iv.lo == iv.hi == 0:
            return 0
        eps /= 2
    raise UndecidedComparison(f"residual sign undecided at {x}")


def _bisect_root(r0, r1, rise, d, ell, bracket: RationalInterval, eps_t) -> RationalInterval:
    lo, hi = bracket.lo, bracket.hi
    while hi - lo > eps_t:
        # the root is a single point; if the midpoint cannot be decided try off-centre points
        for frac in (Fraction(1, 2), Fraction(3, 8), Fraction(5, 8)):
            mid = lo + (hi - lo) * frac
            try:
                sg = _sign_at(r0, r1, rise, d, ell, mid)
                break
            except UndecidedComparison:
                continue
        else:
            raise UndecidedComparison("bisection stalled near the root")
        if sg == 0:
            return RationalInterval.point(mid)
        if sg > 0:
            lo = mid
        else:
            hi = mid
    return RationalInterval(lo, hi)


def _arc_height(seg: PowerSegment, t: RationalInterval, eps: Fraction = DEFAULT_EPS_T) -> RationalInterval:
    lo = seg.y1 + seg.d * root_enclosure(t.lo - seg.x1, seg.ell, eps).lo
    hi = seg.y1 + seg.d * root_enclosure(t.hi - seg.x1, seg.ell, eps).hi
    return RationalInterval(lo, hi)


def solve_t(
    r0: Fraction, r1: Fraction, rise: Fraction, d: int, ell: int, eps_t: Fraction = DEFAULT_EPS_T,
    doubling_cap: int = 256,
) -> RationalInterval:
    """Enclosure of the root t > r1 of d (x - r0)^s - d (x - r1)^s = rise."""
    gap = r1 - r0
    if _sign_at(r0, r1, rise, d, ell, r1) <= 0:
        raise ValueError("rise must be below d (r1 - r0)^s for the arc to exist")
    for j in range(doubling_cap):
        X = r1 + gap * (1 << j)
        sg = _sign_at(r0, r1, rise, d, ell, X)
        if sg == 0:
            return RationalInterval.point(X)
        if sg < 0:
            break
    else:
        raise ValueError("no sign change found while doubling the bracket")
    lo = r1 if j == 0 else r1 + gap * (1 << (j - 1))
    return _bisect_root(r0, r1, rise, d, ell, RationalInterval(lo, X), eps_t)


def smooth_hoelder(
    h: PiecewiseCurve, d: int, ell: int, eps_t: RationalLike = DEFAULT_EPS_T
) -> PiecewiseCurve:
    """Replace each polyline piece by the power arc through its endpoints.

    Requires h(r_n) - h(r_k) < d (r_n - r_k)^(1/ell) for all k < n, checked
    exactly as (h(r_n) - h(r_k))^ell < d^ell (r_n - r_k).  Zero-rise pieces
    become constant segments.
    """
    eps_t = Q(eps_t)
    if ell < 2:
        raise ValueError("smoothing needs ell >= 2; ell = 1 is the Lipschitz case")
    pts = h.breakpoints
    for n in range(len(pts)):
        for k in range(n):
            rise, run = pts[n][1] - pts[k][1], pts[n][0] - pts[k][0]
            if rise**ell >= d**ell * run:
                raise ValueError(
                    f"breakpoints {k} and {n} violate the anchored Hoelder bound; cannot smooth"
                )
    segs: list[Segment] = []
    for (r0, y0), (r1, y1) in zip(pts, pts[1:]):
        rise = y1 - y0
        if rise == 0:
            segs.append(ConstantSegment(r0, y0, r1, y1))
            continue
        t = solve_t(r0, r1, rise, d, ell, eps_t)
        seg = PowerSegment(r0, y0, r1, y1, d, ell, t, RationalInterval.point(0))
        seg = replace(seg, A=_arc_height(seg, t))
        for x, y in ((r0, y0), (r1, y1)):
            if not seg._value(x, eps_t).contains(y):
                raise ArithmeticError(f"arc misses its endpoint ({x}, {y})")
        segs.append(seg)
    meta = dict(h.meta, d=d, l=ell, eps_t=qstr(eps_t))
    return PiecewiseCurve(pts, tuple(segs), "hoelder-smooth", meta)


# -- modulus certification -------------------------------------------------------


@dataclass(frozen=True)
class ModulusClaim:
    """|c(x2) - c(x1)|^ell (< or <=) coef |x2 - x1|."""

    coef: Fraction
    ell: int = 1
    strict: bool = False
    name: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "coef": qstr(self.coef), "l": self.ell, "strict": self.strict}


def lipschitz(L: RationalLike) -> ModulusClaim:
    return ModulusClaim(Q(L), 1, False, f"lipschitz({Q(L)})")


def hoelder(d: int, ell: int) -> ModulusClaim:
    """|g(y) - g(x)| < 3^(1-s) d |y - x|^s with s = 1/ell, as an ell-th power claim."""
    return ModulusClaim(Fraction(3 ** (ell - 1) * d**ell), ell, True, f"hoelder(3^(1-1/{ell})*{d}, 1/{ell})")


def anchored_hoelder(H: RationalLike, ell: int) -> ModulusClaim:
    """(f(r) - f(x))^ell <= H (r - x)."""
    return ModulusClaim(Q(H), ell, False, f"anchored({Q(H)}, {ell})")


@dataclass(frozen=True)
class PairVerdict:
    x1: Fraction
    x2: Fraction
    verdict: str  # holds | fails | undecided
    diff: RationalInterval | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "x1": qstr(self.x1),
            "x2": qstr(self.x2),
            "verdict": self.verdict,
            "diff": None if self.diff is None else self.diff.to_dict(),
        }


@dataclass(frozen=True)
class ModulusReport:
    claim: ModulusClaim
    verdicts: tuple[PairVerdict, ...]
    mode: str

    @property
    def holds(self) -> bool:
        return all(v.verdict == "holds" for v in self.verdicts)

    def counts(self) -> dict[str, int]:
        out = {"holds": 0, "fails": 0, "undecided": 0}
        for v in self.verdicts:
            out[v.verdict] += 1
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "claim": self.claim.to_dict(),
            "mode": self.mode,
            "holds": self.holds,
            "counts": self.counts(),
            "pairs": [v.to_dict() for v in self.verdicts],
        }


def _decide_pair(
    c: PiecewiseCurve, x1: Fraction, x2: Fraction, claim: ModulusClaim, eps: Fraction, cap: int,
    anchored: bool,
) -> PairVerdict:
    bound = claim.coef * abs(x2 - x1)
    diff = None
    for _ in range(cap + 1):
        v1, v2 = c.eval(x1, eps), c.eval(x2, eps)
        diff = v2 - v1
        if anchored:
            hi, lo = max(diff.hi, Fraction(0)), max(diff.lo, Fraction(0))
        else:
            hi = max(abs(diff.lo), abs(diff.hi))
            lo = Fraction(0) if diff.lo <= 0 <= diff.hi else min(abs(diff.lo), abs(diff.hi))
        up, down = hi**claim.ell, lo**claim.ell
        if (up < bound) if claim.strict else (up <= bound):
            return PairVerdict(x1, x2, "holds", diff)
        if (down >= bound) if claim.strict else (down > bound):
            return PairVerdict(x1, x2, "fails", diff)
        eps /= 2
    return PairVerdict(x1, x2, "undecided", diff)


def certify_modulus(
    c: PiecewiseCurve,
    pairs: Iterable[tuple[RationalLike, RationalLike]],
    claim: ModulusClaim,
    mode: str = "all",
    eps: RationalLike = DEFAULT_EVAL_EPS,
    cap: int = REFINE_CAP,
) -> ModulusReport:
    """Per-pair verdicts for a modulus claim.

    In ``anchored`` mode the larger point of each pair must be a breakpoint
    and the claim is one-sided: c(r) - c(x) bounded for x < r.
    """
    if mode not in ("all", "anchored"):
        raise ValueError(f"unknown mode {mode!r}")
    xs = set(c.xs)
    out = []
    for x1, x2 in pairs:
        x1, x2 = Q(x1), Q(x2)
        if x1 > x2:
            x1, x2 = x2, x1
        if mode == "anchored" and x2 not in xs:
            raise ValueError(f"anchored pairs need a breakpoint as larger point, got {x2}")
        out.append(_decide_pair(c, x1, x2, claim, Q(eps), cap, mode == "anchored"))
    return ModulusReport(claim, tuple(out), mode)


# -- extraction of a Solovay witness from a curve ----------------------------------


def _floor_scaled(curve_eval, q: Fraction, k: int, cap: int) -> int:
    """floor(f(q) 2^k) from enclosures of f(q)."""
    eps = Fraction(1, 1 << (k + 3))
    for _ in range(cap + 1):
        iv = curve_eval(q, eps)
        lo, hi = math.floor(iv.lo * (1 << k)), math.floor(iv.hi * (1 << k))
        if lo == hi:
            return lo
        eps /= 2
    raise UndecidedComparison(f"dyadic value, adjust fixture (digit {k} of f({q}) stalls)")


@dataclass(frozen=True)
class Extraction:
    q: Fraction
    value: Fraction
    index: int
    round: int
    verified: bool | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": qstr(self.q),
            "g(q)": qstr(self.value),
            "n": self.index,
            "round": self.round,
            "verified": self.verified,
        }


def upper_approximant(curve_eval, q: Fraction, n: int, cap: int = REFINE_CAP) -> Fraction:
    """c_n = 0.s_1 ... s_{k-1} 1 where k >= n is the first zero digit of f(q)."""
    k = n
    while True:
        z = _floor_scaled(curve_eval, q, k, cap)
        if z % 2 == 0:
            return Fraction(z + 1, 1 << k)
        k += 1
        if k > n + 4096:
            raise UndecidedComparison("no zero digit found; f(q) looks dyadic from below")


def extract_witness(
    curve_eval: Callable[[Fraction, Fraction], RationalInterval],
    left_cut: LeftCEReal,
    L: RationalLike,
    q: RationalLike,
    beta: LeftCEReal | None = None,
    max_rounds: int = 4096,
) -> Extraction:
    """Rational g(q) from a certified evaluator and an enumeration of alpha's left cut.

    Round t computes c_t and tests c_1 .. c_t against stage t of alpha; the
    first hit is returned.  With fixture limits for alpha and ``beta`` the
    result is checked against |alpha - g(q)| <= L |beta - q|.
    """
    q, L = Q(q), Q(L)
    cs: list[Fraction] = []
    for t in range(1, max_rounds + 1):
        cs.append(upper_approximant(curve_eval, q, t))
        a_t = left_cut.stage(t)
        for n, c in enumerate(cs, start=1):
            if c < a_t:
                verified = None
                if beta is not None and left_cut.exact_limit is not None and beta.exact_limit is not None:
                    verified = abs(left_cut.exact_limit - c) <= L * abs(beta.exact_limit - q)
                return Extraction(q, c, n, t, verified)
    raise BudgetExceeded(f"no upper approximant of f({q}) entered the left cut in {max_rounds} rounds")

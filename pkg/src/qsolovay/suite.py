"""The acceptance battery: twelve exact checks over the shipped fixtures.

Every check returns a JSON-ready dict with a boolean ``holds`` and the exact
values behind the verdict.  No timings are recorded, so two runs with the
same config produce identical reports.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Any, Callable

from .continuity import (
    PiecewiseCurve,
    LinearSegment,
    build_lipschitz,
    certify_modulus,
    extract_witness,
    hoelder,
    smooth_hoelder,
)
from .io import RunConfig, dumps
from .machine import omega_T, omega_tower
from .martinlof import bound_log2, first_level_below, ml_test_level
from .rational import prefix_agreement_counterexamples, qstr
from .reals import LeftCEReal, add, name_of
from .reduction import (
    Affine,
    QSWitness,
    check_witness,
    compose,
    h1_witness,
    index_function,
    join,
    reflexive_witness,
    sequence_pairs_hold,
    turing_via_qs,
    witness_from_sequences,
)

Fixtures = dict[str, LeftCEReal]
Reduction = tuple[LeftCEReal, LeftCEReal, QSWitness]

SAMPLE_BITS = 30


def rng_for(seed: int, tag: str) -> random.Random:
    return random.Random(f"{seed}:{tag}")


def sample_below(rng: random.Random, hi: Fraction, width: Fraction, count: int) -> list[Fraction]:
    """``count`` rationals in the open interval (hi - width, hi)."""
    scale = 1 << SAMPLE_BITS
    return [hi - width * Fraction(rng.randrange(1, scale), scale) for _ in range(count)]


def sample_pairs(
    rng: random.Random, lo: Fraction, hi: Fraction, count: int
) -> list[tuple[Fraction, Fraction]]:
    scale = 1 << SAMPLE_BITS
    out = []
    while len(out) < count:
        x1 = lo + (hi - lo) * Fraction(rng.randrange(0, scale + 1), scale)
        x2 = lo + (hi - lo) * Fraction(rng.randrange(0, scale + 1), scale)
        if x1 != x2:
            out.append((min(x1, x2), max(x1, x2)))
    return out


def lipschitz_reductions(fx: Fixtures) -> dict[str, Reduction]:
    return {
        "identity:HALF<=HALF": (fx["HALF"], fx["HALF"], reflexive_witness()),
        "x-1/3:THIRD<=TWOTHIRDS": (
            fx["THIRD"], fx["TWOTHIRDS"], QSWitness(Affine(Fraction(1), Fraction(-1, 3)), 2),
        ),
        "x/2:QUARTER<=HALF": (fx["QUARTER"], fx["HALF"], QSWitness(Affine(Fraction(1, 2)), 1)),
    }


def h1_reductions(fx: Fixtures) -> dict[str, Reduction]:
    return {
        "h1:HALF<=H1HALF": (fx["HALF"], fx["H1HALF"], h1_witness(fx["HALF"])),
        "h1:THIRD<=H1THIRD": (fx["THIRD"], fx["H1THIRD"], h1_witness(fx["THIRD"])),
        "h1:OMEGA34<=H1OMEGA": (fx["OMEGA34"], fx["H1OMEGA"], h1_witness(fx["OMEGA34"])),
    }


def _summary(report) -> dict[str, Any]:
    fails = report.failures()
    return {
        "holds": report.holds,
        "checked": len(report.records),
        "failures": [r.to_dict() for r in fails[:5]],
    }


# -- criteria -----------------------------------------------------------------------


def c01_reflexive(cfg: RunConfig, fx: Fixtures) -> dict[str, Any]:
    rng = rng_for(cfg.seed, "reflexive")
    w = reflexive_witness()
    per = {}
    for label, x in fx.items():
        qs = sample_below(rng, x.limit(), Fraction(1), cfg.sample_count)
        per[label] = _summary(check_witness(x, x, w, qs))
    return {"holds": all(v["holds"] for v in per.values()), "fixtures": per}


def c02_h1_gadget(cfg: RunConfig, fx: Fixtures) -> dict[str, Any]:
    alpha, beta = fx["HALF"], fx["H1HALF"]
    w = h1_witness(alpha)
    qs = sample_below(rng_for(cfg.seed, "h1"), beta.limit(), Fraction(1, 32), 100)
    rep = check_witness(alpha, beta, w, qs)
    worked = check_witness(alpha, beta, w, [Fraction(9, 16)]).records[0]
    margin = worked.rhs - worked.lhs if worked.holds else None
    return {
        "holds": rep.holds and worked.holds and margin == Fraction(1, 48),
        "d": w.d,
        "l": w.ell,
        "samples": _summary(rep),
        "worked_point": worked.to_dict(),
        "worked_margin": None if margin is None else qstr(margin),
    }


def c03_prefix_agreement(cfg: RunConfig, fx: Fixtures) -> dict[str, Any]:
    betas = {k: fx[k].limit() for k in ("H1HALF", "H1THIRD", "H1OMEGA")}
    rows = []
    for label, b in betas.items():
        for m in range(1, 6):
            bad = prefix_agreement_counterexamples(b, m, 7)
            rows.append({"beta": label, "m": m, "counterexamples": [qstr(q) for q in bad]})
    return {"holds": all(not r["counterexamples"] for r in rows), "k_max": 7, "rows": rows}


def _sequence_cycle(alpha: LeftCEReal, beta: LeftCEReal, w: QSWitness, depth: int, rng, count: int):
    g = index_function(w, alpha, beta, depth)
    pairs_ok = sequence_pairs_hold(alpha, beta, g, w.d, w.ell)
    a_sub = lambda n: alpha.stage(g[n])  # noqa: E731
    w2 = witness_from_sequences(a_sub, beta.stage, w.d, w.ell, depth)
    lo = beta.stage(0) if w.valid_from is None else max(beta.stage(0), w.valid_from)
    hi = beta.stage(depth - 1)
    qs = sample_below(rng, hi, hi - lo, count) if hi > lo else []
    rep = check_witness(alpha, beta, w2, qs)
    return {
        "g": g[:8],
        "pairs_hold": pairs_ok,
        "check": _summary(rep),
        "holds": pairs_ok and (rep.holds or not qs),
    }


def c04_sequence_cycle(cfg: RunConfig, fx: Fixtures, depth: int = 32) -> dict[str, Any]:
    rng = rng_for(cfg.seed, "cycle")
    cases: dict[str, Reduction] = {f"identity:{k}": (x, x, reflexive_witness()) for k, x in fx.items()}
    cases.update(lipschitz_reductions(fx))
    th = h1_reductions(fx)["h1:THIRD<=H1THIRD"]
    cases["h1:THIRD<=H1THIRD"] = th
    out = {k: _sequence_cycle(a, b, w, depth, rng, cfg.sample_count) for k, (a, b, w) in cases.items()}
    return {"holds": all(v["holds"] for v in out.values()), "depth": depth, "cases": out}


def c05_algebra(cfg: RunConfig, fx: Fixtures) -> dict[str, Any]:
    rng = rng_for(cfg.seed, "algebra")
    half, quarter = fx["HALF"], fx["QUARTER"]
    w1 = QSWitness(Affine(Fraction(1)), 2, 1)
    w2 = QSWitness(Affine(Fraction(1)), 3, 2, valid_from=Fraction(0))
    wc = compose(w1, w2)
    qs = sample_below(rng, half.limit(), Fraction(1, 2), cfg.sample_count)
    comp = {
        "constants": [wc.d, wc.ell],
        "first": _summary(check_witness(half, half, w1, qs)),
        "second": _summary(check_witness(half, half, w2, qs)),
        "composite": _summary(check_witness(half, half, wc, qs)),
    }
    j0 = QSWitness(Affine(Fraction(1, 2)), 1, 1)
    j1 = QSWitness(Affine(Fraction(1, 2)), 1, 2)
    wj = join(j0, j1, gamma=half.limit())
    both = add(quarter, quarter)
    qs2 = [q for q in sample_below(rng, half.limit(), Fraction(1), cfg.sample_count) if wj.in_range(q)]
    jn = {
        "constants": [wj.d, wj.ell],
        "valid_from": qstr(wj.valid_from),
        "part0": _summary(check_witness(quarter, half, j0, qs2)),
        "part1": _summary(check_witness(quarter, half, j1, qs2)),
        "joined": _summary(check_witness(both, half, wj, qs2)),
    }
    ok = (
        (wc.d, wc.ell) == (12, 2)
        and (wj.d, wj.ell) == (4, 2)
        and all(v["holds"] for v in (comp["first"], comp["second"], comp["composite"]))
        and all(v["holds"] for v in (jn["part0"], jn["part1"], jn["joined"]))
    )
    return {"holds": ok, "compose": comp, "join": jn}


def c06_lipschitz(cfg: RunConfig, fx: Fixtures, steps: int = 50) -> dict[str, Any]:
    out = {}
    for name, (alpha, beta, w) in lipschitz_reductions(fx).items():
        c = build_lipschitz(alpha, beta, w, beta, steps)
        slopes = c.slopes()
        ys = [y for _, y in c.breakpoints]
        a, b = alpha.limit(), beta.limit()
        bound_ok = all(a - y < w.d * (b - x) for x, y in c.breakpoints)
        last_gap = a - ys[-1]
        out[name] = {
            "d": w.d,
            "breakpoints": len(c.breakpoints),
            "max_slope": qstr(max(slopes)),
            "slopes_below_d": all(s < w.d for s in slopes),
            "nondecreasing": all(p <= q for p, q in zip(ys, ys[1:])),
            "within_witness_bound": bound_ok,
            "last_gap": qstr(last_gap),
            "approaches_alpha": last_gap < Fraction(1, 1 << 40),
        }
    ok = all(
        v["slopes_below_d"] and v["nondecreasing"] and v["within_witness_bound"] and v["approaches_alpha"]
        for v in out.values()
    )
    return {"holds": ok, "steps": steps, "curves": out}


def worked_polyline() -> PiecewiseCurve:
    p0, p1 = (Fraction(0), Fraction(0)), (Fraction(1), Fraction(1, 2))
    return PiecewiseCurve((p0, p1), (LinearSegment(*p0, *p1),), "worked")


def c07_smoothing(cfg: RunConfig, fx: Fixtures) -> dict[str, Any]:
    eps_t = min(cfg.eps_t, Fraction(1, 1 << 20))
    g = smooth_hoelder(worked_polyline(), 1, 2, eps_t)
    seg = g.segments[0]
    t = seg.t
    e0, e1 = g.eval(Fraction(0), cfg.eval_eps), g.eval(Fraction(1), cfg.eval_eps)
    pairs = sample_pairs(rng_for(cfg.seed, "smooth"), Fraction(-1, 4), Fraction(1), 200)
    rep = certify_modulus(g, pairs, hoelder(1, 2), eps=cfg.eval_eps, cap=cfg.refine_cap)
    counts = rep.counts()
    ok = (
        t.contains(Fraction(25, 16))
        and t.width <= Fraction(1, 1 << 20)
        and e0.is_point and e0.lo == 0
        and e1.is_point and e1.lo == Fraction(1, 2)
        and rep.holds
        and counts["undecided"] == 0
    )
    return {
        "holds": ok,
        "t": t.to_dict(),
        "A": seg.A.to_dict(),
        "g(0)": e0.to_dict(),
        "g(1)": e1.to_dict(),
        "claim": rep.claim.to_dict(),
        "counts": counts,
    }


def c08_roundtrip(cfg: RunConfig, fx: Fixtures, steps: int = 20) -> dict[str, Any]:
    half = fx["HALF"]
    c = build_lipschitz(half, half, reflexive_witness(), half, steps)
    lo, hi = c.xs[0], c.right_end
    qs = sample_below(rng_for(cfg.seed, "extract"), hi, hi - lo, 20)
    rows = [extract_witness(c.eval, half, 2, q, beta=half).to_dict() for q in qs]
    return {"holds": all(r["verified"] is True for r in rows), "L": 2, "extractions": rows}


def c09_ml_test(cfg: RunConfig, fx: Fixtures, k: int = 1, ell: int = 2) -> dict[str, Any]:
    f = Affine(Fraction(1))
    levels = [ml_test_level(f, m, k, ell) for m in range(1, 13)]
    first = first_level_below(k, ell)
    first_by_scan = next(m for m in range(1, 100) if bound_log2(m, k, ell) <= -m)
    return {
        "holds": all(lv.holds for lv in levels) and first == 9 and first_by_scan == 9,
        "k": k,
        "l": ell,
        "first_level_below": first,
        "levels": [lv.to_dict(with_intervals=False) for lv in levels],
    }


def c10_omega(cfg: RunConfig, fx: Fixtures) -> dict[str, Any]:
    m = cfg.machines()["toy34"]
    o1, o2 = omega_T(m, 1), omega_T(m, Fraction(1, 2))
    tower = omega_tower(m, 1).limit()
    return {
        "holds": (o1, o2, tower) == (Fraction(3, 4), Fraction(5, 16), Fraction(31, 48)),
        "omega_T=1": qstr(o1),
        "omega_T=1/2": qstr(o2),
        "tower_1": qstr(tower),
    }


def c11_names(cfg: RunConfig, fx: Fixtures, n_max: int = 20) -> dict[str, Any]:
    out = {}
    for name, (alpha, beta, w) in h1_reductions(fx).items():
        a = alpha.limit()
        rows = []
        for n in range(n_max + 1):
            z = turing_via_qs(w, name_of(beta), n)
            err = abs(a - Fraction(z, 1 << n))
            rows.append({"n": n, "z": z, "ok": err <= Fraction(1, 1 << n)})
        out[name] = {"holds": all(r["ok"] for r in rows), "z": [r["z"] for r in rows]}
    return {"holds": all(v["holds"] for v in out.values()), "n_max": n_max, "cases": out}


CRITERIA: list[tuple[int, str, Callable[[RunConfig, Fixtures], dict[str, Any]]]] = [
    (1, "reflexive witness on every fixture", c01_reflexive),
    (2, "interleaving gadget on HALF vs H1HALF", c02_h1_gadget),
    (3, "prefix agreement brute force", c03_prefix_agreement),
    (4, "sequence characterization cycle", c04_sequence_cycle),
    (5, "compose and join constants", c05_algebra),
    (6, "Lipschitz polylines", c06_lipschitz),
    (7, "power-arc smoothing and Hoelder certificate", c07_smoothing),
    (8, "extraction roundtrip", c08_roundtrip),
    (9, "interval cover measure bounds", c09_ml_test),
    (10, "toy halting probabilities", c10_omega),
    (11, "names through the reduction", c11_names),
]


def run_battery(cfg: RunConfig, only: set[int] | None = None) -> dict[str, Any]:
    fx = cfg.fixtures()
    results = []
    for cid, title, fn in CRITERIA:
        if only is not None and cid not in only:
            continue
        res = fn(cfg, fx)
        results.append({"id": cid, "title": title, **res})
    return {
        "schema": 1,
        "config": cfg.to_dict(),
        "criteria": results,
        "holds": all(r["holds"] for r in results),
    }


def determinism(cfg: RunConfig) -> dict[str, Any]:
    """Run the battery twice and compare the serialized reports byte for byte."""
    first = dumps(run_battery(cfg)).encode()
    second = dumps(run_battery(cfg)).encode()
    return {"id": 12, "title": "byte-identical reruns", "holds": first == second, "bytes": len(first)}


def run_suite(cfg: RunConfig) -> dict[str, Any]:
    report = run_battery(cfg)
    det = determinism(cfg)
    report["criteria"].append(det)
    report["holds"] = report["holds"] and det["holds"]
    return report

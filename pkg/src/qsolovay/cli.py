"""Command-line entry point.

Every subcommand builds a JSON report (``"schema": 1``, sorted keys).  With
``--out DIR`` the report goes to ``DIR/<subcommand>.json`` (plus a CSV for
curve commands); otherwise it is printed.  Exit status is 0 iff every
verdict holds, 1 on failed/undecided verdicts or internal numeric errors,
2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .continuity import (
    LinearSegment,
    PiecewiseCurve,
    build_hoelder_polyline,
    build_lipschitz,
    certify_modulus,
    extract_witness,
    hoelder,
    lipschitz,
    smooth_hoelder,
)
from .errors import BudgetExceeded, InsufficientDepth, InsufficientPrecision, UndecidedComparison
from .io import ConfigError, RunConfig, dumps, load_config, parse_q, witness_from_dict
from .machine import complexity_curve, omega_T, omega_tower
from .martinlof import bound_log2, first_level_below, ml_test_level, radius_power_exponent
from .rational import (
    bits_value,
    dprime_check,
    expansion_bits,
    h1_value,
    interleave_encode,
    is_dyadic,
    qstr,
    repetition_bits,
    terminating_bits,
)
from .reduction import Affine, QSWitness, check_witness, compose, join_constant
from .suite import c05_algebra, rng_for, run_suite, sample_below, sample_pairs

USAGE, FAILED = 2, 1


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------------


def _fixture(cfg_fx, label: str):
    if label not in cfg_fx:
        raise UsageError(f"unknown fixture {label!r}; known: {', '.join(sorted(cfg_fx))}")
    return cfg_fx[label]


def _witness(spec: str, fx) -> QSWitness:
    """JSON literal, or a path to a JSON file."""
    text = spec
    if not spec.lstrip().startswith("{"):
        p = Path(spec)
        if not p.exists():
            raise UsageError(f"--witness is neither JSON nor an existing file: {spec!r}")
        text = p.read_text()
    try:
        return witness_from_dict(json.loads(text), fx)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--witness: invalid JSON ({exc})") from exc


def _points(spec: str) -> PiecewiseCurve:
    """'x0:y0,x1:y1,...' as a polyline."""
    try:
        pts = [tuple(parse_q(v) for v in item.split(":")) for item in spec.split(",")]
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    if any(len(p) != 2 for p in pts):
        raise UsageError("--points expects x:y pairs separated by commas")
    segs = tuple(LinearSegment(*a, *b) for a, b in zip(pts, pts[1:]))
    return PiecewiseCurve(tuple(pts), segs, "points")


def _csv(rows: list[tuple[str, str, str]]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y_lo", "y_hi"))
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, report: dict[str, Any], csv_rows=None) -> None:
    report = {"schema": 1, "command": args.command, **report}
    text = dumps(report)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text)
        if csv_rows is not None:
            (out / f"{args.command}.csv").write_text(_csv(csv_rows))
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------------


def cmd_encode(args, cfg: RunConfig) -> bool:
    rep: dict[str, Any] = {}
    if args.q is not None:
        q = parse_q(args.q)
        if not 0 <= q < 1:
            raise UsageError("--q must lie in [0, 1)")
        rep["q"] = qstr(q)
        rep["h1"] = qstr(h1_value(q))
        rep["expansion"] = expansion_bits(q, args.bits)
        if is_dyadic(q):
            rep["terminating"] = terminating_bits(q)
            if q > 0:
                member, k = dprime_check(q)
                rep["dprime"] = {"member": member, "k": k}
    if args.sigma is not None:
        sigma = args.sigma
        rep["sigma"] = sigma
        rep["interleave"] = interleave_encode(sigma)
        rep["interleave_value"] = qstr(bits_value(interleave_encode(sigma)))
        if sigma:
            rep["repetition"] = repetition_bits(sigma)
            rep["repetition_value"] = qstr(bits_value(repetition_bits(sigma)))
    if not rep:
        raise UsageError("encode needs --q or --sigma")
    rep["holds"] = True
    _emit(args, rep)
    return True


def cmd_omega(args, cfg: RunConfig) -> bool:
    ms = cfg.machines()
    if args.machine not in ms:
        raise UsageError(f"unknown machine {args.machine!r}")
    m = ms[args.machine]
    T = parse_q(args.T)
    try:
        val = omega_T(m, T)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep: dict[str, Any] = {"machine": m.id, "T": qstr(T), "omega": qstr(val), "holds": True}
    if args.tower is not None:
        rep["tower"] = {"n": args.tower, "limit": qstr(omega_tower(m, args.tower).limit())}
    if args.profile is not None:
        rep["complexity_profile"] = complexity_curve(m, args.profile)
    print(val)
    if args.out is not None:
        _emit(args, rep)
    return True


def cmd_witness_check(args, cfg: RunConfig) -> bool:
    fx = cfg.fixtures()
    alpha, beta = _fixture(fx, args.alpha), _fixture(fx, args.beta)
    w = _witness(args.witness, fx)
    b = beta.limit()
    lo = w.valid_from if w.valid_from is not None else b - 1
    count = args.count if args.count is not None else cfg.sample_count
    qs = sample_below(rng_for(cfg.seed, "witness-check"), b, b - lo, count)
    rep = check_witness(alpha, beta, w, qs)
    _emit(args, {"alpha": args.alpha, "beta": args.beta, "witness": w.to_dict(), **rep.to_dict()})
    return rep.holds


def cmd_witness_algebra(args, cfg: RunConfig) -> bool:
    if args.op == "compose":
        w = compose(QSWitness(_identity(), args.d1, args.l1), QSWitness(_identity(), args.d2, args.l2))
        rep = {"op": "compose", "inputs": [[args.d1, args.l1], [args.d2, args.l2]], "result": [w.d, w.ell]}
        ok = True
    elif args.op == "join":
        l0, l1 = sorted((args.l1, args.l2))
        c = join_constant(args.d1, args.d2, l0, l1)
        rep = {"op": "join", "inputs": [[args.d1, args.l1], [args.d2, args.l2]], "result": [c, l1]}
        ok = True
    else:
        rep = c05_algebra(cfg, cfg.fixtures())
        ok = rep["holds"]
    rep["holds"] = ok
    _emit(args, rep)
    return ok


def _identity() -> Affine:
    return Affine(Fraction(1))


def cmd_ml_test(args, cfg: RunConfig) -> bool:
    fx = cfg.fixtures()
    f = _witness(args.witness, fx).f if args.witness else _identity()
    ms = range(1, args.m + 1) if args.all_levels else [args.m]
    levels = [ml_test_level(f, m, args.k, args.l) for m in ms]
    rep = {
        "k": args.k,
        "l": args.l,
        "first_level_below": first_level_below(args.k, args.l),
        "levels": [
            {
                **lv.to_dict(with_intervals=args.intervals),
                "radius_power": f"r^{2 * args.l} = 2^-{radius_power_exponent(lv.m, args.k)}",
                "below_2^-m": bound_log2(lv.m, args.k, args.l) <= -lv.m,
            }
            for lv in levels
        ],
        "holds": all(lv.holds for lv in levels),
    }
    _emit(args, rep)
    return rep["holds"]


def _curve(args, cfg: RunConfig):
    fx = cfg.fixtures()
    alpha, beta = _fixture(fx, args.alpha), _fixture(fx, args.beta)
    w = _witness(args.witness, fx)
    if args.command == "build-lipschitz" or (args.command in ("extract", "certify") and w.ell == 1):
        c = build_lipschitz(alpha, beta, w, beta, args.steps)
    else:
        c = build_hoelder_polyline(alpha, beta, w, beta, args.steps)
    return alpha, beta, w, c


def cmd_build_lipschitz(args, cfg: RunConfig) -> bool:
    alpha, beta, w, c = _curve(args, cfg)
    slopes = c.slopes()
    ok = all(s < w.d for s in slopes)
    rep = {
        "curve": c.to_dict(),
        "d": w.d,
        "max_slope": qstr(max(slopes)) if slopes else None,
        "holds": ok,
    }
    _emit(args, rep, c.sample_rows(cfg.sample_count, cfg.eval_eps))
    return ok


def cmd_build_hoelder(args, cfg: RunConfig) -> bool:
    if args.points:
        h = _points(args.points)
        d, ell = args.d, args.l
        if d is None or ell is None:
            raise UsageError("--points needs --d and --l")
    else:
        _, _, w, h = _curve(args, cfg)
        d, ell = w.d, w.ell
    rep: dict[str, Any] = {"polyline": h.to_dict(), "d": d, "l": ell}
    c = h
    if args.smooth:
        c = smooth_hoelder(h, d, ell, cfg.eps_t)
        rep["smooth"] = c.to_dict()
        pairs = sample_pairs(rng_for(cfg.seed, "build-hoelder"), c.xs[0] - 1, c.right_end, cfg.sample_count)
        cert = certify_modulus(c, pairs, hoelder(d, ell), eps=cfg.eval_eps, cap=cfg.refine_cap)
        rep["certificate"] = {"claim": cert.claim.to_dict(), "counts": cert.counts()}
        ok = cert.holds
    else:
        ok = True
    rep["holds"] = ok
    _emit(args, rep, c.sample_rows(cfg.sample_count, cfg.eval_eps))
    return ok


def cmd_extract(args, cfg: RunConfig) -> bool:
    alpha, beta, w, c = _curve(args, cfg)
    L = args.L if args.L is not None else w.d
    if args.q:
        qs = [parse_q(q) for q in args.q]
    else:
        qs = sample_below(rng_for(cfg.seed, "extract"), c.right_end, c.right_end - c.xs[0], 20)
    for q in qs:
        if q > c.right_end:
            raise UsageError(f"q = {q} lies beyond the constructed curve (last breakpoint {c.right_end})")
    rows = [extract_witness(c.eval, alpha, L, q, beta=beta).to_dict() for q in qs]
    ok = all(r["verified"] is True for r in rows)
    _emit(args, {"L": L, "extractions": rows, "holds": ok})
    return ok


def cmd_certify(args, cfg: RunConfig) -> bool:
    _, _, w, c = _curve(args, cfg)
    if args.smooth:
        c = smooth_hoelder(c, w.d, w.ell, cfg.eps_t)
    if args.claim == "lipschitz":
        claim = lipschitz(parse_q(args.L) if args.L else w.d)
    else:
        claim = hoelder(w.d, w.ell)
    rng = rng_for(cfg.seed, "certify")
    count = args.count if args.count is not None else cfg.sample_count
    if args.mode == "anchored":
        # larger point of each pair is a breakpoint
        xs = c.xs
        pairs = []
        for _ in range(count):
            r = xs[rng.randrange(len(xs))]
            x = sample_below(rng, r, r - xs[0] + 1, 1)[0]
            pairs.append((x, r))
    else:
        pairs = sample_pairs(rng, c.xs[0] - 1, c.right_end, count)
    rep = certify_modulus(c, pairs, claim, mode=args.mode, eps=cfg.eval_eps, cap=cfg.refine_cap)
    _emit(args, {"curve": c.to_dict(), **rep.to_dict()})
    return rep.holds


def cmd_suite(args, cfg: RunConfig) -> bool:
    rep = run_suite(cfg)
    for c in rep["criteria"]:
        print(f"{'PASS' if c['holds'] else 'FAIL'} {c['id']:>2} {c['title']}", file=sys.stderr)
    text = dumps(rep)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "suite.json").write_text(text)
    else:
        sys.stdout.write(text)
    return rep["holds"]


# -- parser -----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run config JSON (default: shipped config)")
    p.add_argument("--depth", type=int, help="stage depth override")
    p.add_argument("--seed", type=int, help="sampling seed override")
    p.add_argument("--out", help="directory for JSON/CSV reports (default: print)")


def _curve_args(p: argparse.ArgumentParser, need: bool = True) -> None:
    p.add_argument("--alpha", required=need, help="fixture label of alpha")
    p.add_argument("--beta", required=need, help="fixture label of beta")
    p.add_argument("--witness", required=need, help="witness JSON or path, e.g. '{\"kind\":\"identity\",\"d\":2}'")
    p.add_argument("--steps", type=int, default=10)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qsolovay", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="binary codes of a rational or a bit string")
    p.add_argument("--q")
    p.add_argument("--sigma")
    p.add_argument("--bits", type=int, default=16, help="expansion bits to show")
    _common(p)

    p = sub.add_parser("omega", help="generalized halting probability of a toy machine")
    p.add_argument("--machine", required=True)
    p.add_argument("--T", default="1")
    p.add_argument("--tower", type=int)
    p.add_argument("--profile", help="bit string whose prefix complexity profile to report")
    _common(p)

    p = sub.add_parser("witness-check", help="check a witness at seeded rationals below beta")
    _curve_args(p)
    p.add_argument("--count", type=int)
    _common(p)

    p = sub.add_parser("witness-algebra", help="compose/join constants, or the built-in chain checks")
    p.add_argument("--op", choices=("compose", "join", "check"), default="check")
    p.add_argument("--d1", type=int, default=2)
    p.add_argument("--l1", type=int, default=1)
    p.add_argument("--d2", type=int, default=3)
    p.add_argument("--l2", type=int, default=2)
    _common(p)

    p = sub.add_parser("ml-test", help="interval cover level(s) and measure bound")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--m", type=int, default=9)
    p.add_argument("--all-levels", action="store_true", help="report levels 1..m")
    p.add_argument("--intervals", action="store_true", help="include interval centres")
    p.add_argument("--witness", help="witness whose function places the centres (default identity)")
    _common(p)

    p = sub.add_parser("build-lipschitz", help="polyline from a Solovay witness")
    _curve_args(p)
    _common(p)

    p = sub.add_parser("build-hoelder", help="polyline from a qS witness, optionally smoothed")
    _curve_args(p, need=False)
    p.add_argument("--points", help="explicit polyline 'x:y,x:y,...' instead of a witness")
    p.add_argument("--d", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--smooth", action="store_true")
    _common(p)

    p = sub.add_parser("extract", help="Solovay witness values from a constructed curve")
    _curve_args(p)
    p.add_argument("--q", action="append", help="query point (repeatable)")
    p.add_argument("--L", type=int)
    _common(p)

    p = sub.add_parser("certify", help="certify a modulus claim on seeded pairs")
    _curve_args(p)
    p.add_argument("--claim", choices=("lipschitz", "hoelder"), default="lipschitz")
    p.add_argument("--L", help="Lipschitz constant (default d)")
    p.add_argument("--mode", choices=("all", "anchored"), default="all")
    p.add_argument("--smooth", action="store_true")
    p.add_argument("--count", type=int)
    _common(p)

    p = sub.add_parser("suite", help="run the acceptance battery")
    _common(p)
    return ap


COMMANDS = {
    "encode": cmd_encode,
    "omega": cmd_omega,
    "witness-check": cmd_witness_check,
    "witness-algebra": cmd_witness_algebra,
    "ml-test": cmd_ml_test,
    "build-lipschitz": cmd_build_lipschitz,
    "build-hoelder": cmd_build_hoelder,
    "extract": cmd_extract,
    "certify": cmd_certify,
    "suite": cmd_suite,
}


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else 0
    try:
        cfg = load_config(args.config)
        for key in ("depth", "seed"):
            v = getattr(args, key)
            if v is not None and v < 0:
                raise UsageError(f"--{key} must be a natural number")
        cfg = cfg.with_overrides(depth=args.depth, seed=args.seed, out=args.out)
        if args.out is None and cfg.out is not None:
            args.out = str(cfg.out)
        ok = COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE
    except (UndecidedComparison, BudgetExceeded, InsufficientDepth, InsufficientPrecision) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAILED
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED
    return 0 if ok else FAILED


if __name__ == "__main__":
    raise SystemExit(main())

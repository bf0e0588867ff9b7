"""Acceptance battery: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected into a terminal summary section.
"""
import json
import time
from contextlib import contextmanager
from fractions import Fraction as F
from itertools import product

import pytest

from conftest import ACCEPTANCE_LINES
from qsolovay.cli import main
from qsolovay.continuity import build_lipschitz, certify_modulus, extract_witness, hoelder, smooth_hoelder
from qsolovay.io import dumps
from qsolovay.machine import omega_T, omega_tower
from qsolovay.martinlof import first_level_below, ml_test_level
from qsolovay.rational import expansion_bits
from qsolovay.reals import add, name_of
from qsolovay.reduction import (
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
from qsolovay.suite import (
    c03_prefix_agreement,
    h1_reductions,
    lipschitz_reductions,
    rng_for,
    run_suite,
    sample_below,
    sample_pairs,
    worked_polyline,
)

ID = Affine(F(1))


@contextmanager
def criterion(cid, title, budget=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
    except BaseException:
        line = f"FAIL {cid:2d} {title}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"PASS {cid:2d} {title}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_01_reflexive_witness(cfg, fx):
    with criterion(1, "reflexive witness on every fixture", budget=1.0):
        w = reflexive_witness()
        for label, x in fx.items():
            a = x.limit()
            qs = sample_below(rng_for(cfg.seed, f"acc1:{label}"), a, F(1), 50)
            rep = check_witness(x, x, w, qs)
            assert rep.holds and len(rep.records) == 50
            for q, r in zip(qs, rep.records):
                assert (r.lhs, r.rhs) == (a - q, 2 * (a - q))


def test_02_h1_gadget(cfg, fx):
    with criterion(2, "h1 gadget with d=1, l=4 near 7/12"):
        half, beta = fx["HALF"], fx["H1HALF"]
        w = h1_witness(half)
        assert (w.d, w.ell) == (1, 4)
        b = F(7, 12)
        qs = sample_below(rng_for(cfg.seed, "acc2"), b, F(1, 32), 100)
        rep = check_witness(half, beta, w, qs + [F(9, 16)])
        assert rep.holds
        for q in qs:
            fq = w.f(q)
            assert fq <= F(1, 2)
            assert (F(1, 2) - fq) ** 4 < b - q
        worked = rep.records[-1]
        assert (worked.lhs, worked.rhs, worked.rhs - worked.lhs) == (0, F(1, 48), F(1, 48))


def _dprime_codes(kmax):
    for k in range(1, kmax + 1):
        for s in product("01", repeat=k):
            if s[-1] == "1":
                bits = "".join(c + ("1" if c == "0" else "0") for c in s)
                yield bits, F(int(bits, 2), 1 << len(bits))


def test_03_prefix_agreement(cfg, fx):
    with criterion(3, "prefix agreement brute force, k <= 7, m <= 5", budget=10.0):
        betas = {"H1HALF": F(7, 12), "H1THIRD": F(2, 5), "H1OMEGA": F(31, 48)}
        codes = list(_dprime_codes(7))
        assert len(codes) == 2**7 - 1
        for label, beta in betas.items():
            assert fx[label].limit() == beta
            bb = expansion_bits(beta, 14)
            for m in range(1, 6):
                for bits, q in codes:
                    if q < beta and beta - q <= F(1, 2 ** (2 * m + 1)):
                        assert expansion_bits(q, 2 * m) == bb[: 2 * m], (label, m, bits)
        assert c03_prefix_agreement(cfg, fx)["holds"]


def test_04_sequence_cycle(cfg, fx):
    with criterion(4, "witness to index function to sequence witness, depth 32"):
        cases = {label: (x, x, reflexive_witness()) for label, x in fx.items()}
        cases.update(lipschitz_reductions(fx))
        cases["h1:THIRD<=H1THIRD"] = h1_reductions(fx)["h1:THIRD<=H1THIRD"]
        for name, (alpha, beta, w) in cases.items():
            g = index_function(w, alpha, beta, 32)
            assert len(g) == 32 and all(u < v for u, v in zip(g, g[1:]))
            a, b = alpha.limit(), beta.limit()
            for n in range(32):
                assert (a - alpha.stage(g[n])) ** w.ell <= w.d * (b - beta.stage(n)), (name, n)
            assert sequence_pairs_hold(alpha, beta, g, w.d, w.ell)
            w2 = witness_from_sequences(lambda n: alpha.stage(g[n]), beta.stage, w.d, w.ell, 32)
            lo, hi = beta.stage(0), beta.stage(31)
            qs = [lo + (hi - lo) * F(i, 41) for i in range(1, 41)]
            assert check_witness(alpha, beta, w2, qs).holds, name


def test_05_witness_algebra(cfg, fx):
    with criterion(5, "compose gives (12, 2), join gives (4, 2)"):
        half, quarter = fx["HALF"], fx["QUARTER"]
        w1, w2 = QSWitness(ID, 2, 1), QSWitness(ID, 3, 2, valid_from=F(0))
        wc = compose(w1, w2)
        assert (wc.d, wc.ell) == (12, 2)
        qs = sample_below(rng_for(cfg.seed, "acc5"), F(1, 2), F(1, 2), 50)
        for w in (w1, w2, wc):
            assert check_witness(half, half, w, qs).holds
        j0, j1 = QSWitness(Affine(F(1, 2)), 1, 1), QSWitness(Affine(F(1, 2)), 1, 2)
        wj = join(j0, j1, gamma=F(1, 2))
        assert (wj.d, wj.ell) == (4, 2)
        qs2 = [q for q in sample_below(rng_for(cfg.seed, "acc5j"), F(1, 2), F(1), 50) if wj.in_range(q)]
        assert qs2
        assert check_witness(quarter, half, j0, qs2).holds
        assert check_witness(quarter, half, j1, qs2).holds
        assert check_witness(add(quarter, quarter), half, wj, qs2).holds


def test_06_lipschitz_construction(fx):
    with criterion(6, "Lipschitz polylines on three reductions, 50 steps", budget=5.0):
        for name, (alpha, beta, w) in lipschitz_reductions(fx).items():
            c = build_lipschitz(alpha, beta, w, beta, 50)
            pts = c.breakpoints
            assert len(pts) == 51
            a, b = alpha.limit(), beta.limit()
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                assert x0 < x1 and y0 <= y1
                assert (y1 - y0) < w.d * (x1 - x0), name
            for x, y in pts:
                assert a - y < w.d * (b - x), name
            gaps = [a - y for _, y in pts]
            assert gaps[-1] < F(1, 1 << 40)


def test_07_hoelder_smoothing(cfg):
    with criterion(7, "smoothing worked example and 200-pair modulus certificate"):
        g = smooth_hoelder(worked_polyline(), 1, 2, F(1, 1 << 20))
        t = g.segments[0].t
        assert t.contains(F(25, 16)) and t.width <= F(1, 1 << 20)
        e0, e1 = g.eval(F(0)), g.eval(F(1))
        assert e0.is_point and e0.lo == 0 and e1.is_point and e1.lo == F(1, 2)
        pairs = sample_pairs(rng_for(cfg.seed, "acc7"), F(-1, 4), F(1), 200)
        rep = certify_modulus(g, pairs, hoelder(1, 2))
        counts = rep.counts()
        assert counts == {"holds": 200, "fails": 0, "undecided": 0}


def test_08_roundtrip_extraction(cfg, fx):
    with criterion(8, "extraction from the Lipschitz curve satisfies L = 2"):
        half = fx["HALF"]
        c = build_lipschitz(half, half, reflexive_witness(), half, 20)
        lo, hi = c.xs[0], c.right_end
        qs = sample_below(rng_for(cfg.seed, "acc8"), hi, hi - lo, 20)
        assert len(set(qs)) == 20
        for q in qs:
            ex = extract_witness(c.eval, half, 2, q, beta=half)
            assert abs(F(1, 2) - ex.value) <= 2 * abs(F(1, 2) - q)


def test_09_ml_test():
    with criterion(9, "cover measure bound for k=1, l=2 and first level 9", budget=1.0):
        for m in range(1, 13):
            lv = ml_test_level(ID, m, 1, 2)
            # total^4 <= 2^(4(m+1)) * 2^-(m^2-2)
            assert lv.total_upper**4 <= F(2) ** (4 * (m + 1) - (m * m - 2)), m
        scan = next(m for m in range(1, 100) if 4 * (m + 1) - (m * m - 2) <= -4 * m)
        assert scan == 9 == first_level_below(1, 2)


def test_10_omega_values(cfg):
    with criterion(10, "toy halting probabilities"):
        m = cfg.machines()["toy34"]
        assert omega_T(m, 1) == F(3, 4)
        assert omega_T(m, F(1, 2)) == F(5, 16)
        assert omega_tower(m, 1).limit() == F(31, 48)


@pytest.mark.parametrize("pair", ["h1:HALF<=H1HALF", "h1:THIRD<=H1THIRD", "h1:OMEGA34<=H1OMEGA"])
def test_11_names_from_witness(fx, pair):
    with criterion(11, f"names through the h1 witness ({pair})"):
        alpha, beta, w = h1_reductions(fx)[pair]
        a = alpha.limit()
        for n in range(21):
            z = turing_via_qs(w, name_of(beta), n)
            assert abs(a - F(z, 1 << n)) <= F(1, 1 << n)


def test_12_determinism(cfg, tmp_path, capsys):
    with criterion(12, "byte-identical suite reports"):
        assert dumps(run_suite(cfg)) == dumps(run_suite(cfg))
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["suite", "--out", str(a)]) == 0
        assert main(["suite", "--out", str(b)]) == 0
        capsys.readouterr()
        assert (a / "suite.json").read_bytes() == (b / "suite.json").read_bytes()
        assert json.loads((a / "suite.json").read_text())["holds"] is True

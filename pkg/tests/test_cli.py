import json
from fractions import Fraction as F

import pytest

from qsolovay.cli import main
from qsolovay.io import (
    ConfigError,
    dumps,
    fixture_from_dict,
    load_config,
    load_fixtures,
    load_machines,
    machine_from_dict,
    machine_to_dict,
    parse_q,
    shipped,
    witness_from_dict,
)
from qsolovay.machine import omega_T

IDENT = '{"kind":"identity","d":2}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


# -- io -----------------------------------------------------------------------------


@pytest.mark.parametrize("bad", [0.5, True, "x/2", "1/0", None])
def test_parse_q_rejects(bad):
    with pytest.raises(ConfigError):
        parse_q(bad)


def test_parse_q_accepts():
    assert parse_q("3/6") == F(1, 2)
    assert parse_q(7) == 7
    assert parse_q("-2") == -2


def test_dumps_is_canonical():
    assert dumps({"b": 1, "a": [1, 2]}) == dumps({"a": [1, 2], "b": 1})
    assert dumps({}).endswith("\n")


def test_machine_roundtrip():
    ms = load_machines(shipped("machines.json"))
    m = ms["toy34"]
    assert machine_from_dict(machine_to_dict(m)) == m
    assert omega_T(m, 1) == F(3, 4)


def test_machine_errors():
    with pytest.raises(ConfigError):
        machine_from_dict({"id": "x", "programs": [{"bits": "0", "behavior": "loop"}]})
    with pytest.raises(ConfigError):
        machine_from_dict({"programs": []})


def test_shipped_fixtures_load(fx):
    labels = {"HALF", "THIRD", "H1HALF", "OMEGA34", "H1OMEGA", "QUARTER", "TWOTHIRDS", "FIVESIXTHS", "H1THIRD"}
    assert set(fx) == labels
    assert fx["OMEGA34"].limit() == F(3, 4)
    assert fx["H1THIRD"].limit() == F(2, 5)


def test_fixture_errors():
    ms = load_machines(shipped("machines.json"))
    bad_limit = {"label": "X", "limit": "1/2", "gap": {"kind": "machine", "machine_id": "toy34"}}
    with pytest.raises(ConfigError, match="differs"):
        fixture_from_dict(bad_limit, ms)
    with pytest.raises(ConfigError, match="unknown machine"):
        fixture_from_dict({"label": "X", "gap": {"kind": "machine", "machine_id": "nope"}}, ms)
    with pytest.raises(ConfigError, match="gap kind"):
        fixture_from_dict({"label": "X", "limit": "1/2", "gap": {"kind": "other"}})
    with pytest.raises(ConfigError, match="missing"):
        fixture_from_dict({"limit": "1/2"})
    with pytest.raises(ConfigError):
        fixture_from_dict({"label": "X", "limit": 0.5, "gap": {"kind": "power", "base": 2}})


def test_witness_from_dict(fx):
    w = witness_from_dict({"kind": "affine", "params": {"slope": "1", "intercept": "-1/3"}, "d": 2}, fx)
    assert w.f(F(1, 2)) == F(1, 6) and (w.d, w.ell) == (2, 1)
    h = witness_from_dict({"kind": "h1", "params": {"alpha": "HALF"}}, fx)
    assert (h.d, h.ell) == (1, 4)
    t = witness_from_dict({"kind": "table", "params": {"pairs": [["1/4", "1/8"]]}, "d": 1, "l": 2,
                           "valid_from": "0"}, fx)
    assert t.f(F(1, 4)) == F(1, 8) and t.valid_from == 0
    with pytest.raises(ConfigError):
        witness_from_dict({"kind": "h1", "params": {"alpha": "NOPE"}}, fx)
    with pytest.raises(ConfigError):
        witness_from_dict({"kind": "spline", "d": 1}, fx)
    with pytest.raises(ConfigError):
        witness_from_dict({"kind": "identity", "d": 0}, fx)


def test_config_defaults_and_overrides(tmp_path):
    cfg = load_config()
    assert (cfg.depth, cfg.sample_count, cfg.refine_cap) == (64, 50, 64)
    assert cfg.with_overrides(seed=7).seed == 7
    assert cfg.with_overrides(seed=None).seed == cfg.seed
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"schema": 2}))
    with pytest.raises(ConfigError, match="schema"):
        load_config(p)
    p.write_text(json.dumps({"schema": 1, "depth": -1}))
    with pytest.raises(ConfigError):
        load_config(p)
    p.write_text("{nope")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(p)


def test_config_relative_paths(tmp_path):
    (tmp_path / "m.json").write_text(shipped("machines.json").read_text())
    (tmp_path / "f.json").write_text(json.dumps({"fixtures": [
        {"label": "A", "limit": "1/2", "gap": {"kind": "power", "base": 2, "shift": 1}}]}))
    (tmp_path / "c.json").write_text(json.dumps({"schema": 1, "fixtures": "f.json", "machines": "m.json"}))
    cfg = load_config(tmp_path / "c.json")
    assert set(cfg.fixtures()) == {"A"}
    assert set(load_fixtures(tmp_path / "f.json")) == {"A"}


# -- CLI ------------------------------------------------------------------------------


def test_omega_prints_value(capsys):
    assert run(capsys, "omega", "--machine", "toy34", "--T", "1/2")[:2] == (0, "5/16\n")
    assert run(capsys, "omega", "--machine", "toy34")[:2] == (0, "3/4\n")


def test_omega_rejects_bad_t(capsys):
    code, _, err = run(capsys, "omega", "--machine", "toy34", "--T", "2/3")
    assert code == 2 and "1/T" in err
    assert run(capsys, "omega", "--machine", "nope")[0] == 2


def test_omega_report_written(capsys, tmp_path):
    code, out, _ = run(capsys, "omega", "--machine", "toy34", "--tower", "2", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "omega.json").read_text())
    assert rep["schema"] == 1 and rep["command"] == "omega"


def test_encode(capsys):
    code, rep, _ = run_json(capsys, "encode", "--q", "1/2")
    assert code == 0 and rep["h1"] == "7/12" and rep["dprime"] == {"k": 1, "member": True}
    code, rep, _ = run_json(capsys, "encode", "--sigma", "101")
    assert rep["repetition_value"] == "39/64" and rep["interleave"] == "100110"
    assert run(capsys, "encode", "--q", "3/2")[0] == 2
    # decimal strings are exact rationals
    assert run_json(capsys, "encode", "--q", "0.5")[1]["q"] == "1/2"


def test_witness_check(capsys):
    code, rep, _ = run_json(capsys, "witness-check", "--alpha", "HALF", "--beta", "HALF", "--witness", IDENT,
                            "--count", "10")
    assert code == 0 and rep["holds"] and len(rep["records"]) == 10
    bad = '{"kind":"affine","params":{"slope":"1/2"},"d":1}'
    code, rep, _ = run_json(capsys, "witness-check", "--alpha", "HALF", "--beta", "HALF", "--witness", bad)
    assert code == 1 and not rep["holds"]


def test_witness_from_file(capsys, tmp_path):
    p = tmp_path / "w.json"
    p.write_text(IDENT)
    code, rep, _ = run_json(capsys, "witness-check", "--alpha", "HALF", "--beta", "HALF", "--witness", str(p))
    assert code == 0
    assert run(capsys, "witness-check", "--alpha", "HALF", "--beta", "HALF", "--witness", "missing.json")[0] == 2
    assert run(capsys, "witness-check", "--alpha", "HALF", "--beta", "HALF", "--witness", "{bad")[0] == 2
    assert run(capsys, "witness-check", "--alpha", "NOPE", "--beta", "HALF", "--witness", IDENT)[0] == 2


def test_witness_algebra(capsys):
    code, rep, _ = run_json(capsys, "witness-algebra", "--op", "compose")
    assert code == 0 and rep["result"] == [12, 2]
    code, rep, _ = run_json(capsys, "witness-algebra", "--op", "join", "--d1", "1", "--l1", "1", "--d2", "1",
                            "--l2", "2")
    assert rep["result"] == [4, 2]
    code, rep, _ = run_json(capsys, "witness-algebra")
    assert code == 0 and rep["holds"]


def test_ml_test(capsys):
    code, rep, _ = run_json(capsys, "ml-test", "--m", "9")
    assert code == 0 and rep["first_level_below"] == 9 and rep["levels"][0]["below_2^-m"]
    code, rep, _ = run_json(capsys, "ml-test", "--m", "4", "--all-levels", "--intervals")
    assert [lv["m"] for lv in rep["levels"]] == [1, 2, 3, 4]
    assert all(lv["holds"] for lv in rep["levels"])


def test_build_and_certify(capsys, tmp_path):
    code, rep, _ = run_json(capsys, "build-lipschitz", "--alpha", "HALF", "--beta", "HALF", "--witness", IDENT,
                            "--steps", "3")
    assert code == 0
    assert [p[0] for p in rep["curve"]["breakpoints"]] == ["0/1", "1/4", "3/8", "7/16"]
    code, _, _ = run(capsys, "build-lipschitz", "--alpha", "HALF", "--beta", "HALF", "--witness", IDENT,
                     "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "build-lipschitz.csv").read_text().startswith("x,y_lo,y_hi\n")
    code, rep, _ = run_json(capsys, "certify", "--alpha", "HALF", "--beta", "HALF", "--witness", IDENT,
                            "--count", "20")
    assert code == 0 and rep["holds"]


def test_build_hoelder_points(capsys):
    code, rep, _ = run_json(capsys, "build-hoelder", "--points", "0:0,1:1/2", "--d", "1", "--l", "2", "--smooth")
    assert code == 0
    seg = rep["smooth"]["segments"][0]
    assert seg["kind"] == "power"
    assert F(seg["t"]["lo"]) <= F(25, 16) <= F(seg["t"]["hi"])
    assert run(capsys, "build-hoelder", "--points", "0:0,1:2", "--d", "1", "--l", "2", "--smooth")[0] == 1
    assert run(capsys, "build-hoelder", "--points", "0:0;1", "--d", "1", "--l", "2")[0] == 2


def test_build_hoelder_h1(capsys):
    w = '{"kind":"h1","params":{"alpha":"THIRD"}}'
    code, rep, _ = run_json(capsys, "build-hoelder", "--alpha", "THIRD", "--beta", "H1THIRD", "--witness", w,
                            "--steps", "3", "--smooth")
    assert code == 0 and rep["holds"]


def test_extract(capsys):
    code, rep, _ = run_json(capsys, "extract", "--alpha", "HALF", "--beta", "HALF", "--witness", IDENT,
                            "--q", "3/8", "--L", "2")
    assert code == 0
    ex = rep["extractions"][0]
    assert abs(F(1, 2) - F(ex["g(q)"])) <= 2 * (F(1, 2) - F(3, 8))


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "omega", "--machine", "toy34", "--config", "/nonexistent.json")[0] == 2
    assert run(capsys, "ml-test", "--depth", "-3")[0] == 2


def test_suite_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    code, _, err = run(capsys, "suite", "--out", str(a))
    assert code == 0 and err.count("PASS") == 12
    assert run(capsys, "suite", "--out", str(b))[0] == 0
    assert (a / "suite.json").read_bytes() == (b / "suite.json").read_bytes()
    rep = json.loads((a / "suite.json").read_text())
    assert rep["schema"] == 1 and "time" not in json.dumps(rep)

"""JSON loading for fixtures, machines, witnesses and run configs.

Rationals travel as strings ("3/8", "1/2", "2"); floats are rejected.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .machine import PrefixFreeMachine, Program, omega_real
from .rational import Q, qstr
from .reals import DEFAULT_DEPTH, LeftCEReal, fixture, power_gap
from .reduction import Affine, Compose, QSWitness, Sum, Table, WitnessFunction, h1_witness

SCHEMA = 1


class ConfigError(ValueError):
    """Malformed configuration; the CLI maps this to a usage error."""


def parse_q(s: Any) -> Fraction:
    if isinstance(s, bool) or isinstance(s, float):
        raise ConfigError(f"rational expected as a string or int, got {s!r}")
    try:
        return Q(s)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational: {s!r}") from exc


def dumps(obj: Any) -> str:
    """Canonical JSON used for every report (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def shipped(name: str) -> Path:
    return Path(str(resources.files("qsolovay") / "data" / name))


# -- machines -------------------------------------------------------------------


def machine_from_dict(d: Mapping[str, Any]) -> PrefixFreeMachine:
    try:
        progs = []
        for p in d["programs"]:
            behavior = p["behavior"]
            if behavior not in ("halt", "diverge"):
                raise ConfigError(f"program behavior must be halt or diverge, got {behavior!r}")
            progs.append(Program(p["bits"], behavior == "halt", p.get("output"), int(p.get("steps", 0))))
        return PrefixFreeMachine(d["id"], tuple(progs), int(d.get("step_bound", 1000)))
    except KeyError as exc:
        raise ConfigError(f"machine entry missing {exc}") from exc


def machine_to_dict(m: PrefixFreeMachine) -> dict[str, Any]:
    progs = []
    for p in m.programs:
        entry: dict[str, Any] = {"bits": p.bits, "behavior": "halt" if p.halts else "diverge"}
        if p.halts:
            entry["output"] = p.output
            entry["steps"] = p.steps
        progs.append(entry)
    return {"id": m.id, "step_bound": m.step_bound, "programs": progs}


def load_machines(path: str | Path) -> dict[str, PrefixFreeMachine]:
    data = _read_json(path)
    ms = [machine_from_dict(d) for d in data.get("machines", [])]
    return {m.id: m for m in ms}


# -- fixtures -------------------------------------------------------------------


def fixture_from_dict(
    d: Mapping[str, Any], machines: Mapping[str, PrefixFreeMachine] | None = None,
    check_depth: int = DEFAULT_DEPTH,
) -> LeftCEReal:
    try:
        label = d["label"]
        gap = d["gap"]
        if gap["kind"] == "power":
            lim = parse_q(d["limit"])
            g = power_gap(int(gap["base"]), int(gap.get("shift", 0)), parse_q(gap.get("coeff", "1")))
            return fixture(lim, g, label, check_depth)
        if gap["kind"] == "machine":
            mid = gap["machine_id"]
            if not machines or mid not in machines:
                raise ConfigError(f"fixture {label}: unknown machine {mid!r}")
            x = omega_real(machines[mid])
            x = LeftCEReal(x.stage_fn, x.exact_limit, label)
            if "limit" in d and parse_q(d["limit"]) != x.exact_limit:
                raise ConfigError(f"fixture {label}: declared limit differs from the machine's Omega")
            return x
        raise ConfigError(f"fixture {label}: unknown gap kind {gap['kind']!r}")
    except KeyError as exc:
        raise ConfigError(f"fixture entry missing {exc}") from exc


def load_fixtures(
    path: str | Path, machines: Mapping[str, PrefixFreeMachine] | None = None
) -> dict[str, LeftCEReal]:
    data = _read_json(path)
    fx = [fixture_from_dict(d, machines) for d in data.get("fixtures", [])]
    return {x.label: x for x in fx}


# -- witnesses ------------------------------------------------------------------


def function_from_dict(d: Mapping[str, Any], fixtures: Mapping[str, LeftCEReal]) -> WitnessFunction:
    kind, params = d.get("kind"), d.get("params", {})
    if kind == "identity":
        return Affine(Fraction(1))
    if kind == "affine":
        return Affine(parse_q(params.get("slope", "1")), parse_q(params.get("intercept", "0")))
    if kind == "table":
        return Table({parse_q(k): parse_q(v) for k, v in params["pairs"]})
    if kind == "sum":
        return Sum(tuple(function_from_dict(p, fixtures) for p in params["parts"]))
    if kind == "compose":
        return Compose(function_from_dict(params["outer"], fixtures), function_from_dict(params["inner"], fixtures))
    raise ConfigError(f"unknown witness function kind {kind!r}")


def witness_from_dict(d: Mapping[str, Any], fixtures: Mapping[str, LeftCEReal]) -> QSWitness:
    if d.get("kind") == "h1":
        alpha = d.get("params", {}).get("alpha")
        if alpha not in fixtures:
            raise ConfigError(f"h1 witness needs a known alpha fixture, got {alpha!r}")
        return h1_witness(fixtures[alpha])
    try:
        f = function_from_dict(d, fixtures)
        vf = d.get("valid_from")
        return QSWitness(f, int(d["d"]), int(d.get("l", 1)), None if vf is None else parse_q(vf))
    except KeyError as exc:
        raise ConfigError(f"witness entry missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# -- run config -----------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    fixtures_path: Path
    machines_path: Path
    depth: int = DEFAULT_DEPTH
    sample_count: int = 50
    seed: int = 0
    eps_t: Fraction = Fraction(1, 1 << 24)
    eval_eps: Fraction = Fraction(1, 1 << 20)
    refine_cap: int = 64
    out: Path | None = None
    extra: dict[str, Any] = field(default_factory=dict, compare=False)

    def machines(self) -> dict[str, PrefixFreeMachine]:
        return load_machines(self.machines_path)

    def fixtures(self) -> dict[str, LeftCEReal]:
        return load_fixtures(self.fixtures_path, self.machines())

    def to_dict(self) -> dict[str, Any]:
        return {
            "depth": self.depth,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "eps_t": qstr(self.eps_t),
            "eval_eps": qstr(self.eval_eps),
            "refine_cap": self.refine_cap,
        }

    def with_overrides(self, **kw: Any) -> RunConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _natural(d: Mapping[str, Any], key: str, default: int) -> int:
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"{key} must be a natural number, got {v!r}")
    return v


def load_config(path: str | Path | None = None) -> RunConfig:
    path = Path(path) if path is not None else shipped("default.json")
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported config schema {data.get('schema')!r}")
    base = path.parent

    def resolve(key: str, default: str) -> Path:
        p = Path(data.get(key, default))
        if not p.is_absolute():
            p = base / p
        return p

    out = data.get("out")
    return RunConfig(
        fixtures_path=resolve("fixtures", "fixtures.json"),
        machines_path=resolve("machines", "machines.json"),
        depth=_natural(data, "depth", DEFAULT_DEPTH),
        sample_count=_natural(data, "sample_count", 50),
        seed=_natural(data, "seed", 0),
        eps_t=parse_q(data.get("eps_t", "1/16777216")),
        eval_eps=parse_q(data.get("eval_eps", "1/1048576")),
        refine_cap=_natural(data, "refine_cap", 64),
        out=None if out is None else Path(out),
        extra={k: v for k, v in data.items() if k not in _KNOWN},
    )


_KNOWN = {"schema", "fixtures", "machines", "depth", "sample_count", "seed", "eps_t", "eval_eps", "refine_cap", "out"}

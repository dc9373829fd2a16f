"""Experiment configuration: JSON text with exact angle descriptors.

Schema::

    {
      "function": <function>,
      "theta":    "golden" | "silver" | {"surd": [a, b, c, d]}
                  | {"decimal": "0.6180339887", "precision": 10},
      "params":   {...operation parameters...},
      "seed":     0,
      "out":      "out"
    }

    <function> =
        {"kind": "laurent", "coefficients": [[k, re, im], ...]}
      | {"kind": "factored", "scalar": [re, im], "roots": [<root>, ...]}
      | {"kind": "essential_zero", "p": 1}
      | {"kind": "product", "factors": [<function>, ...]}
      | {"kind": "scaled", "base": <function>, "rotation": <angle>}
      | {"kind": "constant", "value": [re, im]}

    <root>  = {"angle": <angle>, "mult": 1} | {"value": [re, im], "mult": 1}
    <angle> = "p/q" | {"r": "p/q", "m": m}      (r + m*theta turns)

Angles stay exact: ``"1/3"`` is parsed as a fraction, never as a float.
Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .circlefn import (
    Angle,
    CircleFunction,
    EssentialZero,
    FactoredPolynomial,
    LaurentPolynomial,
    Product,
    RationalTurns,
    Scaled,
    from_triples,
    parse_angle,
    shifted,
)
from .diophantine import RotationAngle
from .errors import ConfigError
from .ergodic import EVALUATION_BUDGET

MAX_Q = 1 << 20
MAX_LEVEL = 200
MAX_CONVERGENTS = 80

OPERATIONS = (
    "fkdet",
    "birkhoff",
    "radius",
    "nu",
    "spectrum",
    "brown",
    "model",
    "pseudospec",
    "harper",
    "index",
    "simplicity",
    "algebraA",
)

_MODEL_KEYS = {"p": None, "q": None, "convergent": None, "count": 12}

# operation -> allowed params with defaults
DEFAULTS: dict[str, dict[str, Any]] = {
    "fkdet": {"levels": None, "method": "auto", "trace": False},
    "birkhoff": {"n": 1000, "grid_size": 256, "offset": None, "trace": True},
    "radius": {"schedule": [10, 100, 1000], "grid_size": 256, "offset": None},
    "nu": {"n": 512, "grid_size": 4096, "offset": None},
    "spectrum": {},
    "brown": {},
    "model": {**_MODEL_KEYS, "base": "0/1"},
    "pseudospec": {
        **_MODEL_KEYS,
        "base": "half-cell",
        "re": [-1.2, 1.2],
        "im": [-1.2, 1.2],
        "resolution": [101, 101],
        "epsilon": 0.05,
    },
    "harper": {**_MODEL_KEYS, "coupling": 1.0, "q_max": None},
    "index": {"tol": None, "K": None, "method": "auto"},
    "simplicity": {},
    "algebraA": {},
}

_TOP_KEYS = {"function", "theta", "params", "seed", "out", "operation"}


@dataclass
class ExperimentConfig:
    operation: str
    function: CircleFunction | None
    theta: RotationAngle
    params: dict[str, Any]
    seed: int = 0
    out: Path = Path("out")
    raw: dict = field(default_factory=dict, repr=False)


def _fail(msg: str):
    raise ConfigError(msg)


def _check_keys(obj: dict, allowed, where: str):
    if not isinstance(obj, dict):
        _fail(f"{where}: expected an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        _fail(f"{where}: unknown key(s) {', '.join(extra)}")


def _int(v, name, lo=None, hi=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"{name} must be an integer")
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        _fail(f"{name}={v} outside [{lo}, {hi}]")
    return v


def _real(v, name) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{name} must be a number")
    return float(v)


def _complex(v, name) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if not isinstance(v, list) or len(v) != 2:
        _fail(f"{name} must be [re, im]")
    return complex(_real(v[0], name), _real(v[1], name))


def parse_theta(obj) -> RotationAngle:
    try:
        if obj in ("golden", None):
            return RotationAngle.golden()
        if obj == "silver":
            return RotationAngle.silver()
        if isinstance(obj, dict) and "surd" in obj:
            _check_keys(obj, {"surd"}, "theta")
            parts = obj["surd"]
            if not isinstance(parts, list) or len(parts) != 4:
                _fail("theta.surd must be [a, b, c, d]")
            return RotationAngle.from_surd(*(_int(x, "theta.surd") for x in parts))
        if isinstance(obj, dict) and "decimal" in obj:
            _check_keys(obj, {"decimal", "precision"}, "theta")
            value = obj["decimal"]
            if not isinstance(value, str):
                _fail("theta.decimal must be a string so no digits are lost")
            prec = obj.get("precision")
            prec = None if prec is None else _int(prec, "theta.precision", 1, 10_000)
            return RotationAngle.from_decimal(value, prec)
    except ValueError as exc:
        raise ConfigError(f"theta: {exc}") from exc
    _fail(f"theta: unrecognised descriptor {obj!r}")


def parse_angle_descriptor(obj, theta: RotationAngle, where: str) -> Angle:
    if isinstance(obj, dict):
        _check_keys(obj, {"r", "m"}, where)
        r = parse_angle_descriptor(obj.get("r", "0/1"), theta, where)
        if not isinstance(r, RationalTurns):
            _fail(f"{where}: r must be a rational 'p/q'")
        return shifted(r.fraction, _int(obj.get("m", 0), f"{where}.m"), theta)
    if isinstance(obj, str) or (isinstance(obj, int) and not isinstance(obj, bool)):
        try:
            return parse_angle(obj)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{where}: bad angle {obj!r}") from exc
    _fail(f"{where}: angles are 'p/q' strings or {{'r', 'm'}} objects, got {obj!r}")


def parse_function(obj, theta: RotationAngle, where: str = "function") -> CircleFunction:
    if not isinstance(obj, dict) or "kind" not in obj:
        _fail(f"{where}: expected an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "laurent":
            _check_keys(obj, {"kind", "coefficients"}, where)
            triples = obj.get("coefficients")
            if not isinstance(triples, list) or not triples:
                _fail(f"{where}.coefficients must be a nonempty list of [k, re, im]")
            for t in triples:
                if not isinstance(t, list) or len(t) != 3:
                    _fail(f"{where}.coefficients entries are [k, re, im]")
                _int(t[0], f"{where}.coefficients k")
                _real(t[1], f"{where}.coefficients re")
                _real(t[2], f"{where}.coefficients im")
            return LaurentPolynomial(tuple(from_triples(triples).items()))
        if kind == "constant":
            _check_keys(obj, {"kind", "value"}, where)
            return LaurentPolynomial(((0, _complex(obj.get("value"), f"{where}.value")),))
        if kind == "factored":
            _check_keys(obj, {"kind", "scalar", "roots"}, where)
            scalar = _complex(obj.get("scalar", [1, 0]), f"{where}.scalar")
            roots = []
            for i, r in enumerate(obj.get("roots", [])):
                rw = f"{where}.roots[{i}]"
                _check_keys(r, {"angle", "value", "mult"}, rw)
                mult = _int(r.get("mult", 1), f"{rw}.mult", 1)
                if ("angle" in r) == ("value" in r):
                    _fail(f"{rw}: give exactly one of 'angle' or 'value'")
                if "angle" in r:
                    roots.append((parse_angle_descriptor(r["angle"], theta, rw), mult))
                else:
                    roots.append((_complex(r["value"], f"{rw}.value"), mult))
            return FactoredPolynomial(scalar, tuple(roots))
        if kind == "essential_zero":
            _check_keys(obj, {"kind", "p"}, where)
            p = _real(obj.get("p", 1), f"{where}.p")
            if p < 1:
                _fail(f"{where}.p must be >= 1")
            return EssentialZero(p)
        if kind == "product":
            _check_keys(obj, {"kind", "factors"}, where)
            factors = obj.get("factors")
            if not isinstance(factors, list) or not factors:
                _fail(f"{where}.factors must be a nonempty list")
            return Product(
                tuple(parse_function(g, theta, f"{where}.factors[{i}]") for i, g in enumerate(factors))
            )
        if kind == "scaled":
            _check_keys(obj, {"kind", "base", "rotation"}, where)
            base = parse_function(obj.get("base"), theta, f"{where}.base")
            rot = parse_angle_descriptor(obj.get("rotation", "0/1"), theta, f"{where}.rotation")
            return Scaled(base, rot)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    _fail(f"{where}: unknown kind {kind!r}")


def _validate_params(op: str, given: dict) -> dict:
    allowed = DEFAULTS[op]
    _check_keys(given, allowed, f"params ({op})")
    p = {**allowed, **given}
    for key in ("p", "convergent", "q_max", "K"):
        if p.get(key) is not None:
            p[key] = _int(p[key], key, 0 if key == "p" else 1)
    if p.get("q") is not None:
        p["q"] = _int(p["q"], "q", 1, MAX_Q)
    if "count" in p:
        p["count"] = _int(p["count"], "count", 1, MAX_CONVERGENTS)
    if op in ("birkhoff", "nu"):
        p["n"] = _int(p["n"], "n", 1)
        p["grid_size"] = _int(p["grid_size"], "grid_size", 1)
        if p["n"] * p["grid_size"] > EVALUATION_BUDGET:
            _fail(f"n*grid_size exceeds the budget of {EVALUATION_BUDGET} evaluations")
    if op == "radius":
        sched = p["schedule"]
        if not isinstance(sched, list) or not sched:
            _fail("schedule must be a nonempty list of integers")
        sched = [_int(n, "schedule entry", 1) for n in sched]
        if any(b <= a for a, b in zip(sched, sched[1:])):
            _fail("schedule must be increasing")
        p["grid_size"] = _int(p["grid_size"], "grid_size", 1)
        if sum(sched) * p["grid_size"] > EVALUATION_BUDGET:
            _fail(f"schedule*grid_size exceeds the budget of {EVALUATION_BUDGET} evaluations")
        p["schedule"] = sched
    if "offset" in p and p["offset"] is not None:
        p["offset"] = _real(p["offset"], "offset")
    if op == "fkdet":
        if p["levels"] is not None:
            lv = p["levels"]
            if not isinstance(lv, list) or not lv:
                _fail("levels must be a nonempty list of integers")
            p["levels"] = [_int(x, "level", 1, MAX_LEVEL) for x in lv]
        if p["method"] not in ("auto", "quadrature"):
            _fail("method must be 'auto' or 'quadrature'")
        if not isinstance(p["trace"], bool):
            _fail("trace must be true or false")
    if op == "birkhoff" and not isinstance(p["trace"], bool):
        _fail("trace must be true or false")
    if op == "pseudospec":
        for key in ("re", "im"):
            r = p[key]
            if not isinstance(r, list) or len(r) != 2:
                _fail(f"{key} must be [lo, hi]")
            p[key] = (_real(r[0], key), _real(r[1], key))
        res = p["resolution"]
        if not isinstance(res, list) or len(res) != 2:
            _fail("resolution must be [nx, ny]")
        p["resolution"] = (_int(res[0], "resolution", 1, 512), _int(res[1], "resolution", 1, 512))
        p["epsilon"] = _real(p["epsilon"], "epsilon")
    if op == "harper":
        p["coupling"] = _real(p["coupling"], "coupling")
        if p["coupling"] < 0:
            _fail("coupling must be nonnegative")
        if p["q_max"] is not None and p["q_max"] > 4096:
            _fail("q_max is capped at 4096")
    if op == "index":
        if p["tol"] is not None:
            p["tol"] = _real(p["tol"], "tol")
        if p["method"] not in ("auto", "symbolic", "sampled"):
            _fail("method must be 'auto', 'symbolic' or 'sampled'")
    if op in ("model", "pseudospec") and p["base"] != "half-cell":
        if not isinstance(p["base"], str):
            _fail("base must be 'p/q' or 'half-cell'")
    return p


def build_config(raw: dict, operation: str, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    if operation not in OPERATIONS:
        _fail(f"unknown operation {operation!r}")
    _check_keys(raw, _TOP_KEYS, "config")
    if raw.get("operation", operation) != operation:
        _fail(f"config is for {raw['operation']!r}, not {operation!r}")
    theta = parse_theta(raw.get("theta"))
    needs_function = operation != "harper"
    if needs_function and "function" not in raw:
        _fail(f"{operation} needs a 'function'")
    fn = parse_function(raw["function"], theta) if "function" in raw else None
    params = _validate_params(operation, raw.get("params", {}) or {})
    cfg_seed = _int(raw.get("seed", 0), "seed", 0)
    return ExperimentConfig(
        operation,
        fn,
        theta,
        params,
        cfg_seed if seed is None else seed,
        Path(out if out is not None else raw.get("out", "out")),
        raw,
    )


def load_config(path, operation: str, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return build_config(raw, operation, seed, out)


def base_angle(text: str, q: int) -> Angle:
    if text == "half-cell":
        return RationalTurns(1, 2 * q)
    try:
        a = parse_angle(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad base angle {text!r}") from exc
    if not isinstance(a, RationalTurns):
        raise ConfigError("base angle must be rational 'p/q' or 'half-cell'")
    return a

"""Config loading and plot-ready output writers (CSV, JSONL, JSON)."""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .flux_core import DEFAULT_TOL, EXACT_TOL, Tolerances, build_field, build_pl_flux
from .piecewise import PiecewiseConstantFunction

_NUM = {"anyOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_TABLE = {
    "type": "object",
    "required": ["breaks", "values"],
    "properties": {"breaks": {"type": "array", "items": _NUM, "minItems": 1},
                   "values": {"type": "array", "items": _NUM, "minItems": 1}},
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["fluxes", "data", "tmax"],
    "properties": {
        "domain": {"type": "object", "required": ["xmin", "xmax"],
                   "properties": {"xmin": {"type": "number"}, "xmax": {"type": "number"}}},
        "interfaces": {"type": "array", "items": _NUM},
        "fluxes": {"type": "array", "items": _TABLE, "minItems": 1},
        "data": {"type": "object", "required": ["values"],
                 "properties": {"breaks": {"type": "array", "items": _NUM},
                                "values": {"type": "array", "items": _NUM, "minItems": 1}}},
        "tmax": {"type": "number", "exclusiveMinimum": 0},
        "tolerances": {"type": "object",
                       "properties": {k: {"type": "number", "minimum": 0}
                                      for k in ("eps_u", "eps_t", "eps_x", "slope_rel")}},
        "snapshots": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "exact": {"type": "boolean"},
        "complete": {"type": "boolean"},
    },
}


class Scenario:
    """Validated scenario: field, data, times and tolerances."""

    def __init__(self, field_, data, tmax, snapshots, domain, complete):
        self.field = field_
        self.data = data
        self.tmax = tmax
        self.snapshots = snapshots
        self.domain = domain
        self.complete = complete


def _num(x, exact: bool):
    if isinstance(x, str):
        return Fraction(x) if exact else float(Fraction(x))
    if exact:
        return Fraction(str(x)) if isinstance(x, float) else Fraction(x)
    return float(x)


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def parse_json_arg(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON argument: {exc}") from None


def validate(obj: dict, schema: dict = SCENARIO_SCHEMA, where: str = "scenario"):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: schema error at {path}: {exc.message}") from None


def flux_from_obj(obj: dict, tol: Tolerances = DEFAULT_TOL, exact: bool = False):
    validate(obj, _TABLE, "flux")
    return build_pl_flux([_num(x, exact) for x in obj["breaks"]],
                         [_num(x, exact) for x in obj["values"]], tol)


def scenario_from_obj(obj: dict) -> Scenario:
    validate(obj)
    exact = bool(obj.get("exact", False))
    if exact:
        tol = EXACT_TOL
    else:
        t = obj.get("tolerances", {})
        tol = Tolerances(t.get("eps_u", DEFAULT_TOL.eps_u), t.get("eps_t", DEFAULT_TOL.eps_t),
                         t.get("eps_x", t.get("eps_t", DEFAULT_TOL.eps_x)),
                         t.get("slope_rel", DEFAULT_TOL.slope_rel))
    fluxes = [flux_from_obj(f, tol, exact) for f in obj["fluxes"]]
    interfaces = [_num(x, exact) for x in obj.get("interfaces", [])]
    if len(fluxes) != len(interfaces) + 1:
        raise ConfigError(f"{len(fluxes)} fluxes for {len(interfaces)} interfaces; "
                          "need one more flux than interfaces")
    fld = build_field(interfaces, fluxes, tol)
    d = obj["data"]
    breaks = [_num(x, exact) for x in d.get("breaks", [])]
    values = [_num(x, exact) for x in d["values"]]
    if len(values) != len(breaks) + 1:
        raise ConfigError("data needs exactly one more value than breaks")
    data = PiecewiseConstantFunction(tuple(breaks), tuple(values))
    tmax = _num(obj["tmax"], exact)
    snaps = sorted({_num(t, exact) for t in obj.get("snapshots", [])} | {tmax})
    if snaps and snaps[-1] > tmax:
        raise ConfigError("snapshot time beyond tmax")
    dom = obj.get("domain")
    domain = (dom["xmin"], dom["xmax"]) if dom else None
    return Scenario(fld, data, tmax, snaps, domain, obj.get("complete", True))


def load_scenario(path) -> Scenario:
    return scenario_from_obj(read_json(path))


# -- writers -------------------------------------------------------------


def _fmt(x):
    if isinstance(x, (float, Fraction)):
        return repr(float(x))
    return x


def write_csv(path, header, rows):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])


def write_jsonl(path, records):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)

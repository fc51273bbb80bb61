"""Scenario, μODD configuration, table and evidence-log files.

Files are YAML (evidence logs are JSON lines). Scalars keep their source
position so that unit and schema errors can be reported as ``path:line:col``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import InvalidParameterError, RssError, UnitError
from .kinematics import ScenarioParams
from .odd.belief import BeliefState, TransitionRule
from .odd.machine import Condition, LookaheadRule, OddConfig
from .odd.partition import ALL_DIMS, DEFAULT_GRID, Interval, MuOdd
from .physics import STRAIGHT, RoadEnvironment, environment_to_scenario
from .units import parse_quantity


class ParseError(RssError):
    def __init__(self, message: str, path=None, line: Optional[int] = None, column: Optional[int] = None):
        self.path, self.line, self.column = path, line, column
        where = str(path) if path is not None else "<input>"
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {message}")


class _Marked:
    mark = None


class MStr(str, _Marked):
    pass


class MFloat(float, _Marked):
    pass


class MInt(int, _Marked):
    pass


class MDict(dict, _Marked):
    pass


class MList(list, _Marked):
    pass


class _MarkedLoader(yaml.SafeLoader):
    pass


def _with_mark(cls, base_ctor):
    def construct(loader, node):
        value = base_ctor(loader, node)
        out = cls(value)
        out.mark = node.start_mark
        return out

    return construct


def _construct_mapping(loader, node):
    out = MDict()
    out.mark = node.start_mark
    loader.flatten_mapping(node)
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        out[key] = loader.construct_object(value_node, deep=True)
    return out


def _construct_sequence(loader, node):
    out = MList(loader.construct_object(child, deep=True) for child in node.value)
    out.mark = node.start_mark
    return out


_MarkedLoader.add_constructor("tag:yaml.org,2002:str", _with_mark(MStr, yaml.SafeLoader.construct_yaml_str))
_MarkedLoader.add_constructor("tag:yaml.org,2002:float", _with_mark(MFloat, yaml.SafeLoader.construct_yaml_float))
_MarkedLoader.add_constructor("tag:yaml.org,2002:int", _with_mark(MInt, yaml.SafeLoader.construct_yaml_int))
_MarkedLoader.add_constructor("tag:yaml.org,2002:map", _construct_mapping)
_MarkedLoader.add_constructor("tag:yaml.org,2002:seq", _construct_sequence)


class _Source:
    """Error reporting context for one file."""

    def __init__(self, path):
        self.path = path

    def error(self, message: str, node=None, parent=None) -> ParseError:
        mark = getattr(node, "mark", None) or getattr(parent, "mark", None)
        if mark is None:
            return ParseError(message, self.path)
        return ParseError(message, self.path, mark.line + 1, mark.column + 1)

    def quantity(self, value, kind, *, parent=None, allow_unbounded=False) -> float:
        try:
            return parse_quantity(value, kind, allow_unbounded=allow_unbounded)
        except UnitError as exc:
            raise self.error(str(exc), value, parent) from None

    def require(self, mapping, key, parent=None):
        if not isinstance(mapping, dict):
            raise self.error("expected a mapping", mapping, parent)
        if key not in mapping:
            raise self.error(f"missing required key {key!r}", mapping, parent)
        return mapping[key]


def load_yaml(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from None
    try:
        return yaml.load(text, Loader=_MarkedLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(str(exc.problem), path, mark.line + 1, mark.column + 1) from None


# --- scenarios -------------------------------------------------------------

_SCENARIO_KINDS = {
    "v_r": "speed",
    "v_f": "speed",
    "rho": "time",
    "a_max_accel": "accel",
    "a_min_brake": "accel",
    "a_max_brake": "accel",
}


@dataclass
class ScenarioFile:
    params: ScenarioParams
    initial_gap: Optional[float] = None
    dt: Optional[float] = None


def _environment(src: _Source, node, default_speed: float) -> RoadEnvironment:
    if not isinstance(node, dict):
        raise src.error("environment must be a mapping", node)
    unknown = set(node) - {"mu", "slope", "curve_radius", "speed_for_curve"}
    if unknown:
        raise src.error(f"unknown environment keys {sorted(unknown)}", node)
    mu = src.quantity(src.require(node, "mu"), "dimensionless", parent=node)
    slope = src.quantity(node["slope"], "angle", parent=node) if "slope" in node else 0.0
    radius = node.get("curve_radius", "straight")
    if isinstance(radius, str) and radius.strip().lower() == "straight":
        radius = STRAIGHT
    else:
        radius = src.quantity(radius, "distance", parent=node)
    speed = src.quantity(node["speed_for_curve"], "speed", parent=node) if "speed_for_curve" in node else default_speed
    try:
        return RoadEnvironment(mu, slope, radius, speed)
    except InvalidParameterError as exc:
        raise src.error(str(exc), node) from None


def parse_scenario(data, path=None) -> ScenarioFile:
    """Build scenario parameters; braking may come from an ``environment`` block.

    Raises :class:`~rss_muodd.errors.NoSafeDistanceError` when the environment
    leaves the rear vehicle unable to brake.
    """
    src = _Source(path)
    if not isinstance(data, dict):
        raise src.error("scenario file must be a mapping", data)
    known = set(_SCENARIO_KINDS) | {"environment", "initial_gap", "dt"}
    unknown = set(data) - known
    if unknown:
        raise src.error(f"unknown scenario keys {sorted(unknown)}", data)
    values = {}
    for key, kind in _SCENARIO_KINDS.items():
        if key in data:
            values[key] = src.quantity(data[key], kind, parent=data, allow_unbounded=(key == "a_max_brake"))
    env = data.get("environment")
    if env is not None:
        if "a_min_brake" in values:
            raise src.error("give either a_min_brake or an environment block, not both", data["a_min_brake"])
        speed_r = values.get("v_r", 0.0)
        rear = _environment(src, src.require(env, "rear", data), speed_r)
        front = _environment(src, env.get("front", env["rear"]), values.get("v_f", 0.0))
        cap = values.get("a_max_brake", math.inf)
        values["a_min_brake"], values["a_max_brake"] = environment_to_scenario(rear, front, cap)
    for key in _SCENARIO_KINDS:
        if key not in values:
            raise src.error(f"missing required key {key!r}", data)
    try:
        params = ScenarioParams(**values)
    except InvalidParameterError as exc:
        raise src.error(str(exc), data) from None
    gap = src.quantity(data["initial_gap"], "distance", parent=data) if "initial_gap" in data else None
    dt = src.quantity(data["dt"], "time", parent=data) if "dt" in data else None
    return ScenarioFile(params, gap, dt)


def load_scenario(path) -> ScenarioFile:
    return parse_scenario(load_yaml(path), path)


# --- μODD configuration ----------------------------------------------------

_DIM_KINDS = dict(_SCENARIO_KINDS, mu="dimensionless", slope="angle", curve_radius="distance")


def _bound(src: _Source, name: str, node) -> Interval:
    kind = _DIM_KINDS[name]

    def one(v):
        if name == "curve_radius" and isinstance(v, str) and v.strip().lower() == "straight":
            return STRAIGHT
        return src.quantity(v, kind, parent=node, allow_unbounded=name in ("a_min_brake", "a_max_brake"))

    if isinstance(node, list):
        if len(node) != 2:
            raise src.error(f"bound for {name} must be [lo, hi] or a single value", node)
        lo, hi = one(node[0]), one(node[1])
    else:
        lo = hi = one(node)
    if name == "curve_radius" and math.isinf(lo):
        lo = hi = STRAIGHT
    try:
        if math.isinf(lo):
            raise ValueError(f"lower bound of {name} may not be unbounded")
        return Interval(lo, hi)
    except (RssError, ValueError) as exc:
        raise src.error(str(exc), node) from None


def parse_bounds(src: _Source, node) -> dict:
    if not isinstance(node, dict):
        raise src.error("bounds must be a mapping", node)
    out = {}
    for name, value in node.items():
        if name not in ALL_DIMS:
            raise src.error(f"unknown bound dimension {name!r}", name, node)
        out[str(name)] = _bound(src, name, value)
    return out


def parse_odd_config(data, path=None, grid: int = DEFAULT_GRID) -> OddConfig:
    src = _Source(path)
    if not isinstance(data, dict):
        raise src.error("configuration must be a mapping", data)
    odds = {}
    for node in src.require(data, "mu_odds") or []:
        odd_id = str(src.require(node, "id"))
        if odd_id in odds:
            raise src.error(f"duplicate μODD id {odd_id!r}", node["id"])
        posture = str(node.get("posture", "normal"))
        bounds = parse_bounds(src, node.get("bounds", {})) if node.get("bounds") is not None else {}
        try:
            odds[odd_id] = MuOdd.build(odd_id, bounds, posture, node.get("behavior"), grid)
        except RssError as exc:
            raise src.error(str(exc), node) from None
    hypotheses = [str(h) for h in src.require(data, "hypotheses")]
    prior_node = src.require(data, "prior")
    try:
        prior = BeliefState({str(h): float(w) for h, w in prior_node.items()})
        rules = [
            TransitionRule(
                str(src.require(r, "evidence_key")),
                {str(h): dict(t) for h, t in src.require(r, "likelihoods").items()},
                {str(h): str(o) for h, o in (r.get("target_map") or {}).items()},
            )
            for r in data.get("rules") or []
        ]
        lookahead = [
            LookaheadRule(
                str(src.require(la, "target")),
                tuple(
                    Condition(str(src.require(c, "key")), str(c.get("op", "eq")), src.require(c, "value"))
                    for c in src.require(la, "when")
                ),
            )
            for la in data.get("lookahead_rules") or []
        ]
        return OddConfig(
            odds,
            hypotheses,
            prior,
            rules,
            str(data["defensive_id"]) if data.get("defensive_id") is not None else "",
            lookahead,
        )
    except (RssError, ValueError, TypeError, AttributeError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise src.error(str(exc), data) from None


def load_odd_config(path, grid: int = DEFAULT_GRID) -> OddConfig:
    return parse_odd_config(load_yaml(path), path, grid)


# --- partition tables ------------------------------------------------------


@dataclass
class TableSpec:
    row_param: str
    col_param: str
    row_bins: list
    col_bins: list
    fixed: dict


def parse_table_config(data, path=None) -> TableSpec:
    src = _Source(path)
    node = data.get("table", data) if isinstance(data, dict) else data
    if not isinstance(node, dict):
        raise src.error("table configuration must be a mapping", data)
    row_param = str(node.get("row_param", "a_max_brake"))
    col_param = str(node.get("col_param", "a_min_brake"))
    for p in (row_param, col_param):
        if p not in _SCENARIO_KINDS:
            raise src.error(f"cannot bin over {p!r}", node)
    rows = [_bound(src, row_param, b) for b in src.require(node, "row_bins")]
    cols = [_bound(src, col_param, b) for b in src.require(node, "col_bins")]
    fixed = parse_bounds(src, src.require(node, "fixed"))
    return TableSpec(row_param, col_param, rows, cols, fixed)


def load_table_config(path) -> TableSpec:
    return parse_table_config(load_yaml(path), path)


# --- evidence logs ---------------------------------------------------------


def load_evidence_log(path) -> list[dict]:
    """JSON-lines records ``{"t": ..., "key": ..., "value": ...}``.

    ``t`` is seconds, either a plain number or a unit string. Blank lines and
    lines starting with ``#`` are skipped.
    """
    records = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from None
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, path, lineno, exc.colno) from None
        if not isinstance(rec, dict) or not {"t", "key", "value"} <= rec.keys():
            raise ParseError("record needs keys t, key, value", path, lineno, 1)
        t = rec["t"]
        if isinstance(t, str):
            try:
                t = parse_quantity(t, "time")
            except UnitError as exc:
                raise ParseError(str(exc), path, lineno, 1) from None
        elif isinstance(t, bool) or not isinstance(t, (int, float)):
            raise ParseError("t must be seconds (a number or a string like '2 s')", path, lineno, 1)
        records.append({"t": float(t), "key": str(rec["key"]), "value": rec["value"]})
    return records

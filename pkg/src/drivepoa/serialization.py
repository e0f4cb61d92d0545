"""Scenario JSON (schema 1), report JSON and CSV output."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import jsonschema

from .bounds import BoundResult
from .costs import LevelCosts, LoadPolynomial, PersonalCostSpec, as_fraction
from .game import INFINITE, UNDEFINED, EquilibriumReport
from .grid import GridSpec, ResourceId
from .scenarios import KINDS, AgentSpec, CurveTable, CustomStrategy, ScenarioSpec

SCHEMA_VERSION = 1

_number = {"oneOf": [{"type": "number", "minimum": 0}, {"type": "string", "pattern": r"^\s*[0-9./eE+-]+\s*$"}]}
_cell = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "driving game scenario",
    "type": "object",
    "required": ["schema", "kind", "levels"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "name": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["cell_size", "x_extent", "y_extent", "horizon_T", "radii"],
            "additionalProperties": False,
            "properties": {
                "cell_size": {"type": "number", "exclusiveMinimum": 0},
                "x_extent": {"type": "integer", "minimum": 1},
                "y_extent": {"type": "integer", "minimum": 1},
                "horizon_T": {"type": "integer", "minimum": 1},
                "radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
            },
        },
        "levels": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _number}},
        "agents": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["start"],
                "additionalProperties": False,
                "properties": {
                    "start": _cell,
                    "goal": {"oneOf": [_cell, {"type": "null"}]},
                    "max_speed": {"type": "integer", "minimum": 0, "maximum": 2},
                    "start_speed": {"type": "integer", "minimum": 0, "maximum": 2},
                    "heading": _cell,
                    "lane_change": {"type": "boolean"},
                },
            },
        },
        "personal": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {k: _number for k in ("time_weight", "accel_weight", "goal_miss_penalty")},
            },
        },
        "road": {"oneOf": [{"type": "array", "items": _cell}, {"type": "null"}]},
        "players": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["strategies"],
                "additionalProperties": False,
                "properties": {
                    "strategies": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["resources"],
                            "additionalProperties": False,
                            "properties": {
                                "name": {"type": "string"},
                                "personal": _number,
                                "resources": {
                                    "type": "array",
                                    "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 4, "maxItems": 4},
                                },
                            },
                        },
                    }
                },
            },
        },
    },
}


class ScenarioError(ValueError):
    """Invalid scenario file; the message names the line or field at fault."""


def _frac_out(v: Fraction) -> str:
    return str(v)


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    out: dict = {"schema": SCHEMA_VERSION, "kind": spec.kind}
    if spec.name:
        out["name"] = spec.name
    if spec.grid is not None:
        g = spec.grid
        out["grid"] = {
            "cell_size": g.cell_size,
            "x_extent": g.x_extent,
            "y_extent": g.y_extent,
            "horizon_T": g.horizon_T,
            "radii": list(g.radii),
        }
    out["levels"] = [[_frac_out(c) for c in p.coefficients] for p in spec.levels.polys]
    if spec.kind == "custom":
        out["players"] = [
            {
                "strategies": [
                    {
                        "name": cs.name,
                        "personal": _frac_out(cs.personal),
                        "resources": [list(r) for r in cs.resources],
                    }
                    for cs in strategies
                ]
            }
            for strategies in spec.custom_players
        ]
        return out
    out["agents"] = [
        {
            "start": list(a.start),
            "goal": list(a.goal) if a.goal is not None else None,
            "max_speed": a.max_speed,
            "start_speed": a.start_speed,
            "heading": list(a.heading),
            "lane_change": a.lane_change,
        }
        for a in spec.agents
    ]
    out["personal"] = [
        {
            "time_weight": _frac_out(p.time_weight),
            "accel_weight": _frac_out(p.accel_weight),
            "goal_miss_penalty": _frac_out(p.goal_miss_penalty),
        }
        for p in spec.personal
    ]
    out["road"] = sorted([list(c) for c in spec.road]) if spec.road is not None else None
    return out


def scenario_from_dict(data: dict) -> ScenarioSpec:
    try:
        jsonschema.validate(data, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"field {where}: {exc.message}") from None
    try:
        levels = LevelCosts(tuple(LoadPolynomial(tuple(c)) for c in data["levels"]))
        grid = GridSpec(**{**data["grid"], "radii": tuple(data["grid"]["radii"])}) if "grid" in data else None
        if data["kind"] == "custom":
            players = tuple(
                tuple(
                    CustomStrategy(
                        tuple(ResourceId(*r) for r in s["resources"]),
                        as_fraction(s.get("personal", 0)),
                        s.get("name", ""),
                    )
                    for s in p["strategies"]
                )
                for p in data.get("players", [])
            )
            return ScenarioSpec("custom", levels, grid, custom_players=players, name=data.get("name", ""))
        agents = tuple(
            AgentSpec(
                tuple(a["start"]),
                tuple(a["goal"]) if a.get("goal") is not None else None,
                a.get("max_speed", 2),
                a.get("start_speed", 0),
                tuple(a.get("heading", (1, 0))),
                a.get("lane_change", False),
            )
            for a in data.get("agents", [])
        )
        personal = tuple(PersonalCostSpec(**p) for p in data.get("personal", []))
        road = data.get("road")
        return ScenarioSpec(
            data["kind"],
            levels,
            grid,
            agents,
            personal,
            frozenset(tuple(c) for c in road) if road is not None else None,
            name=data.get("name", ""),
        )
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ScenarioError(str(exc)) from None


def loads_scenario(text: str) -> ScenarioSpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def load_scenario(path: str | Path) -> ScenarioSpec:
    return loads_scenario(Path(path).read_text())


def dumps_scenario(spec: ScenarioSpec) -> str:
    return json.dumps(scenario_to_dict(spec), indent=2) + "\n"


def _exact_out(v) -> str:
    return v if isinstance(v, str) else str(v)


def _exact_in(v: str):
    return v if v in (INFINITE, UNDEFINED) else Fraction(v)


def report_to_dict(report: EquilibriumReport, bound=None, within_bound: bool | None = None) -> dict:
    out = {
        "schema": SCHEMA_VERSION,
        "mode": "sampled" if report.sampled else "exact",
        "poa_label": report.poa_label,
        "n_profiles": report.n_profiles,
        "degree": report.degree,
        "nash_count": len(report.nash_profiles),
        "nash_profiles": [list(p) for p in report.nash_profiles],
        "optima": [list(p) for p in report.optima],
        "worst_ne_cost": _exact_out(report.worst_ne_cost),
        "best_cost": _exact_out(report.best_cost),
        "poa": _exact_out(report.poa),
        "poa_value": None if report.poa == UNDEFINED else float(report.poa),
        "alpha_star": _exact_out(report.alpha_star),
        "alpha_star_value": None if report.alpha_star == INFINITE else float(report.alpha_star),
    }
    if bound is not None:
        out["bound"] = _exact_out(bound)
        out["bound_value"] = float(bound)
        out["within_bound"] = within_bound
    return out


def report_from_dict(data: dict) -> EquilibriumReport:
    return EquilibriumReport(
        nash_profiles=tuple(tuple(p) for p in data["nash_profiles"]),
        optima=tuple(tuple(p) for p in data["optima"]),
        worst_ne_cost=Fraction(data["worst_ne_cost"]),
        best_cost=Fraction(data["best_cost"]),
        poa=_exact_in(data["poa"]),
        alpha_star=_exact_in(data["alpha_star"]),
        degree=data["degree"],
        sampled=data["mode"] == "sampled",
        n_profiles=data["n_profiles"],
    )


def fmt(value) -> str:
    """12 significant digits, '.' decimal separator, no locale."""
    return format(float(value), ".12g")


CURVE_COLUMNS = ("curve", "abscissa", "raw", "normalized")
BOUND_COLUMNS = ("d", "alpha_star", "root", "k", "lambda_tilde", "mu_tilde", "bound")


def table_csv(header, rows) -> str:
    """Header plus rows, '\\n' line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def curves_csv(tables: Iterable[CurveTable]) -> str:
    return table_csv(
        CURVE_COLUMNS,
        ([t.name, fmt(r.abscissa), fmt(r.raw), fmt(r.normalized)] for t in tables for r in t.rows),
    )


def bounds_csv(results: Iterable[BoundResult]) -> str:
    return table_csv(
        BOUND_COLUMNS,
        (
            [r.d, fmt(r.alpha_star), fmt(r.root), r.k, fmt(r.lambda_tilde), fmt(r.mu_tilde), fmt(r.bound)]
            for r in results
        ),
    )


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))

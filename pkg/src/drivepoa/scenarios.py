"""Cost curves for the two-car and multi-car examples, and lattice driving games."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .costs import (
    AnalyticProximitySpec,
    LevelCosts,
    PersonalCostSpec,
    as_fraction,
    congestion_cost,
    personal_cost,
)
from .game import GameInstance, Player, Strategy
from .grid import Footprint, GridSpec, ResourceId, Trajectory, load_map, occupancy

EXAMPLE1_CELL = 0.5
EXAMPLE1_RADII = (1.5, 3.5, 6.0)
EXAMPLE1_WEIGHTS = ((1, 1, 1), ("0.9", "0.4", "0.2"), (1, "0.1", "0.02"))
EXAMPLE1_DEGREE = 2
EXAMPLE2_WEIGHTS = ("0.9", "0.4", "0.2")
EXAMPLE2_DEGREES = (1, 2, 3)
EXAMPLE2_OFFSETS = ((3.0, 0.0), (-3.0, 0.0), (0.0, 3.0), (0.0, -3.0))
ANALYTIC_OVERLAYS = {
    "prox1": AnalyticProximitySpec("threshold-power", 2, 12.5),
    "prox2": AnalyticProximitySpec("threshold-power", 3, 12.5),
    "prox3": AnalyticProximitySpec("threshold-power", 4, 12.5),
    "prox4": AnalyticProximitySpec("inverse-power", 1),
}

TRAJECTORY_CAP = 10**4
KINDS = ("two-car", "multi-car", "intersection", "merging", "custom")


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveRow:
    abscissa: float
    raw: Fraction | float
    normalized: Fraction | float


@dataclass(frozen=True)
class CurveTable:
    name: str
    abscissa_label: str
    rows: tuple[CurveRow, ...]

    def __post_init__(self):
        xs = [r.abscissa for r in self.rows]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("curve abscissa must be strictly increasing")

    @property
    def normalized(self) -> list:
        return [r.normalized for r in self.rows]

    @property
    def raw(self) -> list:
        return [r.raw for r in self.rows]


def _margin_cells(grid: GridSpec) -> int:
    return math.ceil(max(grid.radii) / grid.cell_size) + 1


def curve_grid(x_span: float, y_span: float, radii=EXAMPLE1_RADII, cell_size=EXAMPLE1_CELL) -> GridSpec:
    """Single-time-step grid wide enough that no ball is clipped.

    The reference car sits at cell ``(m, m)``, m the margin in cells; the
    grid covers ``x_span``/``y_span`` meters to the right/top of it.
    """
    m = math.ceil(max(radii) / cell_size) + 1
    return GridSpec(
        cell_size,
        2 * m + math.ceil(x_span / cell_size) + 1,
        2 * m + math.ceil(y_span / cell_size) + 1,
        1,
        tuple(radii),
    )


def _static_footprint(grid: GridSpec, pos) -> Footprint:
    m = _margin_cells(grid) * grid.cell_size
    x_max = (grid.x_extent - 1) * grid.cell_size
    y_max = (grid.y_extent - 1) * grid.cell_size
    if not (m - 1e-9 <= pos[0] <= x_max - m + 1e-9 and m - 1e-9 <= pos[1] <= y_max - m + 1e-9):
        raise ValueError(f"car at {pos} is too close to the grid border; its balls would be clipped")
    return occupancy(Trajectory((pos,)), grid)


def _ego_cost(levels: LevelCosts, ego: Footprint, others: Sequence[Footprint]) -> Fraction:
    fps = [ego, *others]
    return congestion_cost(fps, load_map(fps), levels, 0)


def two_car_curve(
    grid: GridSpec, levels: LevelCosts, deltas: Sequence[float], name: str = "cg"
) -> CurveTable:
    """Player-1 congestion cost with the second car ``delta`` meters to the right.

    Normalized as (cost - isolated cost) / (cost at distance 0 - isolated cost).
    """
    if grid.horizon_T != 1:
        raise ValueError("the two-car curve is a single time step (horizon_T = 1)")
    m = _margin_cells(grid) * grid.cell_size
    origin = (m, m)
    ego = _static_footprint(grid, origin)
    isolated = _ego_cost(levels, ego, [])
    peak = _ego_cost(levels, ego, [ego])
    if peak == isolated:
        raise ValueError("level costs do not react to a second car")
    rows = []
    for delta in deltas:
        other = _static_footprint(grid, (origin[0] + delta, origin[1]))
        raw = _ego_cost(levels, ego, [other])
        rows.append(CurveRow(float(delta), raw, (raw - isolated) / (peak - isolated)))
    return CurveTable(name, "distance_m", tuple(rows))


def distance_grid(delta_max: float = 14.0, step: float = 0.25) -> list[float]:
    n = int(round(delta_max / step))
    return [round(i * step, 10) for i in range(n + 1)]


def example1_curves(deltas: Sequence[float] | None = None) -> list[CurveTable]:
    deltas = distance_grid() if deltas is None else deltas
    grid = curve_grid(max(deltas), 0.0)
    return [
        two_car_curve(grid, LevelCosts.monomials(w, EXAMPLE1_DEGREE), deltas, name=f"cg{n}")
        for n, w in enumerate(EXAMPLE1_WEIGHTS, start=1)
    ]


def analytic_curve(name: str, spec: AnalyticProximitySpec, deltas: Sequence[float]) -> CurveTable:
    """Single-pair, single-step analytic proximity cost, normalized by its maximum."""
    pts = [d for d in deltas if not (spec.form == "inverse-power" and d == 0)]
    vals = [spec.pair_value(d) for d in pts]
    top = max(vals)
    return CurveTable(
        name,
        "distance_m",
        tuple(CurveRow(float(d), v, v / top if top > 0 else 0.0) for d, v in zip(pts, vals)),
    )


def _multi_car_setup(grid: GridSpec, offsets):
    m = _margin_cells(grid) * grid.cell_size
    lo_x = -min(0.0, *(o[0] for o in offsets))
    lo_y = -min(0.0, *(o[1] for o in offsets))
    origin = (m + lo_x, m + lo_y)
    ego = _static_footprint(grid, origin)
    others = [_static_footprint(grid, (origin[0] + dx, origin[1] + dy)) for dx, dy in offsets]
    return ego, others


def multi_car_grid(offsets=EXAMPLE2_OFFSETS, radii=EXAMPLE1_RADII, cell_size=EXAMPLE1_CELL) -> GridSpec:
    xs = [0.0, *(o[0] for o in offsets)]
    ys = [0.0, *(o[1] for o in offsets)]
    return curve_grid(max(xs) - min(xs), max(ys) - min(ys), radii, cell_size)


def co_occupancy(grid: GridSpec, offsets, present: int) -> list[int]:
    """Per level: sum over the ego's resources of the number of other cars on them."""
    ego, others = _multi_car_setup(grid, offsets)
    loads = load_map(others[:present])
    sums = [0] * grid.levels
    for r in ego:
        sums[r.level] += loads.get(r, 0)
    return sums


def multi_car_curve(
    grid: GridSpec, levels: LevelCosts, offsets=EXAMPLE2_OFFSETS, name: str = "cg"
) -> CurveTable:
    """Ego cost as 0, 1, ... other cars join, minus the cost with none.

    ``normalized`` divides the offset-removed cost by its value with all
    cars present.
    """
    ego, others = _multi_car_setup(grid, offsets)
    raw = [_ego_cost(levels, ego, others[:n]) for n in range(len(offsets) + 1)]
    shifted = [v - raw[0] for v in raw]
    top = shifted[-1] or Fraction(1)
    return CurveTable(
        name,
        "other_cars",
        tuple(CurveRow(float(n), raw[n], shifted[n] / top) for n in range(len(raw))),
    )


def offset_removed(table: CurveTable) -> list:
    return [r.raw - table.rows[0].raw for r in table.rows]


def example2_curves(offsets=EXAMPLE2_OFFSETS, weights=EXAMPLE2_WEIGHTS, degrees=EXAMPLE2_DEGREES) -> list[CurveTable]:
    grid = multi_car_grid(offsets)
    return [
        multi_car_curve(grid, LevelCosts.monomials(weights, d), offsets, name=f"d{d}")
        for d in degrees
    ]


# ---------------------------------------------------------------------------
# lattice games


class TrajectoryCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class AgentSpec:
    """A lattice driver: start/goal cells, speeds in cells per step, route heading."""

    start: tuple[int, int]
    goal: tuple[int, int] | None = None
    max_speed: int = 2
    start_speed: int = 0
    heading: tuple[int, int] = (1, 0)
    lane_change: bool = False

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(int(v) for v in self.start))
        if self.goal is not None:
            object.__setattr__(self, "goal", tuple(int(v) for v in self.goal))
        object.__setattr__(self, "heading", tuple(int(v) for v in self.heading))
        if abs(self.heading[0]) + abs(self.heading[1]) != 1:
            raise ValueError("heading must be a unit grid direction")
        if not 0 <= self.max_speed <= 2:
            raise ValueError("max_speed must be 0, 1 or 2 cells per step")
        if not 0 <= self.start_speed <= 2:
            raise ValueError("start_speed must be 0, 1 or 2 cells per step")


@dataclass(frozen=True)
class CustomStrategy:
    resources: tuple[ResourceId, ...]
    personal: Fraction = Fraction(0)
    name: str = ""


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    levels: LevelCosts
    grid: GridSpec | None = None
    agents: tuple[AgentSpec, ...] = ()
    personal: tuple[PersonalCostSpec, ...] = ()
    road: frozenset[tuple[int, int]] | None = None
    custom_players: tuple[tuple[CustomStrategy, ...], ...] = ()
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "custom":
            if not self.custom_players:
                raise ValueError("custom scenarios need at least one player")
            return
        if self.grid is None:
            raise ValueError(f"{self.kind} scenarios need a grid")
        if not self.agents:
            raise ValueError("need at least one agent")
        if self.personal and len(self.personal) != len(self.agents):
            raise ValueError("need one personal cost spec per agent")
        if len(self.levels) != self.grid.levels:
            raise ValueError("one level cost per proximity radius is required")
        for a in self.agents:
            for cell in (a.start, a.goal):
                if cell is not None and not (
                    0 <= cell[0] < self.grid.x_extent and 0 <= cell[1] < self.grid.y_extent
                ):
                    raise ValueError(f"cell {cell} is off the grid")

    @property
    def n_players(self) -> int:
        return len(self.custom_players) if self.kind == "custom" else len(self.agents)


def _moves(agent: AgentSpec):
    """(dx, dy, speed) per move in a fixed order: stay, +1, +2, lane left, lane right."""
    hx, hy = agent.heading
    out = [(0, 0, 0)]
    out += [(v * hx, v * hy, v) for v in (1, 2) if v <= agent.max_speed]
    if agent.lane_change and agent.max_speed >= 1:
        out += [(-hy, hx, 1), (hy, -hx, 1)]
    return out


def enumerate_trajectories(
    agent: AgentSpec,
    grid: GridSpec,
    road: frozenset | None = None,
    cap: int = TRAJECTORY_CAP,
) -> list[Trajectory]:
    """Every lattice trajectory over the horizon, in depth-first move order.

    Each step is one move; consecutive speeds (including the start speed)
    differ by at most one cell per step, and every visited cell is on the road.
    """

    def on_road(c) -> bool:
        inside = 0 <= c[0] < grid.x_extent and 0 <= c[1] < grid.y_extent
        return inside and (road is None or c in road)

    if not on_road(agent.start):
        raise ValueError(f"agent start {agent.start} is not on the road")
    moves = _moves(agent)
    cells_out: list[tuple] = []

    def extend(path, speed):
        if len(path) == grid.horizon_T:
            cells_out.append(tuple(path))
            if len(cells_out) > cap:
                raise TrajectoryCapError(f"{agent} has more than {cap} trajectories")
            return
        x, y = path[-1]
        for dx, dy, v in moves:
            if abs(v - speed) > 1:
                continue
            nxt = (x + dx, y + dy)
            if on_road(nxt):
                path.append(nxt)
                extend(path, v)
                path.pop()

    extend([agent.start], agent.start_speed)
    cs = grid.cell_size
    return [Trajectory(tuple((cx * cs, cy * cs) for cx, cy in cells)) for cells in cells_out]


def build_scenario(spec: ScenarioSpec, cap: int = TRAJECTORY_CAP) -> GameInstance:
    if spec.kind == "custom":
        players = tuple(
            Player(
                tuple(
                    Strategy(Footprint(frozenset(cs.resources), spec.grid), cs.personal, name=cs.name)
                    for cs in strategies
                )
            )
            for strategies in spec.custom_players
        )
        return GameInstance(players, spec.levels, spec.grid)

    grid = spec.grid
    personal = spec.personal or tuple(PersonalCostSpec() for _ in spec.agents)
    players = []
    for idx, (agent, pspec) in enumerate(zip(spec.agents, personal)):
        try:
            trajs = enumerate_trajectories(agent, grid, spec.road, cap)
        except TrajectoryCapError as exc:
            raise TrajectoryCapError(f"agent {idx}: {exc}") from exc
        goal = grid.center(*agent.goal) if agent.goal is not None else None
        strategies = tuple(
            Strategy(occupancy(tr, grid), personal_cost(tr, pspec, goal, unit=grid.cell_size), tr)
            for tr in trajs
        )
        players.append(Player(strategies, goal, name=f"agent{idx}"))
    return GameInstance(tuple(players), spec.levels, grid)


# Default lattice geometry: 1 m cells, level 0 is the car's own cell.
LATTICE_CELL = 1.0
LATTICE_RADII = (0.4, 1.2, 2.2)


def intersection_spec(
    n_players: int = 2,
    horizon: int = 5,
    approach: Sequence[int] = (2, 2, 2),
    start_speeds: Sequence[int] = (1, 1, 1),
    goal_ahead: Sequence[int] = (2, 2, 2),
    levels: LevelCosts | None = None,
    personal: Sequence[PersonalCostSpec] | None = None,
    radii=LATTICE_RADII,
) -> ScenarioSpec:
    """Crossing roads.

    Agent 0 drives east on row ``c``; agent 1 drives north on column ``c``;
    a third agent drives west on row ``c + 1``.  ``approach[i]`` is the
    number of cells before the crossing, ``goal_ahead[i]`` the goal distance
    past it.
    """
    if not 1 <= n_players <= 3:
        raise ValueError("intersection scenarios have 1 to 3 players")
    reach = 2 * (horizon - 1)
    c = max(approach[:n_players]) + 1
    size = c + reach + 2
    grid = GridSpec(LATTICE_CELL, size, size, horizon, tuple(radii))
    lanes = [
        (AgentSpec((c - approach[0], c), (c + goal_ahead[0], c), 2, start_speeds[0], (1, 0)),
         {(x, c) for x in range(size)}),
        (AgentSpec((c, c - approach[1]), (c, c + goal_ahead[1]), 2, start_speeds[1], (0, 1)),
         {(c, y) for y in range(size)}),
        (AgentSpec((c + approach[2], c + 1), (c - goal_ahead[2], c + 1), 2, start_speeds[2], (-1, 0)),
         {(x, c + 1) for x in range(size)}),
    ][:n_players]
    agents = tuple(a for a, _ in lanes)
    road = frozenset().union(*(cells for _, cells in lanes))
    return ScenarioSpec(
        "intersection",
        levels or LevelCosts.monomials((4, 1, "0.25"), 2),
        grid,
        agents,
        tuple(personal) if personal else tuple(PersonalCostSpec(1, 1, 4) for _ in agents),
        road,
        meta={"conflict_cells": [(c, c), (c, c + 1)][: max(1, n_players - 1)]},
    )


def merging_spec(
    n_players: int = 2,
    horizon: int = 5,
    starts: Sequence[int] = (1, 1, 0),
    start_speeds: Sequence[int] = (1, 1, 1),
    merge_at: int = 4,
    goal_x: Sequence[int] = (6, 6, 5),
    levels: LevelCosts | None = None,
    personal: Sequence[PersonalCostSpec] | None = None,
    radii=LATTICE_RADII,
) -> ScenarioSpec:
    """Two lanes joining into one.

    Row 1 is the main lane, row 2 the on-ramp, which ends at column
    ``merge_at``.  Agent 0 starts in the main lane, agent 1 on the ramp and an
    optional agent 2 in the main lane behind agent 0; all goals are in the
    main lane.  Lane changes are allowed wherever both cells exist.
    """
    if not 1 <= n_players <= 3:
        raise ValueError("merging scenarios have 1 to 3 players")
    length = max(starts[:n_players]) + 2 * (horizon - 1) + 1
    grid = GridSpec(LATTICE_CELL, length, 4, horizon, tuple(radii))
    main, ramp = 1, 2
    road = frozenset({(x, main) for x in range(length)} | {(x, ramp) for x in range(merge_at)})
    rows = (main, ramp, main)
    agents = tuple(
        AgentSpec((starts[i], rows[i]), (goal_x[i], main), 2, start_speeds[i], (1, 0), lane_change=True)
        for i in range(n_players)
    )
    return ScenarioSpec(
        "merging",
        levels or LevelCosts.monomials((4, 1, "0.25"), 2),
        grid,
        agents,
        tuple(personal) if personal else tuple(PersonalCostSpec(1, 1, 4) for _ in agents),
        road,
        meta={"merge_at": merge_at},
    )


def random_lattice_spec(kind: str, n_players: int, rng: np.random.Generator) -> ScenarioSpec:
    """Seeded variation of the intersection/merging layouts, costs and degrees."""
    d = int(rng.integers(1, 4))
    base = [Fraction(int(rng.integers(2, 9))), Fraction(int(rng.integers(1, 5)), 2), Fraction(int(rng.integers(1, 5)), 8)]
    levels = LevelCosts.monomials(base, d)
    personal = tuple(
        PersonalCostSpec(
            Fraction(int(rng.integers(0, 3)), 2),
            Fraction(int(rng.integers(0, 5)), 2),
            Fraction(int(rng.integers(0, 9))),
        )
        for _ in range(n_players)
    )
    speeds = [int(v) for v in rng.integers(0, 3, size=3)]
    if kind == "intersection":
        horizon = 5 if n_players == 3 else int(rng.integers(5, 7))
        approach = [int(v) for v in rng.integers(1, 4, size=3)]
        ahead = [int(v) for v in rng.integers(1, 4, size=3)]
        return intersection_spec(n_players, horizon, approach, speeds, ahead, levels, personal)
    if kind == "merging":
        horizon = 4 if n_players == 3 else 5
        starts = [int(rng.integers(1, 3)), int(rng.integers(0, 3)), 0]
        merge_at = int(rng.integers(3, 6))
        goals = [int(v) for v in rng.integers(4, 8, size=3)]
        return merging_spec(n_players, horizon, starts, speeds, merge_at, goals, levels, personal)
    raise ValueError(f"no random generator for kind {kind!r}")


def with_personal_scale(spec: ScenarioSpec, factor) -> ScenarioSpec:
    """Same scenario with every personal-cost weight multiplied by ``factor``."""
    if spec.kind == "custom":
        f = as_fraction(factor)
        players = tuple(
            tuple(replace(cs, personal=cs.personal * f) for cs in strategies)
            for strategies in spec.custom_players
        )
        return replace(spec, custom_players=players)
    return replace(spec, personal=tuple(p.scaled(factor) for p in spec.personal))

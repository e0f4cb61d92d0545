"""Space x time x proximity-level resource grid.

A car is a point.  At every time step it occupies, at proximity level ``h``,
every grid cell whose center lies strictly closer than ``radii[h]`` to the
car, plus the cell physically holding the car.  Levels are disjoint copies
of the spatio-temporal grid, so the same ``(x, y, t)`` cell at two levels is
two different resources.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

Point = tuple[float, float]

# Cell centers exactly on a ball boundary count as outside.
_BOUNDARY_RTOL = 1e-12


class OutOfGridError(ValueError):
    """A trajectory position falls outside the grid."""

    def __init__(self, t: int, position: Point):
        super().__init__(f"position {position} at time step {t} lies outside the grid")
        self.t = t
        self.position = position


@dataclass(frozen=True)
class GridSpec:
    cell_size: float
    x_extent: int
    y_extent: int
    horizon_T: int
    radii: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if self.x_extent < 1 or self.y_extent < 1:
            raise ValueError("grid extents must be positive")
        if self.horizon_T < 1:
            raise ValueError("horizon_T must be >= 1")
        if not self.radii:
            raise ValueError("at least one proximity radius is required")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")

    @property
    def levels(self) -> int:
        return len(self.radii)

    def center(self, x_idx: int, y_idx: int) -> Point:
        return (x_idx * self.cell_size, y_idx * self.cell_size)

    def contains(self, position: Point) -> bool:
        qx, qy = position[0] / self.cell_size, position[1] / self.cell_size
        return -0.5 <= qx < self.x_extent - 0.5 and -0.5 <= qy < self.y_extent - 0.5

    def holding_cell(self, position: Point) -> tuple[int, int]:
        return (
            math.floor(position[0] / self.cell_size + 0.5),
            math.floor(position[1] / self.cell_size + 0.5),
        )


class ResourceId(NamedTuple):
    x: int
    y: int
    t: int
    level: int


@dataclass(frozen=True)
class Trajectory:
    """One planar position (meters) per time step."""

    positions: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.positions)
        if not pts:
            raise ValueError("a trajectory needs at least one position")
        object.__setattr__(self, "positions", pts)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def speeds(self) -> tuple[float, ...]:
        """Per-step displacement magnitudes, ``len - 1`` values."""
        p = self.positions
        return tuple(math.dist(p[t], p[t + 1]) for t in range(len(p) - 1))

    @property
    def accelerations(self) -> tuple[float, ...]:
        """Per-step speed-change magnitudes, ``len - 2`` values."""
        s = self.speeds
        return tuple(abs(s[t + 1] - s[t]) for t in range(len(s) - 1))

    def translated(self, offsets: Sequence[Point] | Point) -> "Trajectory":
        """Shift by one offset for all steps, or by one offset per step."""
        if len(offsets) == 2 and not isinstance(offsets[0], (tuple, list)):
            offsets = [offsets] * len(self)
        if len(offsets) != len(self):
            raise ValueError("need one offset per time step")
        return Trajectory(
            tuple((x + dx, y + dy) for (x, y), (dx, dy) in zip(self.positions, offsets))
        )


@dataclass(frozen=True)
class Footprint:
    """Resources used by one trajectory (or an explicit strategy)."""

    resources: frozenset[ResourceId]
    grid: GridSpec | None = None

    def __len__(self) -> int:
        return len(self.resources)

    def __iter__(self) -> Iterator[ResourceId]:
        return iter(self.resources)

    def __contains__(self, r) -> bool:
        return r in self.resources

    def level_set(self, t: int, level: int) -> frozenset[ResourceId]:
        return frozenset(r for r in self.resources if r.t == t and r.level == level)

    def translated(self, dx: int, dy: int) -> "Footprint":
        return Footprint(
            frozenset(ResourceId(r.x + dx, r.y + dy, r.t, r.level) for r in self.resources),
            self.grid,
        )


LoadMap = dict  # ResourceId -> int


@lru_cache(maxsize=None)
def _candidate_offsets(radius_cells: float) -> np.ndarray:
    span = math.ceil(radius_cells) + 1
    rng = np.arange(-span, span + 1)
    dx, dy = np.meshgrid(rng, rng, indexing="ij")
    return np.stack([dx.ravel(), dy.ravel()], axis=1)


def _ball_cells(q: tuple[float, float], radius_cells: float) -> np.ndarray:
    bx, by = math.floor(q[0]), math.floor(q[1])
    fx, fy = q[0] - bx, q[1] - by
    off = _candidate_offsets(radius_cells)
    d2 = (off[:, 0] - fx) ** 2 + (off[:, 1] - fy) ** 2
    inside = d2 < radius_cells * radius_cells * (1.0 - _BOUNDARY_RTOL)
    return off[inside] + np.array([bx, by])


def occupancy(traj: Trajectory, grid: GridSpec) -> Footprint:
    """Footprint of ``traj``; cells outside the grid do not exist."""
    if len(traj) != grid.horizon_T:
        raise ValueError(
            f"trajectory has {len(traj)} positions but the horizon is {grid.horizon_T}"
        )
    out: set[ResourceId] = set()
    for t, pos in enumerate(traj.positions):
        if not grid.contains(pos):
            raise OutOfGridError(t, pos)
        q = (pos[0] / grid.cell_size, pos[1] / grid.cell_size)
        hold = grid.holding_cell(pos)
        for h, rho in enumerate(grid.radii):
            cells = _ball_cells(q, rho / grid.cell_size)
            keep = (
                (cells[:, 0] >= 0)
                & (cells[:, 0] < grid.x_extent)
                & (cells[:, 1] >= 0)
                & (cells[:, 1] < grid.y_extent)
            )
            out.update(ResourceId(int(x), int(y), t, h) for x, y in cells[keep])
            out.add(ResourceId(hold[0], hold[1], t, h))
    return Footprint(frozenset(out), grid)


def distance_at(a: Trajectory, b: Trajectory, t: int) -> float:
    if not (0 <= t < len(a) and 0 <= t < len(b)):
        raise IndexError(f"time step {t} out of range")
    return math.dist(a.positions[t], b.positions[t])


def load_map(footprints: Iterable[Footprint]) -> LoadMap:
    """Number of players using each resource; unused resources are absent."""
    footprints = list(footprints)
    grids = {fp.grid for fp in footprints if fp.grid is not None}
    if len(grids) > 1:
        raise ValueError("footprints were built against different grids")
    return dict(Counter(r for fp in footprints for r in fp.resources))

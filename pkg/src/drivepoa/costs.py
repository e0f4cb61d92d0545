"""Congestion, proximity and personal costs.

Everything on the congestion path is exact: load polynomials carry
``Fraction`` coefficients and loads are integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from .grid import Footprint, LoadMap, Point, Trajectory, distance_at, load_map


def as_fraction(value) -> Fraction:
    """Exact rational from ints, Fractions, decimal strings or floats.

    Floats go through ``repr`` so that ``0.9`` becomes ``9/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite cost value {value!r}")
        return Fraction(repr(value))
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class LoadPolynomial:
    """``J(x) = sum_k coefficients[k] * x**k`` with non-negative coefficients."""

    coefficients: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(as_fraction(c) for c in self.coefficients) or (Fraction(0),)
        if any(c < 0 for c in coeffs):
            raise ValueError("load polynomial coefficients must be non-negative")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def monomial(cls, weight, degree: int) -> "LoadPolynomial":
        return cls((0,) * degree + (weight,))

    @property
    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coefficients) if c != 0]
        return nz[-1] if nz else 0

    def __call__(self, x: int) -> Fraction:
        return poly_eval(self, x)


def poly_eval(p: LoadPolynomial, x: int) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p.coefficients):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class LevelCosts:
    """One load polynomial per proximity level."""

    polys: tuple[LoadPolynomial, ...]

    def __post_init__(self):
        polys = tuple(
            p if isinstance(p, LoadPolynomial) else LoadPolynomial(tuple(p)) for p in self.polys
        )
        if not polys:
            raise ValueError("need at least one level")
        object.__setattr__(self, "polys", polys)

    @classmethod
    def monomials(cls, weights: Sequence, degree: int) -> "LevelCosts":
        return cls(tuple(LoadPolynomial.monomial(w, degree) for w in weights))

    def __len__(self) -> int:
        return len(self.polys)

    def __getitem__(self, h: int) -> LoadPolynomial:
        return self.polys[h]

    @property
    def degree(self) -> int:
        return max(p.degree for p in self.polys)


def congestion_cost(
    footprints: Sequence[Footprint], loads: LoadMap, levels: LevelCosts, i: int
) -> Fraction:
    """Sum of ``J_level(load)`` over the resources player ``i`` occupies."""
    total = Fraction(0)
    for r in footprints[i]:
        if r.level >= len(levels):
            raise ValueError(
                f"resource at level {r.level} but only {len(levels)} level costs given"
            )
        total += levels[r.level](loads[r])
    return total


PROXIMITY_FORMS = ("threshold-power", "inverse-power", "negative-power-sum")


@dataclass(frozen=True)
class AnalyticProximitySpec:
    form: str
    exponent: float
    safety_distance: float | None = None

    def __post_init__(self):
        if self.form not in PROXIMITY_FORMS:
            raise ValueError(f"unknown proximity form {self.form!r}")
        if not self.exponent > 0:
            raise ValueError("exponent must be positive")
        if self.form == "threshold-power":
            if not self.exponent > 1:
                raise ValueError("threshold form needs exponent > 1")
            if self.safety_distance is None or self.safety_distance <= 0:
                raise ValueError("threshold form needs a positive safety distance")

    def pair_value(self, delta: float) -> float:
        """Single pair, single time step."""
        if self.form == "threshold-power":
            return (self.safety_distance - delta) ** self.exponent if delta < self.safety_distance else 0.0
        if self.form == "inverse-power":
            if delta == 0:
                raise ZeroDivisionError("inverse-power proximity cost is singular at distance 0")
            return delta ** -self.exponent
        return -(delta**self.exponent)


def analytic_proximity_cost(
    trajs: Sequence[Trajectory], i: int, spec: AnalyticProximitySpec
) -> float:
    horizon = len(trajs[i])
    if any(len(tr) != horizon for tr in trajs):
        raise ValueError("all trajectories must share the horizon")
    return sum(
        spec.pair_value(distance_at(trajs[i], trajs[j], t))
        for j in range(len(trajs))
        if j != i
        for t in range(horizon)
    )


@dataclass(frozen=True)
class PersonalCostSpec:
    time_weight: Fraction = Fraction(0)
    accel_weight: Fraction = Fraction(0)
    goal_miss_penalty: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("time_weight", "accel_weight", "goal_miss_penalty"):
            v = as_fraction(getattr(self, name))
            if v < 0:
                raise ValueError(f"{name} must be non-negative")
            object.__setattr__(self, name, v)

    def scaled(self, factor) -> "PersonalCostSpec":
        f = as_fraction(factor)
        return PersonalCostSpec(self.time_weight * f, self.accel_weight * f, self.goal_miss_penalty * f)


def personal_cost(
    traj: Trajectory, spec: PersonalCostSpec, goal: Point | None = None, unit: float = 1.0
) -> Fraction:
    """Per-step time cost, squared-acceleration comfort cost and goal-miss penalty.

    Accelerations are measured in ``unit`` lengths per step squared (pass the
    cell size to get lattice units).
    """
    accel_sq = sum(as_fraction(a / unit) ** 2 for a in traj.accelerations)
    cost = spec.time_weight * len(traj) + spec.accel_weight * accel_sq
    if goal is not None:
        final = traj.positions[-1]
        if not (math.isclose(final[0], goal[0], abs_tol=1e-9) and math.isclose(final[1], goal[1], abs_tol=1e-9)):
            cost += spec.goal_miss_penalty
    return cost


@dataclass(frozen=True)
class PlayerCost:
    cg: Fraction
    per: Fraction

    @property
    def total(self) -> Fraction:
        return self.cg + self.per


CostBreakdown = tuple[PlayerCost, ...]


def cost_breakdown(
    footprints: Sequence[Footprint], personal: Sequence[Fraction], levels: LevelCosts
) -> CostBreakdown:
    loads = load_map(footprints)
    return tuple(
        PlayerCost(congestion_cost(footprints, loads, levels, i), as_fraction(personal[i]))
        for i in range(len(footprints))
    )


def social_cost(breakdown: CostBreakdown) -> Fraction:
    return sum((pc.total for pc in breakdown), Fraction(0))


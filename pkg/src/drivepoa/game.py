"""Finite driving games: potential, equilibria, optima and Price of Anarchy."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .costs import LevelCosts, PlayerCost, as_fraction, congestion_cost
from .grid import Footprint, GridSpec, Point, Trajectory, distance_at, load_map, occupancy
from .tables import ProfileTables

DEFAULT_CAP = 10**7

Profile = tuple[int, ...]
INFINITE = "infinite"
UNDEFINED = "undefined"


class EnumerationCapError(RuntimeError):
    pass


@dataclass(frozen=True)
class Strategy:
    """A trajectory (or an explicit resource set) and its personal cost."""

    footprint: Footprint
    personal: Fraction = Fraction(0)
    trajectory: Trajectory | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "personal", as_fraction(self.personal))
        if self.personal < 0:
            raise ValueError("personal costs must be non-negative")


@dataclass(frozen=True)
class Player:
    strategies: tuple[Strategy, ...]
    goal: Point | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if not self.strategies:
            raise ValueError("every player needs at least one strategy")


@dataclass(frozen=True)
class GameInstance:
    players: tuple[Player, ...]
    levels: LevelCosts
    grid: GridSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        if not self.players:
            raise ValueError("a game needs at least one player")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(p.strategies) for p in self.players)

    @property
    def n_profiles(self) -> int:
        return math.prod(self.shape)

    @property
    def degree(self) -> int:
        return self.levels.degree

    def strategy(self, i: int, s: int) -> Strategy:
        return self.players[i].strategies[s]

    def footprints(self, profile: Profile) -> list[Footprint]:
        self.check_profile(profile)
        return [self.strategy(i, s).footprint for i, s in enumerate(profile)]

    def check_profile(self, profile: Profile) -> None:
        if len(profile) != len(self.players):
            raise ValueError("profile length does not match the number of players")
        for i, s in enumerate(profile):
            if not 0 <= s < len(self.players[i].strategies):
                raise ValueError(f"strategy index {s} out of range for player {i}")


def player_costs(game: GameInstance, profile: Profile) -> tuple[PlayerCost, ...]:
    fps = game.footprints(profile)
    loads = load_map(fps)
    return tuple(
        PlayerCost(congestion_cost(fps, loads, game.levels, i), game.strategy(i, s).personal)
        for i, s in enumerate(profile)
    )


def player_cost(game: GameInstance, profile: Profile, i: int) -> Fraction:
    return player_costs(game, profile)[i].total


def social_cost(game: GameInstance, profile: Profile) -> Fraction:
    return sum((pc.total for pc in player_costs(game, profile)), Fraction(0))


def rosenthal_potential(game: GameInstance, profile: Profile) -> Fraction:
    loads = load_map(game.footprints(profile))
    phi = Fraction(0)
    for r, load in loads.items():
        poly = game.levels[r.level]
        phi += sum((poly(k) for k in range(1, load + 1)), Fraction(0))
    return phi + sum((game.strategy(i, s).personal for i, s in enumerate(profile)), Fraction(0))


def _deviation_costs(game: GameInstance, profile: Profile, i: int) -> list[Fraction]:
    """Total cost of player ``i`` for each of its strategies, others fixed."""
    others = [game.strategy(j, s).footprint for j, s in enumerate(profile) if j != i]
    base = load_map(others)
    out = []
    for strat in game.players[i].strategies:
        cg = sum(
            (game.levels[r.level](base.get(r, 0) + 1) for r in strat.footprint), Fraction(0)
        )
        out.append(cg + strat.personal)
    return out


class NashCheck(NamedTuple):
    is_nash: bool
    witness: tuple[int, int] | None  # (player, improving strategy)

    def __bool__(self) -> bool:
        return self.is_nash


def is_nash(game: GameInstance, profile: Profile) -> NashCheck:
    """No player has a strictly improving unilateral deviation."""
    game.check_profile(profile)
    for i, s in enumerate(profile):
        costs = _deviation_costs(game, profile, i)
        for alt, c in enumerate(costs):
            if c < costs[s]:
                return NashCheck(False, (i, alt))
    return NashCheck(True, None)


def _check_cap(game: GameInstance, cap: int) -> None:
    if game.n_profiles > cap:
        raise EnumerationCapError(
            f"{game.n_profiles} profiles exceed the enumeration cap of {cap}; "
            "raise --cap or use sampled better-response mode (--sampled)"
        )


def _profiles(mask: np.ndarray) -> list[Profile]:
    return [tuple(int(v) for v in idx) for idx in np.argwhere(mask)]


def enumerate_nash(game: GameInstance, cap: int = DEFAULT_CAP, tables: ProfileTables | None = None) -> list[Profile]:
    """All pure Nash equilibria in lexicographic order."""
    _check_cap(game, cap)
    tables = tables or ProfileTables(game)
    return _profiles(tables.nash_mask())


def social_optima(game: GameInstance, cap: int = DEFAULT_CAP, tables: ProfileTables | None = None) -> list[Profile]:
    _check_cap(game, cap)
    tables = tables or ProfileTables(game)
    social = tables.social()
    return _profiles(social == social.min())


def better_response_path(game: GameInstance, start: Profile) -> Iterator[Profile]:
    """Profiles visited by round-robin better response, starting with ``start``.

    Players are scanned in index order; a player switches to its first
    strictly improving strategy.  Stops after a full scan without moves.
    """
    game.check_profile(start)
    profile = list(start)
    yield tuple(profile)
    n = len(profile)
    idle = 0
    i = 0
    while idle < n:
        costs = _deviation_costs(game, tuple(profile), i)
        current = costs[profile[i]]
        move = next((alt for alt, c in enumerate(costs) if c < current), None)
        if move is None:
            idle += 1
        else:
            profile[i] = move
            idle = 0
            yield tuple(profile)
        i = (i + 1) % n


def better_response(game: GameInstance, start: Profile) -> Profile:
    for profile in better_response_path(game, start):
        pass
    return profile


@dataclass(frozen=True)
class EquilibriumReport:
    nash_profiles: tuple[Profile, ...]
    optima: tuple[Profile, ...]
    worst_ne_cost: Fraction
    best_cost: Fraction
    poa: Fraction | str  # UNDEFINED when the optimum costs nothing
    alpha_star: Fraction | str = Fraction(0)  # INFINITE when unconstrained
    degree: int = 1
    sampled: bool = False
    n_profiles: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def poa_label(self) -> str:
        return "observed PoA" if self.sampled else "PoA"


def price_of_anarchy(game: GameInstance, cap: int = DEFAULT_CAP) -> EquilibriumReport:
    _check_cap(game, cap)
    tables = ProfileTables(game)
    social = tables.social()
    nash = _profiles(tables.nash_mask())
    if not nash:
        raise AssertionError("no pure Nash equilibrium found in a potential game")
    optima = _profiles(social == social.min())
    worst = max(tables.unscale(social[p]) for p in nash)
    best = tables.unscale(social.min())
    return _report(game, nash, optima, worst, best, sampled=False)


def _report(game, nash, optima, worst, best, sampled) -> EquilibriumReport:
    if best > 0:
        poa: Fraction | str = worst / best
    else:
        poa = UNDEFINED
    report = EquilibriumReport(
        nash_profiles=tuple(nash),
        optima=tuple(optima),
        worst_ne_cost=worst,
        best_cost=best,
        poa=poa,
        degree=game.degree,
        sampled=sampled,
        n_profiles=game.n_profiles,
    )
    alpha = empirical_alpha_star(game, report)
    return EquilibriumReport(**{**report.__dict__, "alpha_star": alpha})


def sampled_price_of_anarchy(
    game: GameInstance, samples: int, rng: np.random.Generator
) -> EquilibriumReport:
    """Observed PoA from better-response runs out of random starting profiles.

    Only a lower estimate of the true PoA: the equilibria and the best profile
    are those encountered, not the complete sets.
    """
    seen_nash: dict[Profile, Fraction] = {}
    visited: dict[Profile, Fraction] = {}
    for _ in range(samples):
        start = tuple(int(rng.integers(n)) for n in game.shape)
        for prof in better_response_path(game, start):
            if prof not in visited:
                visited[prof] = social_cost(game, prof)
        seen_nash[prof] = visited[prof]
    best = min(visited.values())
    optima = sorted(p for p, c in visited.items() if c == best)
    worst = max(seen_nash.values())
    return _report(game, sorted(seen_nash), optima, worst, best, sampled=True)


def empirical_alpha_star(game: GameInstance, report: EquilibriumReport) -> Fraction | str:
    """Largest alpha with personal >= alpha * congestion over equilibria and optima.

    A player with zero congestion cost puts no constraint on alpha; if nobody
    does, the result is ``INFINITE``.
    """
    alpha: Fraction | None = None
    for prof in dict.fromkeys(report.nash_profiles + report.optima):
        for pc in player_costs(game, prof):
            if pc.cg == 0:
                continue
            ratio = pc.per / pc.cg
            alpha = ratio if alpha is None else min(alpha, ratio)
    return INFINITE if alpha is None else alpha


class Property1(enum.Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not applicable"


def _cell_offsets(a: Trajectory, b: Trajectory, cell: float) -> list[tuple[int, int]] | None:
    out = []
    for (ax, ay), (bx, by) in zip(a.positions, b.positions):
        qx, qy = (bx - ax) / cell, (by - ay) / cell
        kx, ky = round(qx), round(qy)
        if abs(qx - kx) > 1e-9 or abs(qy - ky) > 1e-9:
            return None
        out.append((kx, ky))
    return out


def check_property1(
    game: GameInstance, profile: Profile, i: int, deviation: Strategy | Trajectory | int
) -> Property1:
    """Does moving player ``i`` closer to everyone raise every congestion cost?

    The deviation must be a whole-cell translate (possibly a different shift
    per time step) of player ``i``'s current trajectory, with no distance to
    any other player increasing at any time step.
    """
    if game.grid is None:
        raise ValueError("Property 1 needs trajectories on a grid")
    game.check_profile(profile)
    current = game.strategy(i, profile[i]).trajectory
    if isinstance(deviation, int):
        deviation = game.strategy(i, deviation)
    new_traj = deviation.trajectory if isinstance(deviation, Strategy) else deviation
    if current is None or new_traj is None or len(new_traj) != len(current):
        return Property1.NOT_APPLICABLE
    if _cell_offsets(current, new_traj, game.grid.cell_size) is None:
        return Property1.NOT_APPLICABLE
    for j, s in enumerate(profile):
        if j == i:
            continue
        other = game.strategy(j, s).trajectory
        if other is None:
            return Property1.NOT_APPLICABLE
        for t in range(len(current)):
            if distance_at(new_traj, other, t) > distance_at(current, other, t) + 1e-9:
                return Property1.NOT_APPLICABLE
    try:
        new_fp = occupancy(new_traj, game.grid)
    except ValueError:
        return Property1.NOT_APPLICABLE
    before = game.footprints(profile)
    after = list(before)
    after[i] = new_fp
    loads_before, loads_after = load_map(before), load_map(after)
    for j in range(len(profile)):
        if congestion_cost(after, loads_after, game.levels, j) < congestion_cost(
            before, loads_before, game.levels, j
        ):
            return Property1.VIOLATED
    return Property1.HOLDS


def poa_check(report: EquilibriumReport) -> tuple[float, bool]:
    """Refined bound for the report's degree and alpha, and whether PoA respects it."""
    from .bounds import bound_for_game

    bound = bound_for_game(report.degree, report.alpha_star)
    if report.poa == UNDEFINED:
        return bound, report.worst_ne_cost == 0
    return bound, float(report.poa) <= bound + 1e-12

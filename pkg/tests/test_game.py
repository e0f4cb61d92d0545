import itertools
from fractions import Fraction

import numpy as np
import pytest

from _random_games import random_game
from drivepoa.costs import LevelCosts
from drivepoa.game import (
    EnumerationCapError,
    GameInstance,
    Player,
    Property1,
    Strategy,
    better_response,
    better_response_path,
    check_property1,
    empirical_alpha_star,
    enumerate_nash,
    is_nash,
    player_cost,
    player_costs,
    poa_check,
    price_of_anarchy,
    rosenthal_potential,
    sampled_price_of_anarchy,
    social_cost,
    social_optima,
)
from drivepoa.grid import Footprint, GridSpec, ResourceId, Trajectory, occupancy
from drivepoa.tables import ProfileTables, forward_differences


def fp(*cells):
    return Footprint(frozenset(ResourceId(*c) for c in cells))


def ab_game():
    # resource A costs x, resource B costs 2 whatever its load
    levels = LevelCosts(((0, 1), (2,)))
    strategies = (Strategy(fp((0, 0, 0, 0)), name="A"), Strategy(fp((1, 0, 0, 1)), name="B"))
    return GameInstance((Player(strategies), Player(strategies)), levels)


def decoupled_game():
    levels = LevelCosts(((0, 1),))
    p0 = Player((Strategy(fp((0, 0, 0, 0)), 1), Strategy(fp((0, 1, 0, 0)), 2), Strategy(fp((0, 2, 0, 0)), 1)))
    p1 = Player((Strategy(fp((5, 5, 0, 0)), 3), Strategy(fp((6, 5, 0, 0)), 4)))
    return GameInstance((p0, p1), levels)


def all_profiles(game):
    return itertools.product(*(range(n) for n in game.shape))


def test_forward_differences():
    assert forward_differences([Fraction(v) for v in (1, 4, 9, 16)]) == [1, 3, 2, 0]


def test_tables_match_naive_costs():
    rng = np.random.default_rng(21)
    for _ in range(15):
        game = random_game(rng, max_strategies=6)
        tables = ProfileTables(game)
        pot = tables.potential()
        for prof in all_profiles(game):
            costs = player_costs(game, prof)
            for i, pc in enumerate(costs):
                assert tables.unscale(tables.cg[i][prof]) == pc.cg
                assert tables.unscale(tables.total(i)[prof]) == pc.total
            assert tables.unscale(pot[prof]) == rosenthal_potential(game, prof)


def test_tables_object_dtype_for_huge_costs():
    levels = LevelCosts(((0, 10**18), (10**17,)))
    s = (Strategy(fp((0, 0, 0, 0), (0, 0, 0, 1))), Strategy(fp((1, 0, 0, 0))))
    game = GameInstance((Player(s), Player(s), Player(s)), levels)
    tables = ProfileTables(game)
    assert tables.dtype is object
    for prof in all_profiles(game):
        assert tables.unscale(tables.social()[prof]) == social_cost(game, prof)


def test_exact_potential_identity_naive():
    rng = np.random.default_rng(8)
    for _ in range(10):
        game = random_game(rng, max_strategies=5)
        phi = {p: rosenthal_potential(game, p) for p in all_profiles(game)}
        cost = {p: player_costs(game, p) for p in phi}
        for prof in phi:
            for i, n in enumerate(game.shape):
                for alt in range(n):
                    dev = prof[:i] + (alt,) + prof[i + 1 :]
                    assert phi[dev] - phi[prof] == cost[dev][i].total - cost[prof][i].total


def test_ab_game_equilibria():
    game = ab_game()
    assert enumerate_nash(game) == [(0, 0), (0, 1), (1, 0)]
    check = is_nash(game, (1, 1))
    assert not check and check.witness == (0, 0)
    assert all(is_nash(game, p) for p in [(0, 0), (0, 1), (1, 0)])


def test_ab_game_optima_and_poa():
    game = ab_game()
    assert social_optima(game) == [(0, 1), (1, 0)]
    report = price_of_anarchy(game)
    assert report.worst_ne_cost == 4 and report.best_cost == 3
    assert report.poa == Fraction(4, 3)
    assert report.alpha_star == 0
    bound, ok = poa_check(report)
    assert bound == Fraction(5, 2) and ok


def test_better_response_from_bb():
    game = ab_game()
    path = list(better_response_path(game, (1, 1)))
    assert path == [(1, 1), (0, 1)]
    assert better_response(game, (0, 0)) == (0, 0)


def test_better_response_reaches_nash_and_lowers_potential():
    rng = np.random.default_rng(13)
    for _ in range(100):
        game = random_game(rng, max_strategies=8)
        start = tuple(int(rng.integers(n)) for n in game.shape)
        path = list(better_response_path(game, start))
        phis = [rosenthal_potential(game, p) for p in path]
        assert all(b < a for a, b in zip(phis, phis[1:]))
        assert is_nash(game, path[-1])
        assert len(path) <= game.n_profiles


def test_single_player_game():
    s = tuple(Strategy(fp((k, 0, 0, 0)), per) for k, per in enumerate((3, 1, 2, 1)))
    game = GameInstance((Player(s),), LevelCosts(((0, 1),)))
    assert enumerate_nash(game) == [(1,), (3,)]
    assert rosenthal_potential(game, (2,)) == player_cost(game, (2,), 0)


def test_single_profile_game():
    game = GameInstance((Player((Strategy(fp((0, 0, 0, 0))),)),) * 2, LevelCosts(((0, 1),)))
    assert enumerate_nash(game) == [(0, 0)]
    assert social_optima(game) == [(0, 0)]


def test_decoupled_game():
    game = decoupled_game()
    assert enumerate_nash(game) == [(0, 0), (2, 0)]
    assert social_optima(game) == [(0, 0), (2, 0)]
    report = price_of_anarchy(game)
    assert report.poa == 1
    assert report.alpha_star == 1


def test_potential_counts_resources_without_overlap():
    game = decoupled_game()
    levels = LevelCosts(((0, 1),))
    bare = GameInstance(
        tuple(Player(tuple(Strategy(s.footprint) for s in p.strategies)) for p in game.players), levels
    )
    assert rosenthal_potential(bare, (0, 0)) == 2


def test_cap_error_mentions_sampling():
    game = ab_game()
    with pytest.raises(EnumerationCapError, match="sampled"):
        enumerate_nash(game, cap=3)
    with pytest.raises(EnumerationCapError):
        price_of_anarchy(game, cap=3)


def test_profile_validation():
    with pytest.raises(ValueError):
        is_nash(ab_game(), (0, 2))
    with pytest.raises(ValueError):
        social_cost(ab_game(), (0,))


def test_random_games_report_invariants():
    rng = np.random.default_rng(17)
    for _ in range(30):
        game = random_game(rng, max_strategies=10)
        tables = ProfileTables(game)
        report = price_of_anarchy(game)
        assert report.nash_profiles
        assert all(is_nash(game, p) for p in report.nash_profiles)
        social = tables.social()
        assert all(social[p] == social.min() for p in report.optima)
        if report.poa != "undefined":
            assert report.poa >= 1
        # global potential minimizers are equilibria
        pot = tables.potential()
        for idx in np.argwhere(pot == pot.min()):
            assert tuple(int(v) for v in idx) in report.nash_profiles
        bound, ok = poa_check(report)
        assert ok, (report.poa, bound)


def test_linear_games_respect_five_halves():
    rng = np.random.default_rng(23)
    levels = LevelCosts(((0, 1), (0, 2), (1, 1)))
    for _ in range(20):
        game = random_game(rng, max_strategies=8)
        game = GameInstance(game.players, LevelCosts(levels.polys[: game.grid.levels]), game.grid)
        report = price_of_anarchy(game)
        assert report.poa <= Fraction(5, 2)


def test_alpha_star_conventions():
    zero = ab_game()
    assert price_of_anarchy(zero).alpha_star == 0
    # personal cost exactly 3x congestion cost on every profile
    levels = LevelCosts(((0, 1),))
    s = (Strategy(fp((0, 0, 0, 0)), 3), Strategy(fp((1, 0, 0, 0), (2, 0, 0, 0)), 6))
    game = GameInstance((Player(s), Player((Strategy(fp((5, 5, 0, 0)), 3),))), levels)
    assert price_of_anarchy(game).alpha_star == 3
    # nobody congested: unconstrained
    empty = GameInstance((Player((Strategy(fp(), 1),)),), levels)
    report = price_of_anarchy(empty)
    assert report.alpha_star == "infinite"
    assert poa_check(report) == (1, True)


def test_alpha_star_matches_min_ratio_oracle():
    rng = np.random.default_rng(31)
    for _ in range(20):
        game = random_game(rng, max_strategies=6)
        report = price_of_anarchy(game)
        ratios = []
        for prof in set(report.nash_profiles) | set(report.optima):
            for pc in player_costs(game, prof):
                if pc.cg > 0:
                    ratios.append(pc.per / pc.cg)
        expected = min(ratios) if ratios else "infinite"
        assert empirical_alpha_star(game, report) == expected


def test_sampled_mode_labels_and_equilibria():
    rng = np.random.default_rng(3)
    game = random_game(rng, n_players=3, max_strategies=12)
    report = sampled_price_of_anarchy(game, 30, np.random.default_rng(0))
    assert report.sampled and report.poa_label == "observed PoA"
    assert all(is_nash(game, p) for p in report.nash_profiles)
    again = sampled_price_of_anarchy(game, 30, np.random.default_rng(0))
    assert again == report


def line_game(positions, radii=(0.4, 1.2, 2.2)):
    grid = GridSpec(1.0, 20, 5, 1, radii)
    players = []
    for x in positions:
        tr = Trajectory(((float(x), 2.0),))
        players.append(Player((Strategy(occupancy(tr, grid), 0, tr),)))
    return GameInstance(tuple(players), LevelCosts.monomials((4, 1, 1), 2), grid)


def test_property1_identity_and_line_approach():
    game = line_game([5, 9])
    assert check_property1(game, (0, 0), 0, 0) is Property1.HOLDS
    for step in range(1, 4):
        closer = Trajectory(((5.0 + step, 2.0),))
        assert check_property1(game, (0, 0), 0, closer) is Property1.HOLDS


def test_property1_preconditions():
    game = line_game([5, 9])
    away = Trajectory(((4.0, 2.0),))
    assert check_property1(game, (0, 0), 0, away) is Property1.NOT_APPLICABLE
    fractional = Trajectory(((5.5, 2.0),))
    assert check_property1(game, (0, 0), 0, fractional) is Property1.NOT_APPLICABLE


def test_property1_fails_for_off_axis_translates():
    # off-axis move that is closer yet shares fewer lattice cells
    grid = GridSpec(1.0, 30, 30, 1, (3.0,))
    a, b = Trajectory(((14.0, 14.0),)), Trajectory(((10.0, 10.0),))
    players = tuple(Player((Strategy(occupancy(tr, grid), 0, tr),)) for tr in (a, b))
    game = GameInstance(players, LevelCosts(((0, 1),)), grid)
    moved = Trajectory(((10.0, 15.0),))
    assert check_property1(game, (0, 0), 0, moved) is Property1.VIOLATED

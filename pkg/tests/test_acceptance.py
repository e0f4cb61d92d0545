"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with its measured
runtime.  Run directly (``python3 tests/test_acceptance.py``) for the
summary alone.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _random_games import random_game  # noqa: E402
from drivepoa import fixture_path  # noqa: E402
from drivepoa.bounds import (  # noqa: E402
    bound_at,
    g_profile,
    phi_root,
    poa_bound_base,
    poa_bound_refined,
    verify_smoothness,
)
from drivepoa.costs import LevelCosts  # noqa: E402
from drivepoa.game import (  # noqa: E402
    GameInstance,
    Player,
    Property1,
    Strategy,
    check_property1,
    player_costs,
    poa_check,
    price_of_anarchy,
    rosenthal_potential,
)
from drivepoa.grid import GridSpec, Trajectory, distance_at, occupancy  # noqa: E402
from drivepoa.scenarios import (  # noqa: E402
    build_scenario,
    example1_curves,
    example2_curves,
    multi_car_grid,
    co_occupancy,
    offset_removed,
    random_lattice_spec,
)
from drivepoa.serialization import load_scenario  # noqa: E402
from drivepoa.tables import ProfileTables  # noqa: E402

ALPHA_GRID = np.linspace(0.0, 20.0, 200)
DEGREES = (1, 2, 3, 4)


def _report(number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str) -> str:
    status = "PASS" if ok and elapsed < limit else "FAIL"
    return f"[{status}] criterion {number}: {title} ({elapsed:.2f}s / {limit:g}s) {detail}"


def _run(number, title, limit, body, capsys=None):
    start = time.perf_counter()
    ok, detail = body()
    elapsed = time.perf_counter() - start
    line = _report(number, title, ok, elapsed, limit, detail)
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok, elapsed, detail


# 1 ---------------------------------------------------------------------------


def criterion_bound_goldens():
    expected = {1: Fraction(5, 2), 2: Fraction(115, 12), 3: Fraction(1163, 28)}
    problems = []
    for d, value in expected.items():
        if abs(poa_bound_base(d) - float(value)) > 1e-9:
            problems.append(f"d={d}: {poa_bound_base(d)}")
        # independent route: k from the root, then the integer formula
        k = math.floor(phi_root(d))
        if bound_at(d, 0, k) != value:
            problems.append(f"d={d}: hand evaluation gives {bound_at(d, 0, k)}")
    return not problems, "; ".join(problems) or "5/2, 115/12, 1163/28"


# 2 ---------------------------------------------------------------------------


def criterion_refined_consistency():
    problems = []
    for d in DEGREES:
        base = poa_bound_base(d)
        values = [poa_bound_refined(d, a).bound for a in ALPHA_GRID]
        if abs(values[0] - base) > 1e-9:
            problems.append(f"d={d}: alpha=0 gives {values[0]}")
        if not all(b < a for a, b in zip(values, values[1:])):
            problems.append(f"d={d}: not strictly decreasing")
        if not all(v < base for v in values[1:]):
            problems.append(f"d={d}: not below base")
        far = poa_bound_refined(d, 1e6).bound
        if abs(far - 1) > 1e-4:
            problems.append(f"d={d}: alpha=1e6 gives {far}")
    return not problems, "; ".join(problems) or f"{len(DEGREES) * len(ALPHA_GRID)} grid points"


# 3 ---------------------------------------------------------------------------


def criterion_smoothness():
    problems = []
    for d in DEGREES:
        for a in ALPHA_GRID:
            r = poa_bound_refined(d, a)
            if not 0 < r.mu_tilde < 1 + a:
                problems.append(f"mu out of range at d={d}, alpha={a}")
            if r.lambda_tilde < 1:
                problems.append(f"lambda < 1 at d={d}, alpha={a}")
            check = verify_smoothness(d, a, r.lambda_tilde, r.mu_tilde, 50, 50)
            if not check:
                problems.append(f"violation {check.violation} at d={d}, alpha={a}")
            prof = g_profile(d, a, r.mu_tilde, max(50, r.k + 2), rtol=1e-9)
            if prof.argmax != (r.k, r.k + 1):
                problems.append(f"argmax {prof.argmax} != ({r.k}, {r.k + 1}) at d={d}, alpha={a}")
    return not problems, "; ".join(problems[:3]) or "no violations, ties at (k, k+1)"


# 4 ---------------------------------------------------------------------------


def criterion_exact_potential(n_games: int = 100, naive_samples: int = 30):
    rng = np.random.default_rng(2024)
    deviations = 0
    for g in range(n_games):
        game = random_game(rng, max_strategies=50)
        tables = ProfileTables(game)
        pot = tables.potential()
        # every unilateral deviation at once: Phi - J_i must not depend on s_i
        for i, n in enumerate(game.shape):
            diff = pot - tables.total(i)
            if not np.all(diff == diff.take([0], axis=i)):
                return False, f"game {g}: identity fails for player {i}"
            deviations += game.n_profiles * (n - 1)
        # and an exact-Fraction spot check that does not use the tables
        for _ in range(naive_samples):
            prof = tuple(int(rng.integers(n)) for n in game.shape)
            i = int(rng.integers(len(game.shape)))
            dev = prof[:i] + (int(rng.integers(game.shape[i])),) + prof[i + 1 :]
            d_phi = rosenthal_potential(game, dev) - rosenthal_potential(game, prof)
            d_j = player_costs(game, dev)[i].total - player_costs(game, prof)[i].total
            if d_phi != d_j:
                return False, f"game {g}: naive check fails at {prof} -> {dev}"
    return True, f"{n_games} games, {deviations} deviations"


# 5 ---------------------------------------------------------------------------

PROPERTY1_GRIDS = (
    (1.0, (0.4, 1.2, 2.2)),
    (0.5, (1.5, 3.5, 6.0)),
    (1.0, (1.0, 2.0, 3.0)),
)


def property1_cases(n_cases: int, seed: int = 7):
    """Random translate deviations that bring a player no farther from anyone."""
    rng = np.random.default_rng(seed)
    while True:
        cell, radii = PROPERTY1_GRIDS[int(rng.integers(len(PROPERTY1_GRIDS)))]
        horizon = int(rng.integers(1, 4))
        grid = GridSpec(cell, 60, 60, horizon, radii)
        n = int(rng.integers(2, 4))
        trajs = []
        for _ in range(n):
            start = rng.integers(22, 38, size=2)
            steps = rng.integers(-1, 2, size=(horizon, 2))
            steps[0] = 0
            cells = start + np.cumsum(steps, axis=0)
            trajs.append(Trajectory(tuple((float(x) * cell, float(y) * cell) for x, y in cells)))
        i = int(rng.integers(n))
        offsets = rng.integers(-3, 4, size=(horizon, 2))
        if not offsets.any():
            continue
        moved = trajs[i].translated([(float(dx) * cell, float(dy) * cell) for dx, dy in offsets])
        closer = all(
            distance_at(moved, trajs[j], t) <= distance_at(trajs[i], trajs[j], t) + 1e-9
            for j in range(n)
            if j != i
            for t in range(horizon)
        )
        if not closer:
            continue
        d = int(rng.integers(1, 4))
        weights = [Fraction(int(w), 4) for w in rng.integers(1, 9, size=len(radii))]
        players = tuple(Player((Strategy(occupancy(tr, grid), 0, tr),)) for tr in trajs)
        game = GameInstance(players, LevelCosts.monomials(weights, d), grid)
        yield game, i, moved
        n_cases -= 1
        if n_cases == 0:
            return


def criterion_property1(n_cases: int = 500):
    outcomes = {p: 0 for p in Property1}
    first = None
    for game, i, moved in property1_cases(n_cases):
        verdict = check_property1(game, (0,) * len(game.players), i, moved)
        outcomes[verdict] += 1
        if verdict is not Property1.HOLDS and first is None:
            first = (game.grid.radii, [tr.positions for tr in (s.trajectory for s in (p.strategies[0] for p in game.players))], i, moved.positions)
    ok = outcomes[Property1.HOLDS] == n_cases
    detail = ", ".join(f"{p.value}={c}" for p, c in outcomes.items())
    if first is not None:
        detail += f"; first counterexample radii={first[0]} player={first[2]} positions={first[1]} moved={first[3]}"
    return ok, detail


# 6 ---------------------------------------------------------------------------

PROFILE_LIMIT = 10**6


def lattice_instances(n_instances: int = 24, seed: int = 11):
    rng = np.random.default_rng(seed)
    layouts = [(kind, n) for kind in ("intersection", "merging") for n in (2, 3)]
    made = 0
    while made < n_instances:
        kind, n = layouts[made % len(layouts)]
        spec = random_lattice_spec(kind, n, rng)
        game = build_scenario(spec)
        if game.n_profiles > PROFILE_LIMIT:
            continue
        made += 1
        yield kind, spec, game


def criterion_end_to_end():
    rows = []
    multi_ne_intersection = False
    for kind, spec, game in lattice_instances():
        report = price_of_anarchy(game, cap=PROFILE_LIMIT)
        bound, ok = poa_check(report)
        poa = report.poa
        if poa == "undefined" or poa < 1 or not ok:
            return False, f"{kind} {game.shape}: PoA {poa} vs bound {bound}"
        if kind == "intersection" and len(report.nash_profiles) > 1:
            multi_ne_intersection = True
        rows.append((kind, game.shape, len(report.nash_profiles), float(poa), float(bound)))
    worst = max(rows, key=lambda r: r[3] / r[4])
    detail = (
        f"{len(rows)} scenarios; max PoA {max(r[3] for r in rows):.4f}; "
        f"tightest PoA/bound {worst[3]:.4f}/{worst[4]:.4f}; multi-NE intersection: {multi_ne_intersection}"
    )
    return multi_ne_intersection, detail


# 7 ---------------------------------------------------------------------------


def criterion_curves():
    problems = []
    cg1, cg2, cg3 = example1_curves()
    for table in (cg1, cg2, cg3):
        norm = table.normalized
        if norm[0] != 1:
            problems.append(f"{table.name} at 0 is {norm[0]}")
        if not all(b <= a for a, b in zip(norm, norm[1:])):
            problems.append(f"{table.name} not weakly decreasing")
        if any(r.normalized != 0 for r in table.rows if r.abscissa >= 12):
            problems.append(f"{table.name} nonzero beyond 12 m")
    for a, c in zip(cg1.rows, cg3.rows):
        if 3 < a.abscissa < 7 and not c.normalized < a.normalized:
            problems.append(f"cg3 not below cg1 at {a.abscissa} m")
    d1, d2, d3 = example2_curves()
    grid = multi_car_grid()
    weights = (Fraction(9, 10), Fraction(2, 5), Fraction(1, 5))
    offsets = ((3.0, 0.0), (-3.0, 0.0), (0.0, 3.0), (0.0, -3.0))
    for n, value in enumerate(offset_removed(d1)):
        if value != sum(w * c for w, c in zip(weights, co_occupancy(grid, offsets, n))):
            problems.append(f"d1 not linear in co-occupancy at {n} cars")
    for a, b, c in zip(offset_removed(d1), offset_removed(d2), offset_removed(d3)):
        if not c >= b >= a:
            problems.append("degree ordering broken")
    return not problems, "; ".join(problems) or "3 two-car curves, 3 multi-car curves"


# 8 ---------------------------------------------------------------------------


def criterion_fixture():
    game = build_scenario(load_scenario(fixture_path("ab_game.json")))
    report = price_of_anarchy(game)
    bound, ok = poa_check(report)
    good = (
        len(report.nash_profiles) == 3
        and report.worst_ne_cost == 4
        and report.best_cost == 3
        and report.poa == Fraction(4, 3)
        and bound == Fraction(5, 2)
        and ok
    )
    return good, f"NE={len(report.nash_profiles)}, worst={report.worst_ne_cost}, opt={report.best_cost}, PoA={report.poa} <= {bound}"


CRITERIA = [
    (1, "bound golden values", 1.0, criterion_bound_goldens),
    (2, "refined-bound consistency", 1.0, criterion_refined_consistency),
    (3, "smoothness verification", 10.0, criterion_smoothness),
    (4, "exact potential on 100 random games", 30.0, criterion_exact_potential),
    (5, "Property 1 on 500 translate deviations", 30.0, criterion_property1),
    (6, "end-to-end PoA vs bound on lattice scenarios", 600.0, criterion_end_to_end),
    (7, "curve reproduction", 5.0, criterion_curves),
    (8, "pedagogical A/B fixture", 1.0, criterion_fixture),
]


@pytest.mark.parametrize("number,title,limit,body", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_acceptance(number, title, limit, body, capsys):
    ok, elapsed, detail = _run(number, title, limit, body, capsys)
    assert ok, detail
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"


if __name__ == "__main__":
    results = [_run(*c[:3], c[3])[0] for c in CRITERIA]
    sys.exit(0 if all(results) else 1)

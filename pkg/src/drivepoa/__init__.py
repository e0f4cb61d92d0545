"""Price of Anarchy tooling for driving games cast as congestion games.

Trajectories occupy cells of a space x time x proximity-level grid; the
congestion cost of a resource depends on how many cars use it.  The package
builds such games, solves them exactly, and evaluates the analytic PoA bounds
that depend on the polynomial degree of the load costs and on the
personal-to-congestion cost ratio.
"""

from importlib import resources

from .bounds import (
    BoundResult,
    g_profile,
    phi_root,
    poa_bound_base,
    poa_bound_exact,
    poa_bound_refined,
    psi_root,
    smoothness_constants,
    verify_smoothness,
)
from .costs import (
    AnalyticProximitySpec,
    LevelCosts,
    LoadPolynomial,
    PersonalCostSpec,
    analytic_proximity_cost,
    congestion_cost,
    personal_cost,
    poly_eval,
)
from .game import (
    EquilibriumReport,
    GameInstance,
    Player,
    Strategy,
    better_response,
    check_property1,
    empirical_alpha_star,
    enumerate_nash,
    is_nash,
    price_of_anarchy,
    rosenthal_potential,
    social_optima,
)
from .grid import Footprint, GridSpec, ResourceId, Trajectory, distance_at, load_map, occupancy
from .scenarios import (
    CurveTable,
    ScenarioSpec,
    build_scenario,
    enumerate_trajectories,
    multi_car_curve,
    two_car_curve,
)

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path of a scenario file shipped with the package (e.g. ``"ab_game.json"``)."""
    return resources.files(__name__) / "fixtures" / name

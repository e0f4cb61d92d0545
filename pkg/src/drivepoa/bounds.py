"""Price-of-Anarchy bounds for polynomial congestion games with personal costs.

The bound for degree ``d`` and personal-to-congestion ratio ``alpha`` is

    ((k+1)^(2d+1) - k^(d+1) (k+2)^d + alpha ((k+1)^(d+1) - k^(d+1)))
    / ((1+alpha) ((k+1)^(d+1) - k^(d+1)) - (k+2)^d + (k+1)^d)

with ``k`` the floor of the positive root of
``(1+alpha) x^(d+1) = (x+1)^d + alpha``.  ``alpha = 0`` gives the classical
bound for polynomial congestion games.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

ROOT_XTOL = 1e-12
INTEGRAL_ROOT_TOL = 1e-9
SMOOTHNESS_RTOL = 1e-9


def _check(d: int, alpha: float) -> None:
    if not isinstance(d, int) or d < 1:
        raise ValueError(f"degree must be an integer >= 1, got {d!r}")
    if not alpha >= 0:
        raise ValueError(f"alpha_star must be non-negative, got {alpha!r}")


def root_residual(x: float, d: int, alpha: float = 0.0) -> float:
    """``(1+alpha) x^(d+1) - (x+1)^d - alpha``, arranged to avoid cancellation near 1."""
    # alpha (x^(d+1) - 1) stays accurate when alpha is huge and x ~ 1
    return alpha * math.expm1((d + 1) * math.log(x)) + x ** (d + 1) - (x + 1) ** d


def _bisect(f, lo: float, hi: float, xtol: float) -> float:
    flo = f(lo)
    if flo == 0:
        return lo
    if flo * f(hi) > 0:
        raise ValueError("root is not bracketed")
    while hi - lo > xtol * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def psi_root(d: int, alpha_star: float = 0.0) -> float:
    """Positive root of ``(1+alpha) x^(d+1) = (x+1)^d + alpha``.

    The residual is negative at x = 1 (it equals 1 - 2^d) and positive at
    ``2^d + 2``, so bisection on that bracket always converges.
    """
    _check(d, alpha_star)
    alpha = float(alpha_star)
    f = lambda x: root_residual(x, d, alpha)  # noqa: E731
    x = _bisect(f, 1.0, 2.0**d + 2.0, ROOT_XTOL)
    # a few Newton steps to land on the best representable root
    for _ in range(3):
        deriv = (1 + alpha) * (d + 1) * x**d - d * (x + 1) ** (d - 1)
        step = f(x) / deriv
        if not math.isfinite(step) or abs(step) > 1e-9:
            break
        x -= step
    return x


def phi_root(d: int) -> float:
    """Positive root of ``(x+1)^d = x^(d+1)``."""
    return psi_root(d, 0.0)


def _terms(d: int, k: int) -> tuple[int, int, int, int]:
    """Exact integer building blocks of the bound at integer ``k``."""
    top = (k + 1) ** (2 * d + 1) - k ** (d + 1) * (k + 2) ** d
    span = (k + 1) ** (d + 1) - k ** (d + 1)
    rise = (k + 2) ** d - (k + 1) ** d
    return top, span, rise, (k + 1) ** d


def bound_at(d: int, alpha_star, k: int):
    """Bound expression evaluated at a given integer ``k``.

    Exact (``Fraction``) when ``alpha_star`` is a Fraction or int, float otherwise.
    """
    top, span, rise, _ = _terms(d, k)
    num = top + alpha_star * span
    den = (1 + alpha_star) * span - rise
    if isinstance(num, int) and isinstance(den, int):
        return Fraction(num, den)
    return num / den


def _candidate_ks(root: float) -> list[int]:
    nearest = round(root)
    if abs(root - nearest) < INTEGRAL_ROOT_TOL:
        return [k for k in (nearest - 1, nearest) if k >= 0]
    return [math.floor(root)]


def _pick_k(d: int, alpha: float, root: float) -> int:
    ks = _candidate_ks(root)
    return max(ks, key=lambda k: bound_at(d, alpha, k))


def poa_bound_base(d: int) -> float:
    """Classical PoA bound for degree-``d`` polynomial congestion games."""
    return poa_bound_refined(d, 0.0).bound


@dataclass(frozen=True)
class BoundResult:
    d: int
    alpha_star: float
    root: float
    k: int
    lambda_tilde: float
    mu_tilde: float
    bound: float

    @property
    def lam(self) -> float:
        """Smoothness ``lambda`` of the original game."""
        return (self.lambda_tilde + self.alpha_star) / (1 + self.alpha_star)

    @property
    def mu(self) -> float:
        return self.mu_tilde / (1 + self.alpha_star)


def _constants(d: int, k: int) -> tuple[float, float]:
    _, span, rise, lead = _terms(d, k)
    mu = Fraction(rise, span)
    lam = lead - mu * k ** (d + 1)
    return float(lam), float(mu)


def poa_bound_refined(d: int, alpha_star: float = 0.0) -> BoundResult:
    _check(d, alpha_star)
    alpha = float(alpha_star)
    root = psi_root(d, alpha)
    k = _pick_k(d, alpha, root)
    lam, mu = _constants(d, k)
    return BoundResult(d, alpha, root, k, lam, mu, float(bound_at(d, alpha, k)))


def smoothness_constants(d: int, alpha_star: float = 0.0) -> tuple[float, float]:
    """``(lambda~*, mu~*)``: the tie point of g at k and k+1 and the induced lambda."""
    r = poa_bound_refined(d, alpha_star)
    return r.lambda_tilde, r.mu_tilde


def exact_k(d: int, alpha_star: Fraction) -> list[int]:
    """Floor of the root for rational ``alpha``, decided by exact sign tests.

    Returns two candidates when the root is an integer.
    """
    alpha = Fraction(alpha_star)

    def f(x: int) -> Fraction:
        return (1 + alpha) * x ** (d + 1) - (x + 1) ** d - alpha

    k = 1  # f(1) = 1 - 2^d < 0
    while f(k + 1) <= 0:
        k += 1
    return [k - 1, k] if f(k) == 0 else [k]


def poa_bound_exact(d: int, alpha_star) -> Fraction:
    """Exact refined bound for rational ``alpha_star`` (degree 0 games are decoupled: 1)."""
    alpha = Fraction(alpha_star)
    if alpha < 0:
        raise ValueError("alpha_star must be non-negative")
    if d == 0:
        return Fraction(1)
    _check(d, 0.0)
    return max(bound_at(d, alpha, k) for k in exact_k(d, alpha))


def bound_for_game(d: int, alpha_star) -> Fraction:
    """Bound to compare a game's PoA against; an unconstrained alpha gives 1."""
    if alpha_star == "infinite":
        return Fraction(1)
    return poa_bound_exact(d, alpha_star)


class Violation(NamedTuple):
    x: int
    y: int
    r: int
    lhs: float
    rhs: float


class SmoothnessCheck(NamedTuple):
    ok: bool
    violation: Violation | None

    def __bool__(self) -> bool:
        return self.ok


def smoothness_violations(d: int, lam: float, mu: float, x_max: int, y_max: int):
    """All ``(x, y, r)`` with ``y (x+1)^r > lam y^(r+1) + mu x^(r+1)``.

    Scanned in x, then y, then r order.  Equality (within a relative
    ``SMOOTHNESS_RTOL``) is not a violation; y = 0 is trivially satisfied.
    """
    if x_max < 0 or y_max < 1:
        raise ValueError("need x_max >= 0 and y_max >= 1")
    for x in range(x_max + 1):
        for y in range(1, y_max + 1):
            for r in range(d + 1):
                lhs = float(y * (x + 1) ** r)
                rhs = lam * float(y ** (r + 1)) + mu * float(x ** (r + 1))
                if lhs > rhs + SMOOTHNESS_RTOL * max(1.0, abs(lhs)):
                    yield Violation(x, y, r, lhs, rhs)


def verify_smoothness(
    d: int, alpha_star: float, lam: float, mu: float, x_max: int = 50, y_max: int = 50
) -> SmoothnessCheck:
    """Check the load-level smoothness inequality for every monomial of degree <= d.

    Same test and scan order as ``smoothness_violations``, vectorized.
    """
    _check(d, alpha_star)
    if x_max < 0 or y_max < 1:
        raise ValueError("need x_max >= 0 and y_max >= 1")
    x = np.arange(x_max + 1, dtype=np.float64)[:, None, None]
    y = np.arange(1, y_max + 1, dtype=np.float64)[None, :, None]
    r = np.arange(d + 1)[None, None, :]
    lhs = y * (x + 1) ** r
    rhs = lam * y ** (r + 1) + mu * x ** (r + 1)
    bad = lhs > rhs + SMOOTHNESS_RTOL * np.maximum(1.0, np.abs(lhs))
    if not bad.any():
        return SmoothnessCheck(True, None)
    ix, iy, ir = (int(v) for v in np.argwhere(bad)[0])
    return SmoothnessCheck(False, Violation(ix, iy + 1, ir, float(lhs[ix, iy, ir]), float(rhs[ix, iy, ir])))


@dataclass(frozen=True)
class GProfile:
    values: tuple[float, ...]
    argmax: tuple[int, ...]


def g_value(d: int, alpha_star: float, mu: float, x: float) -> float:
    return ((x + 1) ** d - mu * x ** (d + 1) + alpha_star) / (1 - mu + alpha_star)


def g_profile(d: int, alpha_star: float, mu: float, x_max: int, rtol: float = 1e-9) -> GProfile:
    """``g(mu, x)`` for integer x in [0, x_max] and every x attaining the max."""
    _check(d, alpha_star)
    if not 0 < mu < 1 + alpha_star:
        raise ValueError("mu must lie in (0, 1 + alpha_star)")
    values = tuple(g_value(d, alpha_star, mu, x) for x in range(x_max + 1))
    top = max(values)
    tol = rtol * max(1.0, abs(top))
    return GProfile(values, tuple(x for x, v in enumerate(values) if top - v <= tol))


def bound_sweep(degrees, alphas) -> list[BoundResult]:
    return [poa_bound_refined(d, a) for d in degrees for a in alphas]

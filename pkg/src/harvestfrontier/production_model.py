"""Parametric joint-production model of arboreal and ground harvests.

Populations grow as ``N_A(t) = exp((alpha - a**exp_a * s) t)`` and
``N_G(t) = exp((gamma - g**exp_g * (labor - s)) t)``. The production
possibilities frontier is the zero-net-growth level set of the log of their
product::

    a**exp_a * s + g**exp_g * (labor - s) == alpha + gamma

Rates ``a`` (arboreal) and ``g`` (ground) are per year; ``g`` is the
vertical axis throughout, so slopes are ``dg/da``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import BracketError, HarvestError, InfeasibleRateError, SingularSlopeError
from .market_data import PriceSystem

BISECTION_WIDTH = 1e-12


@dataclass(frozen=True)
class ProductionParams:
    alpha: float
    gamma: float
    s: float
    labor: float = 1.0
    exp_a: float = 2.0
    exp_g: float = 1.9

    def __post_init__(self):
        if not 0 <= self.s < 1:
            raise HarvestError(f"s must lie in [0, 1), got {self.s}")
        if self.labor <= 0:
            raise HarvestError(f"labor must be positive, got {self.labor}")
        if self.labor <= self.s:
            raise HarvestError("labor must exceed s")
        if self.exp_a <= 1 or self.exp_g <= 1:
            raise HarvestError("harvest exponents must exceed 1")
        if self.alpha < 0 or self.gamma < 0:
            raise HarvestError("growth rates must be nonnegative")

    @property
    def capacity(self) -> float:
        """alpha + gamma: total pressure the frontier can absorb."""
        return self.alpha + self.gamma


@dataclass(frozen=True)
class HarvestRates:
    a: float
    g: float

    def __post_init__(self):
        if self.a < 0 or self.g < 0:
            raise HarvestError("harvest rates must be nonnegative")


@dataclass(frozen=True)
class PopulationPath:
    times: tuple[float, ...]
    arboreal_index: tuple[float, ...]
    ground_index: tuple[float, ...]


class TangencyPoint(NamedTuple):
    a: float
    g: float
    revenue: float
    corner: bool

    @property
    def rates(self) -> HarvestRates:
        return HarvestRates(self.a, self.g)


def arboreal_pressure(params: ProductionParams, rates: HarvestRates) -> float:
    return rates.a ** params.exp_a * params.s


def ground_pressure(params: ProductionParams, rates: HarvestRates) -> float:
    return rates.g ** params.exp_g * (params.labor - params.s)


def frontier_intercept(params: ProductionParams) -> float:
    """Largest feasible arboreal rate (where the frontier meets the a-axis)."""
    if params.s == 0:
        return math.inf
    return (params.capacity / params.s) ** (1.0 / params.exp_a)


def ppf_ground(a: float, params: ProductionParams) -> float:
    """Ground rate on the frontier for arboreal rate ``a``."""
    if a < 0:
        raise InfeasibleRateError(f"infeasible arboreal rate {a}: negative")
    remaining = params.capacity - a ** params.exp_a * params.s
    if remaining < 0:
        # rounding at the intercept itself
        if remaining >= -1e-15 * max(params.capacity, 1e-300):
            return 0.0
        raise InfeasibleRateError(
            f"infeasible arboreal rate {a}: beyond the frontier intercept {frontier_intercept(params)}")
    return (remaining / (params.labor - params.s)) ** (1.0 / params.exp_g)


def mrt(a: float, g: float, params: ProductionParams) -> float:
    """Slope dg/da of the frontier through (a, g)."""
    if a < 0:
        raise HarvestError("arboreal rate must be nonnegative")
    if g <= 0:
        raise SingularSlopeError(f"slope singular at axis (g = {g})")
    return (-(params.exp_a / params.exp_g) * a ** (params.exp_a - 1) * params.s
            / (g ** (params.exp_g - 1) * (params.labor - params.s)))


def population_path(params: ProductionParams, rates: HarvestRates,
                    times: Sequence[float]) -> PopulationPath:
    times = tuple(float(t) for t in times)
    if times and times[0] < 0:
        raise HarvestError("times must start at or after 0")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise HarvestError("times must be strictly increasing")
    net_a = params.alpha - arboreal_pressure(params, rates)
    net_g = params.gamma - ground_pressure(params, rates)
    return PopulationPath(
        times=times,
        arboreal_index=tuple(math.exp(net_a * t) for t in times),
        ground_index=tuple(math.exp(net_g * t) for t in times),
    )


def is_sustainable(params: ProductionParams, rates: HarvestRates) -> tuple[bool, bool]:
    """(arboreal_ok, ground_ok): neither population declines."""
    return (params.alpha >= arboreal_pressure(params, rates),
            params.gamma >= ground_pressure(params, rates))


def _bisect(fn, lo, hi, width=BISECTION_WIDTH):
    """Root of a decreasing ``fn`` with fn(lo) > 0 > fn(hi)."""
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def parametric_tangency(params: ProductionParams, prices: PriceSystem) -> TangencyPoint:
    """Revenue-maximizing frontier point for the given unit prices.

    Solves ``mrt(a, ppf_ground(a)) == -p_arboreal / p_ground`` by bisection on
    ``[0, intercept]``.
    """
    if params.s == 0:
        raise HarvestError("tangency needs 0 < s < 1; with s = 0 arboreal output is unbounded")
    a_max = frontier_intercept(params)
    if a_max == 0:
        return TangencyPoint(0.0, 0.0, 0.0, True)
    slope_target = prices.p_arboreal / prices.p_ground

    def excess_slope(a):
        g = ppf_ground(a, params)
        if g <= 0:
            return -math.inf
        return mrt(a, g, params) + slope_target

    f_lo, f_hi = excess_slope(0.0), excess_slope(a_max)
    if not f_lo > 0 > f_hi:
        raise BracketError(f"tangency not bracketed: f(0) = {f_lo}, f({a_max}) = {f_hi}")
    a_star = _bisect(excess_slope, 0.0, a_max)
    g_star = ppf_ground(a_star, params)
    return TangencyPoint(a_star, g_star, prices.p_arboreal * a_star + prices.p_ground * g_star, False)


def ppf_curve(params: ProductionParams, n: int = 200) -> list[tuple[float, float]]:
    """``n`` points along the frontier from the g-intercept to the a-intercept."""
    a_max = frontier_intercept(params)
    if not math.isfinite(a_max):
        raise HarvestError("frontier has no a-intercept when s = 0")
    return [(a, ppf_ground(a, params)) for a in (a_max * i / (n - 1) for i in range(n))]


def radial_frontier_point(params: ProductionParams, direction: tuple[float, float]) -> tuple[float, float]:
    """Where the ray from the origin through ``direction`` (a, g) meets the frontier."""
    da, dg = direction
    if da < 0 or dg < 0 or da == dg == 0:
        raise HarvestError("direction must be a nonzero nonnegative (a, g) pair")
    if params.capacity == 0:
        return 0.0, 0.0

    def slack(lam):
        return params.capacity - ((lam * da) ** params.exp_a * params.s
                                  + (lam * dg) ** params.exp_g * (params.labor - params.s))

    hi = 1.0
    while slack(hi) > 0:
        hi *= 2.0
        if hi > 1e300:
            raise BracketError("ray never reaches the frontier")
    lam = _bisect(slack, 0.0, hi, width=1e-15 * hi)
    return lam * da, lam * dg


def frontier_contains(outer: ProductionParams, inner: ProductionParams, n: int = 200) -> bool:
    """True when ``inner``'s frontier lies on or inside ``outer``'s.

    Used to compare a myopic frontier with a sustainable one; checked on an
    ``n``-point grid over the inner frontier.
    """
    inner_max = frontier_intercept(inner)
    if inner_max > frontier_intercept(outer):
        return False
    for a, g in ppf_curve(inner, n):
        try:
            if g > ppf_ground(a, outer) * (1 + 1e-12):
                return False
        except InfeasibleRateError:
            return False
    return True

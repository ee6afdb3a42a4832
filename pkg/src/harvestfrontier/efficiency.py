"""Empirical frontier, radial projection and revenue-inefficiency decomposition.

A frontier is the north-east convex boundary of a cloud of daily takeoff
points in the (arboreal, ground) plane, anchored on both axes. Each day is
expanded along its ray from the origin until it meets the frontier; the
revenue gained is technical inefficiency, and the further gain from moving
along the frontier to the revenue-maximizing vertex is allocative
inefficiency.
"""

from __future__ import annotations

import datetime as dt
import math
import statistics
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    BeyondFrontierError, DegenerateFrontierError, HarvestError, RayUndefinedError, ScaleOverflowError,
)
from .market_data import DailyTakeoff, PriceSystem

Point = tuple[float, float]

POOLINGS = ("region-year", "region", "all")


@dataclass(frozen=True)
class TakeoffPoint:
    a_qty: float
    g_qty: float
    date: dt.date | None = None
    region: str | None = None

    def __post_init__(self):
        a, g = float(self.a_qty), float(self.g_qty)
        if not (math.isfinite(a) and math.isfinite(g)) or a < 0 or g < 0:
            raise HarvestError(f"takeoff quantities must be finite and nonnegative, got ({a}, {g})")
        object.__setattr__(self, "a_qty", a)
        object.__setattr__(self, "g_qty", g)

    @property
    def xy(self) -> Point:
        return (self.a_qty, self.g_qty)

    @classmethod
    def from_daily(cls, day: DailyTakeoff) -> "TakeoffPoint":
        return cls(float(day.arboreal_kg), float(day.ground_kg), day.date, day.region)


def _pow2_scale(x: float) -> float:
    return math.ldexp(1.0, math.frexp(x)[1]) if x > 0 else 1.0


def _orient(o: Point, p: Point, q: Point) -> int:
    """Sign of the cross product (p - o) x (q - o), exact when it is close to zero."""
    t1 = (p[0] - o[0]) * (q[1] - o[1])
    t2 = (p[1] - o[1]) * (q[0] - o[0])
    det = t1 - t2
    if abs(det) > 1e-12 * (abs(t1) + abs(t2)):
        return 1 if det > 0 else -1
    fo = [Fraction(c) for c in o]
    exact = ((Fraction(p[0]) - fo[0]) * (Fraction(q[1]) - fo[1])
             - (Fraction(p[1]) - fo[1]) * (Fraction(q[0]) - fo[0]))
    return (exact > 0) - (exact < 0)


@dataclass(frozen=True)
class Frontier:
    """Convex chain from (0, g_max) to (a_max, 0), ordered by increasing a.

    The first edge may be horizontal and the last vertical (the axis anchors);
    every other edge strictly decreases g while increasing a.
    """

    vertices: tuple[Point, ...]
    region: str | None = None
    year: int | None = None
    n_points: int = 0

    def __post_init__(self):
        verts = tuple((float(a), float(g)) for a, g in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise DegenerateFrontierError("frontier needs at least two vertices")
        if verts[0][0] != 0 or verts[-1][1] != 0:
            raise DegenerateFrontierError("frontier must start on the g-axis and end on the a-axis")
        if verts[0] == verts[-1]:
            raise DegenerateFrontierError("degenerate frontier")
        last = len(verts) - 2
        for i, ((a0, g0), (a1, g1)) in enumerate(zip(verts, verts[1:])):
            a_ok = a1 > a0 or (a1 == a0 and i == last)
            g_ok = g1 < g0 or (g1 == g0 and i == 0)
            if not (a_ok and g_ok) or (a1, g1) == (a0, g0):
                raise DegenerateFrontierError(f"frontier not monotone at vertex {i + 1}: {verts[i + 1]}")
        for i in range(len(verts) - 2):
            if _orient(verts[i], verts[i + 1], verts[i + 2]) >= 0:
                raise DegenerateFrontierError(f"frontier not strictly convex at vertex {i + 1}")

    @property
    def scale(self) -> float:
        """Power of two at or above the largest coordinate (exact to divide by)."""
        return _pow2_scale(max(self.a_max, self.g_max))

    @cached_property
    def unit_vertices(self) -> tuple[Point, ...]:
        """Vertices divided by :attr:`scale`."""
        k = self.scale
        return tuple((a / k, g / k) for a, g in self.vertices)

    @property
    def a_max(self) -> float:
        return self.vertices[-1][0]

    @property
    def g_max(self) -> float:
        return self.vertices[0][1]

    def contains(self, point: Point) -> bool:
        """True if ``point`` lies inside or on the region under the chain."""
        a, g = point
        if a < 0 or g < 0:
            return False
        if a == 0 and g == 0:
            return True
        try:
            _, theta = radial_project(TakeoffPoint(a, g), self)
        except BeyondFrontierError:
            return False
        except ScaleOverflowError:
            return True
        return theta >= 1


def _as_xy(p) -> Point:
    if isinstance(p, TakeoffPoint):
        return p.xy
    a, g = p
    return float(a), float(g)


def build_frontier(points: Iterable, region: str | None = None,
                   year: int | None = None) -> Frontier:
    """Upper-right convex hull of ``points`` plus the two axis anchors.

    ``points`` may be :class:`TakeoffPoint` values or (a, g) pairs. Points on
    the interior of a hull edge are dropped.
    """
    xy = []
    for p in points:
        a, g = _as_xy(p)
        if not (math.isfinite(a) and math.isfinite(g)) or a < 0 or g < 0:
            raise HarvestError(f"takeoff quantities must be finite and nonnegative, got ({a}, {g})")
        xy.append((a, g))
    if not xy or all(a == 0 and g == 0 for a, g in xy):
        raise DegenerateFrontierError("degenerate frontier: no point with positive biomass")
    a_max = max(a for a, _ in xy)
    g_max = max(g for _, g in xy)
    candidates = {p for p in xy if p != (0.0, 0.0)}
    candidates.update({(0.0, g_max), (a_max, 0.0)})
    chain: list[Point] = []
    for p in sorted(candidates, key=lambda p: (p[0], -p[1])):
        while len(chain) >= 2 and _orient(chain[-2], chain[-1], p) >= 0:
            chain.pop()
        chain.append(p)
    return Frontier(tuple(chain), region=region, year=year, n_points=len(xy))


# Scaled coordinates at least this large keep every product in the float walk
# normal; anything smaller (or a wider gap between ray and frontier scales)
# goes through the exact rational walk instead.
_FLOAT_RANGE = 2.0 ** -400


def _exact_orient(o, p, q) -> int:
    det = (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
    return (det > 0) - (det < 0)


def _walk(d, verts, orient):
    """Ray scale ``lam`` with ``lam * d`` on the chain ``verts``, or None if the ray misses."""
    origin = (0 * d[0], 0 * d[0])
    prev = None
    for i, v in enumerate(verts):
        if v == origin:
            continue
        side = orient(origin, v, d)  # > 0: v is clockwise of the ray
        if side == 0 and ((v[0] > 0 and d[0] > 0) or (v[1] > 0 and d[1] > 0)):
            return (v[0] * d[0] + v[1] * d[1]) / (d[0] * d[0] + d[1] * d[1])
        if side > 0:
            if prev is None:
                raise BeyondFrontierError("point beyond frontier: ray misses the chain")
            v0 = verts[prev]
            ea, eg = v[0] - v0[0], v[1] - v0[1]
            return (v0[0] * eg - v0[1] * ea) / (d[0] * eg - d[1] * ea)
        prev = i
    return None


def _in_float_range(values) -> bool:
    return all(x == 0 or x >= _FLOAT_RANGE for x in values)


def radial_project(point, frontier: Frontier) -> tuple[Point, float]:
    """Scale ``point`` along its ray from the origin onto the frontier.

    Returns ``((a, g), theta)`` with the projection equal to ``theta * point``.
    Raises :class:`BeyondFrontierError` for a point outside the frontier.
    """
    da, dg = _as_xy(point)
    if da == 0 and dg == 0:
        raise RayUndefinedError("ray undefined for the origin")
    # unit-scale copies keep the float products away from under- and overflow
    d_scale = _pow2_scale(max(da, dg))
    d = (da / d_scale, dg / d_scale)
    ratio = frontier.scale / d_scale
    verts = frontier.unit_vertices
    if (_FLOAT_RANGE <= ratio <= 1 / _FLOAT_RANGE and _in_float_range(d)
            and _in_float_range(c for v in verts for c in v)):
        lam = _walk(d, verts, _orient)
        if lam is not None:
            lam = lam * ratio
    else:
        lam = _walk((Fraction(da), Fraction(dg)),
                    [(Fraction(a), Fraction(g)) for a, g in frontier.vertices], _exact_orient)
        if lam is not None:
            try:
                lam = float(lam)
            except OverflowError:
                raise ScaleOverflowError(f"projection scale overflows for ({da}, {dg})") from None
    if lam is None:
        raise BeyondFrontierError(f"point beyond frontier: ray through ({da}, {dg}) misses the chain")
    if abs(lam - 1.0) <= 1e-12:
        lam = 1.0
    elif lam < 1:
        raise BeyondFrontierError(f"point beyond frontier: ({da}, {dg}) lies outside (theta = {lam})")
    projected = (lam * da, lam * dg)
    if not (math.isfinite(lam) and math.isfinite(projected[0]) and math.isfinite(projected[1])):
        raise ScaleOverflowError(f"projection scale overflows for ({da}, {dg})")
    return projected, lam


def revenue(point, prices: PriceSystem) -> float:
    a, g = _as_xy(point)
    return prices.p_ground * g + prices.p_arboreal * a


def optimal_point(frontier: Frontier, prices: PriceSystem) -> Point:
    """Revenue-maximizing frontier vertex; ties go to the larger g."""
    revenues = [revenue(v, prices) for v in frontier.vertices]
    top = max(revenues)
    tol = 1e-12 * abs(top)
    # vertices are ordered by decreasing g, so the first near-maximal one wins ties
    for v, r in zip(frontier.vertices, revenues):
        if r >= top - tol:
            return v
    raise AssertionError("unreachable")


def revenue_gaps(observed_revenue: float, projected_revenue: float,
                 optimal_revenue: float) -> tuple[float, float]:
    """(technical, allocative) losses from the three revenue levels."""
    return projected_revenue - observed_revenue, optimal_revenue - projected_revenue


@dataclass(frozen=True)
class EfficiencyDecomposition:
    observed: TakeoffPoint
    projected: Point
    scale: float
    optimal: Point
    technical_loss: float
    allocative_loss: float
    observed_revenue: float
    projected_revenue: float
    optimal_revenue: float

    @property
    def technical_loss_kg(self) -> float:
        return (self.scale - 1.0) * (self.observed.a_qty + self.observed.g_qty)

    @property
    def allocative_loss_kg(self) -> float:
        """Biomass difference between the optimal and projected points (may be negative)."""
        return sum(self.optimal) - sum(self.projected)


def decompose_day(point, frontier: Frontier, prices: PriceSystem,
                  optimum: Point | None = None) -> EfficiencyDecomposition:
    if not isinstance(point, TakeoffPoint):
        point = TakeoffPoint(*_as_xy(point))
    projected, theta = radial_project(point, frontier)
    if optimum is None:
        optimum = optimal_point(frontier, prices)
    r_obs = revenue(point, prices)
    r_proj = revenue(projected, prices)
    r_opt = revenue(optimum, prices)
    technical = (theta - 1.0) * r_obs
    # the projection sits on an edge, so it cannot out-earn the best vertex; clamp rounding
    allocative = max(r_opt - r_proj, 0.0)
    return EfficiencyDecomposition(
        observed=point, projected=projected, scale=theta, optimal=optimum,
        technical_loss=technical, allocative_loss=allocative,
        observed_revenue=r_obs, projected_revenue=r_proj, optimal_revenue=r_opt,
    )


@dataclass(frozen=True)
class RegionYearSummary:
    region: str | None
    year: int | None
    n_days: int
    mean_technical: float
    sd_technical: float | None
    mean_allocative: float
    sd_allocative: float | None
    t_technical: float | None
    t_allocative: float | None


@dataclass
class BatchResult:
    decompositions: dict[tuple, list[EfficiencyDecomposition]]
    summaries: list[RegionYearSummary]
    frontiers: dict[tuple, Frontier]
    excluded: dict[tuple, int]


def group_key(point: TakeoffPoint, pooling: str = "region-year") -> tuple:
    if pooling == "region-year":
        return (point.region, point.date.year if point.date else None)
    if pooling == "region":
        return (point.region, None)
    if pooling == "all":
        return (None, None)
    raise HarvestError(f"unknown pooling {pooling!r}; expected one of {', '.join(POOLINGS)}")


def _sort_key(key):
    region, year = key
    return ("" if region is None else region, -1 if year is None else year)


def _moments(values):
    n = len(values)
    mean = statistics.fmean(values)
    if n < 2:
        return mean, None, None
    sd = statistics.stdev(values)
    t = mean / (sd / math.sqrt(n)) if sd > 0 else None
    return mean, sd, t


def summarize(key, decomps: Sequence[EfficiencyDecomposition]) -> RegionYearSummary:
    tech = [d.technical_loss for d in decomps]
    alloc = [d.allocative_loss for d in decomps]
    mt, st, tt = _moments(tech)
    ma, sa, ta = _moments(alloc)
    return RegionYearSummary(region=key[0], year=key[1], n_days=len(decomps),
                             mean_technical=mt, sd_technical=st,
                             mean_allocative=ma, sd_allocative=sa,
                             t_technical=tt, t_allocative=ta)


PriceSpec = Union[PriceSystem, Mapping[tuple, PriceSystem]]


def analyze(days: Iterable[TakeoffPoint], prices: PriceSpec,
            pooling: str = "region-year") -> BatchResult:
    """Per-group frontiers, per-day decompositions and summaries.

    ``prices`` is one :class:`PriceSystem` for every group or a mapping from
    group key ``(region, year)`` to prices. Days with zero total biomass are
    left out of the decomposition and counted in ``excluded``.
    """
    groups = defaultdict(list)
    excluded = defaultdict(int)
    for p in days:
        key = group_key(p, pooling)
        if p.a_qty == 0 and p.g_qty == 0:
            excluded[key] += 1
        else:
            groups[key].append(p)
    decompositions, frontiers, summaries = {}, {}, []
    for key in sorted(groups, key=_sort_key):
        group_prices = prices if isinstance(prices, PriceSystem) else prices.get(key)
        if group_prices is None:
            raise HarvestError(f"no prices for group {key}")
        frontier = build_frontier(groups[key], region=key[0], year=key[1])
        optimum = optimal_point(frontier, group_prices)
        decomps = [decompose_day(p, frontier, group_prices, optimum) for p in groups[key]]
        frontiers[key] = frontier
        decompositions[key] = decomps
        summaries.append(summarize(key, decomps))
    return BatchResult(decompositions, summaries, frontiers, dict(sorted(excluded.items(), key=lambda kv: _sort_key(kv[0]))))


def batch_summarize(days: Iterable[TakeoffPoint], prices: PriceSpec,
                    pooling: str = "region-year") -> list[RegionYearSummary]:
    return analyze(days, prices, pooling).summaries

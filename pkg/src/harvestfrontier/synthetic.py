"""Seeded synthetic takeoff corpora with a known frontier and known revenue gaps.

Used to check that the empirical frontier recovers a constructed mean
technical inefficiency when the true frontier is smooth and only sampled.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from .efficiency import TakeoffPoint, revenue
from .market_data import PriceSystem
from .production_model import ProductionParams, radial_frontier_point


@dataclass(frozen=True)
class SyntheticCorpus:
    days: tuple[TakeoffPoint, ...]
    true_frontier_points: tuple[tuple[float, float], ...]
    true_gaps: tuple[float, ...]

    @property
    def mean_true_gap(self) -> float:
        return math.fsum(self.true_gaps) / len(self.true_gaps)


def synthetic_corpus(params: ProductionParams, prices: PriceSystem, n_days: int = 200,
                     scale_kg: float = 100.0, efficient_fraction: float = 0.25,
                     efficiency_range: tuple[float, float] = (0.55, 0.95), seed: int = 0,
                     region: str = "synthetic", year: int = 2007) -> SyntheticCorpus:
    """Place ``n_days`` days radially inside the parametric frontier scaled to kg.

    A fraction of days sits exactly on the true frontier; the rest are scaled
    by a uniform efficiency factor. The true gap of a day is the revenue of
    its true frontier point minus its own revenue.
    """
    rng = np.random.default_rng(seed)
    angles = rng.uniform(0.0, math.pi / 2, n_days)
    on_frontier = rng.random(n_days) < efficient_fraction
    factors = rng.uniform(efficiency_range[0], efficiency_range[1], n_days)
    start = dt.date(year, 1, 1)
    days, frontier_pts, gaps = [], [], []
    for i in range(n_days):
        a, g = radial_frontier_point(params, (math.cos(angles[i]), math.sin(angles[i])))
        a, g = a * scale_kg, g * scale_kg
        e = 1.0 if on_frontier[i] else float(factors[i])
        day = TakeoffPoint(e * a, e * g, start + dt.timedelta(days=i % 365), region)
        days.append(day)
        frontier_pts.append((a, g))
        gaps.append(revenue((a, g), prices) - revenue(day, prices))
    return SyntheticCorpus(tuple(days), tuple(frontier_pts), tuple(gaps))

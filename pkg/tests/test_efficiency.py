import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harvestfrontier.efficiency import (
    Frontier, TakeoffPoint, analyze, batch_summarize, build_frontier, decompose_day, optimal_point,
    radial_project, revenue, revenue_gaps,
)
from harvestfrontier.errors import (
    BeyondFrontierError, DegenerateFrontierError, RayUndefinedError, ScaleOverflowError,
)
from harvestfrontier.market_data import PriceSystem
from harvestfrontier.production_model import ProductionParams
from harvestfrontier.synthetic import synthetic_corpus
from oracles import brute_force_frontier_vertices

PRICES_4_1 = PriceSystem(p_ground=4, p_arboreal=1)
# Kinked frontiers through (8.41, 3.6043); they differ only in the g of the third vertex.
KINKED_LOW = Frontier(((0, 4), (8.41, 3.6043), (20.8, 2), (21, 0)))
KINKED_HIGH = Frontier(((0, 4), (8.41, 3.6043), (20.8, 3), (21, 0)))


def random_point_set(rng, n):
    kind = rng.integers(3)
    if kind == 0:
        pts = rng.uniform(0, 10, (n, 2))
    elif kind == 1:
        pts = rng.integers(0, 5, (n, 2)).astype(float)
    else:
        pts = rng.uniform(0, 10, (n, 2))
        pts[rng.random(n) < 0.3, 0] = 0.0
        pts[rng.random(n) < 0.3, 1] = 0.0
    pts = [tuple(map(float, p)) for p in pts]
    if all(p == (0.0, 0.0) for p in pts):
        pts.append((1.0, 1.0))
    return pts


def test_single_point_frontier():
    assert build_frontier([(5, 3)]).vertices == ((0, 3), (5, 3), (5, 0))


def test_interior_point_dropped():
    assert build_frontier([(1, 0), (0, 1), (0.4, 0.4)]).vertices == ((0, 1), (1, 0))


def test_collinear_point_dropped():
    assert build_frontier([(0, 2), (1, 1), (2, 0)]).vertices == ((0, 2), (2, 0))


def test_degenerate_frontier():
    with pytest.raises(DegenerateFrontierError, match="degenerate frontier"):
        build_frontier([(0, 0), (0, 0)])
    with pytest.raises(DegenerateFrontierError):
        build_frontier([])


def test_frontier_validation_rejects_concave_chain():
    with pytest.raises(DegenerateFrontierError):
        Frontier(((0, 4), (2, 1), (3, 0.9), (4, 0)))


def test_frontier_on_one_axis():
    f = build_frontier([(0, 2), (0, 5)])
    assert f.vertices == ((0, 5), (0, 0))
    (proj, theta) = radial_project((0, 2), f)
    assert proj == (0, 5) and theta == 2.5


def test_hull_matches_exhaustive_oracle():
    rng = np.random.default_rng(12345)
    for _ in range(300):
        pts = random_point_set(rng, int(rng.integers(1, 13)))
        f = build_frontier(pts)
        assert set(f.vertices) == brute_force_frontier_vertices(pts), pts


@settings(max_examples=200)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=1, max_size=30))
def test_frontier_invariants(pts):
    if all(p == (0, 0) for p in pts):
        return
    f = build_frontier(pts)
    assert f.vertices[0] == (0, max(g for _, g in pts))
    assert f.vertices[-1] == (max(a for a, _ in pts), 0)
    for p in pts:
        assert f.contains(p)


def test_radial_fixed_point():
    proj, theta = radial_project((8.41, 3.6043), KINKED_LOW)
    assert theta == 1 and proj == (8.41, 3.6043)


def test_radial_projection_kinked():
    (a, g), theta = radial_project(TakeoffPoint(7, 3), KINKED_LOW)
    assert a == pytest.approx(8.41, abs=1e-4)
    assert g == pytest.approx(3.6043, abs=1e-4)
    assert theta == pytest.approx(1.2014, abs=3e-4)
    assert a / g == pytest.approx(7 / 3, rel=1e-12)


def test_radial_axis_points():
    f = build_frontier([(2, 6), (9, 1)])
    assert radial_project((5, 0), f) == ((9, 0), 1.8)
    assert radial_project((0, 3), f) == ((0, 6), 2.0)


def test_radial_errors():
    f = build_frontier([(2, 6), (9, 1)])
    with pytest.raises(RayUndefinedError, match="ray undefined"):
        radial_project((0, 0), f)
    with pytest.raises(BeyondFrontierError, match="point beyond frontier"):
        radial_project((9, 6), f)


@settings(max_examples=300)
@given(st.lists(st.tuples(st.floats(0.01, 100), st.floats(0.01, 100)), min_size=1, max_size=15),
       st.integers(0, 14), st.floats(0.01, 1.0))
def test_radial_preserves_ratio(pts, which, shrink):
    f = build_frontier(pts)
    a, g = pts[which % len(pts)]
    (pa, pg), theta = radial_project((a * shrink, g * shrink), f)
    assert theta >= 1
    assert pa / pg == pytest.approx(a / g, rel=1e-9)
    assert f.contains((pa, pg))


def test_revenue_examples():
    assert revenue((7, 3), PRICES_4_1) == 19
    assert revenue((8.41, 3.6043), PRICES_4_1) == pytest.approx(22.827, abs=1e-3)
    assert revenue((0, 0), PRICES_4_1) == 0


def test_optimal_point_enumeration():
    square = Frontier(((0, 1), (1, 1), (1, 0)))
    assert optimal_point(square, PRICES_4_1) == (1, 1)


def test_optimal_point_high_ground_price():
    f = build_frontier([(0, 5), (3, 4.5), (6, 2), (7, 0)])
    assert optimal_point(f, PriceSystem(1e9, 1)) == (0, 5)


def test_optimal_point_tie_prefers_ground():
    # edge (0,4)-(4,3) has slope -1/4 = -P_A/P_G
    f = Frontier(((0, 4), (4, 3), (5, 0)))
    for _ in range(3):
        assert optimal_point(f, PRICES_4_1) == (0, 4)


def test_decompose_kinked_technical():
    d = decompose_day(TakeoffPoint(7, 3), KINKED_LOW, PRICES_4_1)
    assert d.observed_revenue == 19
    assert d.projected_revenue == pytest.approx(22.827, abs=1e-3)
    assert d.technical_loss == pytest.approx(3.827, abs=1e-3)


def test_low_corner_earns_less_than_quoted_optimum():
    # the corner (20.8, 2) earns 28.8, short of an optimum of 32.8
    d = decompose_day(TakeoffPoint(7, 3), KINKED_LOW, PRICES_4_1)
    assert d.optimal == (20.8, 2)
    assert d.optimal_revenue == pytest.approx(28.8)
    # taking 32.8 as the optimal revenue
    tech, alloc = revenue_gaps(19, 22.827, 32.8)
    assert tech == pytest.approx(3.827, abs=1e-9)
    assert alloc == pytest.approx(9.973, abs=1e-9)


def test_high_corner_reproduces_all_totals():
    d = decompose_day(TakeoffPoint(7, 3), KINKED_HIGH, PRICES_4_1)
    assert d.optimal == (20.8, 3)
    assert d.optimal_revenue == pytest.approx(32.8)
    assert d.technical_loss == pytest.approx(3.827, abs=1e-3)
    assert d.allocative_loss == pytest.approx(9.973, abs=1e-3)


def test_efficient_day_has_no_losses():
    d = decompose_day((20.8, 3), KINKED_HIGH, PRICES_4_1)
    assert d.technical_loss == 0 and d.allocative_loss == 0 and d.scale == 1


@settings(max_examples=300)
@given(st.lists(st.tuples(st.floats(0, 1000), st.floats(0, 1000)), min_size=1, max_size=20),
       st.floats(0.1, 10), st.floats(0.1, 10))
def test_decomposition_additive_and_nonnegative(pts, pg, pa):
    if all(a == 0 and g == 0 for a, g in pts):
        return
    prices = PriceSystem(pg, pa)
    f = build_frontier(pts)
    best = max(revenue(v, prices) for v in f.vertices)
    for p in pts:
        if p == (0, 0):
            continue
        try:
            d = decompose_day(p, f, prices)
        except ScaleOverflowError:
            continue  # day ~1e308 times smaller than the frontier
        assert d.technical_loss >= 0 and d.allocative_loss >= 0
        assert d.optimal_revenue - d.observed_revenue == pytest.approx(
            d.technical_loss + d.allocative_loss, abs=1e-3)
        assert d.optimal_revenue >= best - 1e-9 * best


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(0.01, 50), st.floats(0.01, 50)), min_size=1, max_size=12),
       st.lists(st.tuples(st.floats(0, 50), st.floats(0, 50)), min_size=1, max_size=12))
def test_enlarging_point_set_never_shrinks_frontier(base, extra):
    small = build_frontier(base)
    big = build_frontier(base + extra)
    for v in small.vertices:
        assert big.contains(v)
    for p in base:
        assert radial_project(p, big)[1] >= radial_project(p, small)[1] * (1 - 1e-12)


def _days(region, year, pts):
    return [TakeoffPoint(a, g, dt.date(year, 1, 1) + dt.timedelta(days=i), region)
            for i, (a, g) in enumerate(pts)]


def test_batch_efficient_corpus():
    days = _days("Luba", 2007, [(0, 5), (0, 5), (0, 5)])
    (s,) = batch_summarize(days, PRICES_4_1)
    assert s.mean_technical == 0 and s.mean_allocative == 0
    assert s.sd_technical == 0 and s.t_technical is None


def test_batch_grouping_and_order():
    days = (_days("Riaba", 2007, [(1, 2), (2, 1), (0.5, 0.5)])
            + _days("Luba", 2007, [(3, 1), (1, 3)]) + _days("Luba", 2005, [(1, 1)]))
    out = batch_summarize(days, PRICES_4_1)
    assert [(s.region, s.year) for s in out] == [("Luba", 2005), ("Luba", 2007), ("Riaba", 2007)]
    single = out[0]
    assert single.n_days == 1 and single.sd_technical is None and single.t_technical is None


def test_batch_t_statistic():
    days = _days("Riaba", 2007, [(4, 4), (2, 2), (1, 1), (3, 0.5)])
    result = analyze(days, PRICES_4_1)
    (s,) = result.summaries
    tech = [d.technical_loss for d in result.decompositions[("Riaba", 2007)]]
    assert s.mean_technical == pytest.approx(np.mean(tech))
    assert s.sd_technical == pytest.approx(np.std(tech, ddof=1))
    assert s.t_technical == pytest.approx(s.mean_technical / (s.sd_technical / math.sqrt(4)))


def test_zero_days_excluded_and_counted():
    days = _days("Luba", 2007, [(1, 2), (0, 0), (2, 1)])
    result = analyze(days, PRICES_4_1)
    assert result.summaries[0].n_days == 2
    assert result.excluded == {("Luba", 2007): 1}


def test_pooling_knob():
    days = _days("Luba", 2005, [(1, 2)]) + _days("Luba", 2007, [(2, 1)])
    assert [(s.region, s.year) for s in batch_summarize(days, PRICES_4_1, pooling="region")] == [("Luba", None)]
    assert len(batch_summarize(days, PRICES_4_1, pooling="all")) == 1


def test_per_group_prices():
    days = _days("Luba", 2007, [(1, 2), (2, 1)]) + _days("Riaba", 2007, [(1, 2), (2, 1)])
    prices = {("Luba", 2007): PriceSystem(4, 1), ("Riaba", 2007): PriceSystem(1, 4)}
    result = analyze(days, prices)
    assert result.decompositions[("Luba", 2007)][0].optimal == (1, 2)
    assert result.decompositions[("Riaba", 2007)][0].optimal == (2, 1)


def test_synthetic_corpus_recovers_known_gap():
    params = ProductionParams(0.02, 0.04, 0.5)
    corpus = synthetic_corpus(params, PRICES_4_1, n_days=200, seed=7)
    (s,) = batch_summarize(corpus.days, PRICES_4_1)
    assert s.n_days == 200
    assert s.mean_technical == pytest.approx(corpus.mean_true_gap, rel=0.05)
    assert s.mean_technical <= corpus.mean_true_gap


def test_subnormal_vertex_projects_onto_itself():
    f = build_frontier([(0.0, 128.0), (2.0, 2.225073858507203e-309)])
    _, theta = radial_project((2.0, 2.225073858507203e-309), f)
    assert theta == 1


def test_unrepresentable_scale_raises():
    f = build_frontier([(0.0, 1.0), (0.0, 2.225073858507203e-309)])
    with pytest.raises(ScaleOverflowError):
        radial_project((0.0, 2.225073858507203e-309), f)
    assert f.contains((0.0, 2.225073858507203e-309))


def test_tiny_day_against_large_frontier():
    pts = [(4.0, 1.0), (1e-300, 1e-301)]
    d = decompose_day(pts[1], build_frontier(pts), PriceSystem(1, 1))
    assert d.optimal_revenue - d.observed_revenue == pytest.approx(d.technical_loss + d.allocative_loss, abs=1e-3)
    assert d.projected[0] / d.projected[1] == pytest.approx(10, rel=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harvestfrontier.errors import HarvestError, InfeasibleRateError, SingularSlopeError
from harvestfrontier.market_data import PriceSystem
from harvestfrontier.production_model import (
    HarvestRates, ProductionParams, arboreal_pressure, frontier_contains, frontier_intercept,
    ground_pressure, is_sustainable, mrt, parametric_tangency, population_path, ppf_curve,
    ppf_ground, radial_frontier_point,
)
from oracles import central_difference, grid_tangency

BASE = ProductionParams(alpha=0.02, gamma=0.04, s=0.5, labor=1.0)
BASE_RATES = HarvestRates(a=0.019, g=0.02)

# Frozen from 40-digit mpmath evaluations.
BASE_ARBOREAL_PRESSURE = 1.805e-4
BASE_GROUND_PRESSURE = 2.957515273256627e-4
BASE_ARBOREAL_INDEX_100 = 7.256880113202214
BASE_GROUND_INDEX_100 = 53.00704595522366
ROOT_012 = 0.3276110567048633  # 0.12 ** (1 / 1.9)


def level_residual(a, g, p):
    return a ** p.exp_a * p.s + g ** p.exp_g * (p.labor - p.s) - p.capacity


params_strategy = st.builds(
    ProductionParams,
    alpha=st.floats(0.001, 0.5),
    gamma=st.floats(0.001, 0.5),
    s=st.floats(0.05, 0.95),
    exp_a=st.floats(1.2, 3.0),
    exp_g=st.floats(1.2, 3.0),
)


def test_params_validation():
    with pytest.raises(HarvestError):
        ProductionParams(0.02, 0.04, s=1.0)
    with pytest.raises(HarvestError):
        ProductionParams(0.02, 0.04, s=0.5, exp_g=1.0)
    with pytest.raises(HarvestError):
        HarvestRates(-0.1, 0)


def test_pressures():
    assert arboreal_pressure(BASE, HarvestRates(0, 0.02)) == 0
    assert arboreal_pressure(BASE, BASE_RATES) == pytest.approx(BASE_ARBOREAL_PRESSURE, abs=1e-7)
    assert ground_pressure(BASE, BASE_RATES) == pytest.approx(2.96e-4, abs=1e-6)
    assert ground_pressure(BASE, BASE_RATES) == pytest.approx(BASE_GROUND_PRESSURE, rel=1e-12)


def test_ppf_intercepts():
    assert frontier_intercept(BASE) == pytest.approx(math.sqrt(0.06 / 0.5))
    assert ppf_ground(frontier_intercept(BASE), BASE) == 0
    p = ProductionParams(0.03, 0.03, 0.5)
    assert ppf_ground(0, p) == pytest.approx(ROOT_012, rel=1e-12)


def test_ppf_beyond_intercept():
    with pytest.raises(InfeasibleRateError, match="infeasible arboreal rate"):
        ppf_ground(frontier_intercept(BASE) * 1.01, BASE)


@given(params_strategy, st.floats(0, 1))
def test_ppf_satisfies_level_set(p, frac):
    a = frac * frontier_intercept(p)
    assert abs(level_residual(a, ppf_ground(a, p), p)) <= 1e-12


def test_mrt_values():
    assert mrt(0, 0.3, BASE) == 0
    assert mrt(1, 1, ProductionParams(0.02, 0.04, 0.5)) == pytest.approx(-1.0526, abs=5e-4)
    assert mrt(1, 1, ProductionParams(0.02, 0.04, 0.5)) == pytest.approx(-2 / 1.9, rel=1e-15)
    with pytest.raises(SingularSlopeError, match="slope singular"):
        mrt(0.1, 0, BASE)


@settings(max_examples=200)
@given(params_strategy, st.floats(0.05, 0.95))
def test_mrt_matches_finite_difference(p, frac):
    a_max = frontier_intercept(p)
    a = frac * a_max
    h = 1e-6 * a_max
    fd = central_difference(lambda x: ppf_ground(x, p), a, h)
    assert mrt(a, ppf_ground(a, p), p) == pytest.approx(fd, rel=1e-6)


@given(params_strategy, st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_mrt_negative_and_frontier_steepens(p, f1, f2):
    lo, hi = sorted((f1, f2))
    a_max = frontier_intercept(p)
    a1, a2 = lo * a_max, hi * a_max
    m1, m2 = mrt(a1, ppf_ground(a1, p), p), mrt(a2, ppf_ground(a2, p), p)
    assert m1 < 0 and m2 < 0
    if hi - lo > 1e-6:
        assert ppf_ground(a2, p) < ppf_ground(a1, p)
        assert abs(m2) > abs(m1)


@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0.05, 0.9), st.floats(0.01, 0.09))
def test_mrt_magnitude_increases_with_s(a, g, s, ds):
    p1 = ProductionParams(0.02, 0.04, s)
    p2 = ProductionParams(0.02, 0.04, s + ds)
    assert abs(mrt(a, g, p2)) > abs(mrt(a, g, p1))


def test_population_path_base_set():
    path = population_path(BASE, BASE_RATES, [0, 50, 100])
    assert path.arboreal_index[0] == path.ground_index[0] == 1
    assert path.arboreal_index[-1] == pytest.approx(BASE_ARBOREAL_INDEX_100, abs=1e-2)
    assert path.arboreal_index[-1] == pytest.approx(BASE_ARBOREAL_INDEX_100, rel=1e-12)
    assert path.ground_index[-1] == pytest.approx(BASE_GROUND_INDEX_100, rel=1e-12)


def test_higher_harvest_flattens_path():
    times = np.linspace(0.5, 100, 50)
    base = population_path(BASE, BASE_RATES, times)
    more_a = population_path(BASE, HarvestRates(2 * 0.019, 0.02), times)
    more_g = population_path(BASE, HarvestRates(0.019, 2 * 0.02), times)
    assert all(x < y for x, y in zip(more_a.arboreal_index, base.arboreal_index))
    assert all(x < y for x, y in zip(more_g.ground_index, base.ground_index))


def test_zero_harvest_is_pure_exponential():
    path = population_path(BASE, HarvestRates(0, 0), [0, 10, 37.5])
    for t, na, ng in zip(path.times, path.arboreal_index, path.ground_index):
        assert na == math.exp(0.02 * t)
        assert ng == math.exp(0.04 * t)


def test_population_path_rejects_unsorted_times():
    with pytest.raises(HarvestError):
        population_path(BASE, BASE_RATES, [0, 2, 1])


def test_sustainability_predicate():
    assert is_sustainable(BASE, HarvestRates(0, 0)) == (True, True)
    assert is_sustainable(BASE, BASE_RATES) == (True, True)
    assert is_sustainable(BASE, HarvestRates(10, 0))[0] is False


def test_tangency_symmetric():
    p = ProductionParams(0.03, 0.03, 0.5, exp_a=2.0, exp_g=2.0)
    t = parametric_tangency(p, PriceSystem(1, 1))
    assert not t.corner
    assert t.a == pytest.approx(t.g, rel=1e-9)


def test_tangency_defining_condition():
    prices = PriceSystem(p_ground=4, p_arboreal=1)
    t = parametric_tangency(BASE, prices)
    assert abs(mrt(t.a, t.g, BASE) + prices.p_arboreal / prices.p_ground) <= 1e-8
    assert abs(level_residual(t.a, t.g, BASE)) <= 1e-12


def test_tangency_beats_dense_grid():
    prices = PriceSystem(p_ground=4, p_arboreal=1)
    t = parametric_tangency(BASE, prices)
    a, g, best, all_r = grid_tangency(BASE, 4, 1)
    assert t.revenue >= all_r.max() - 1e-12
    assert abs(t.revenue - best) <= 1e-6


def test_tangency_corner_when_frontier_collapses():
    t = parametric_tangency(ProductionParams(0, 0, 0.5), PriceSystem(1, 1))
    assert t.corner and t.a == t.g == 0


def test_tangency_needs_positive_s():
    with pytest.raises(HarvestError):
        parametric_tangency(ProductionParams(0.02, 0.04, 0.0), PriceSystem(1, 1))


@given(params_strategy, st.floats(0.01, 1.5))
def test_radial_frontier_point_lies_on_level_set(p, angle):
    a, g = radial_frontier_point(p, (math.cos(angle), math.sin(angle)))
    assert abs(level_residual(a, g, p)) <= 1e-12
    assert a * math.sin(angle) == pytest.approx(g * math.cos(angle), rel=1e-12, abs=1e-15)


def test_sustainable_frontier_inside_myopic():
    myopic = ProductionParams(0.05, 0.08, 0.5)
    sustainable = ProductionParams(0.02, 0.04, 0.5)
    assert frontier_contains(myopic, sustainable)
    assert not frontier_contains(sustainable, myopic)
    assert len(ppf_curve(sustainable, 11)) == 11

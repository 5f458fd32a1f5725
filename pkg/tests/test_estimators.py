import math
import pytest
from core.errors import DomainError, GridTooNarrowError, ParameterError
from core.estimators import (Proxy, Side, estimate_beta_c, estimate_theta, lemma2_experiment, locate_crossing,
                             percolation_proxy, wilson_interval)
from core.graph import Graph, Interval
from core.models import ModelParams, constant, coupled_bernoulli
from core.rng import Seed


def path_graph(v):
    return Graph.from_pairs(v, [(i, i + 1) for i in range(v.lo, v.hi - 1)])


@pytest.mark.parametrize("proxy", ["span", "giant(0.5)"])
def test_proxy_trivial_graphs(proxy):
    v = Interval(0, 20)
    assert not percolation_proxy(Graph.empty(v), proxy)
    assert percolation_proxy(Graph.from_pairs(v, v.pairs()), proxy)
    assert percolation_proxy(path_graph(v), proxy)


def test_span_needs_both_end_tenths():
    v = Interval(0, 20)
    half = Graph.from_pairs(v, [(i, i + 1) for i in range(0, 15)])
    assert not percolation_proxy(half, "span")
    assert percolation_proxy(half, "giant(0.5)")


def test_proxy_on_a_window():
    v = Interval(-20, 20)
    g = Graph.from_pairs(v, [(i, i + 1) for i in range(-10, 9)])
    assert percolation_proxy(g, "span", Interval(-10, 10))
    assert not percolation_proxy(g, "span")


def test_proxy_errors():
    with pytest.raises(ParameterError, match="unknown proxy"):
        percolation_proxy(Graph.empty(Interval(0, 20)), "cluster")
    with pytest.raises(ParameterError):
        Proxy.parse("giant(2)")
    with pytest.raises(DomainError):
        percolation_proxy(Graph.empty(Interval(0, 9)), "span")
    path = path_graph(Interval(0, 20))
    for kind in ("span", "giant(0.5)"):
        with pytest.raises(DomainError, match="not contained"):
            percolation_proxy(path, kind, Interval(-5, 15))


def test_proxy_parse_round_trip():
    assert str(Proxy.parse("giant(0.25)")) == "giant(0.25)"
    assert Proxy.parse(" span ") == Proxy("span")


def test_sides():
    assert Side.parse("one").domain(8) == Interval(0, 8)
    assert Side.parse("two").domain(8) == Interval(-8, 8)
    assert Side.TWO_SIDED.window(8) == Interval(-4, 4)
    assert Side.ONE_SIDED.window(8) == Interval(0, 8)
    with pytest.raises(ParameterError):
        Side.parse("three")


def test_proxy_is_monotone_under_coupling():
    v = Interval(0, 300)
    betas = [0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0]
    for r in range(10):
        sample = coupled_bernoulli(v, 2.0, 1.5, Seed(30).spawn(r))
        values = [percolation_proxy(sample.at(b), "span") for b in betas]
        assert values == sorted(values)


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert (lo, hi) == pytest.approx((0.4038, 0.5962), abs=1e-4)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    narrow = wilson_interval(5000, 10000)
    assert (narrow[1] - narrow[0]) == pytest.approx((hi - lo) / 10, rel=0.03)
    with pytest.raises(ParameterError):
        wilson_interval(1, 0)


def test_theta_at_beta_zero_is_singletons():
    est = estimate_theta(ModelParams(1.5, 0.0), Side.ONE_SIDED, 50, 5, Seed(1))
    assert est.mean == pytest.approx(1 / 50)
    assert est.stderr == 0.0


def test_theta_with_certain_edges():
    est = estimate_theta(ModelParams(1.5, 1.0), Side.TWO_SIDED, 10, 3, Seed(1), f=constant(1.0))
    assert est.mean == 1.0


def test_theta_reproducible():
    params = ModelParams(1.5, 2.0)
    a = estimate_theta(params, "two", 500, 10, Seed(7))
    b = estimate_theta(params, "two", 500, 10, Seed(7))
    assert (a.mean, a.stderr) == (b.mean, b.stderr)
    assert 0 < a.mean <= 1


def test_lemma2_trivial_rates():
    zero = lemma2_experiment(ModelParams(1.5, 0.0), 0.8, [16, 32], 5, Seed(2))
    assert zero.rates == [0.0, 0.0]
    full = lemma2_experiment(ModelParams(1.5, 1.0), 0.8, [16, 32], 5, Seed(2), f=constant(1.0))
    assert full.rates == [1.0, 1.0]
    assert all(0 <= p.interval[0] <= p.rate <= p.interval[1] <= 1 for p in full.points)


def test_lemma2_rejects_gamma_outside_range():
    with pytest.raises(ParameterError, match="alpha/2 < gamma < 1"):
        lemma2_experiment(ModelParams(1.5, 1.0), 0.7, [16], 5, Seed(2))
    with pytest.raises(ParameterError):
        lemma2_experiment(ModelParams(1.5, 1.0), 1.0, [16], 5, Seed(2))


def test_lemma2_rates_rise_with_beta():
    low = lemma2_experiment(ModelParams(1.5, 0.5), 0.8, [256], 60, Seed(5))
    high = lemma2_experiment(ModelParams(1.5, 6.0), 0.8, [256], 60, Seed(5))
    assert high.rates[0] >= low.rates[0]
    assert high.rates[0] > 0.9


def test_locate_crossing_on_a_step():
    grid = [0.5 + 0.1 * k for k in range(11)]
    beta, seen = locate_crossing(grid, lambda b: 1.0 if b >= 1.0 - 1e-12 else 0.0)
    assert abs(beta - 1.0) <= 0.1
    assert len(seen) < len(grid)


def test_locate_crossing_interpolates():
    beta, _ = locate_crossing([0.0, 1.0, 2.0], lambda b: b / 2)
    assert beta == pytest.approx(1.0)


def test_locate_crossing_grid_too_narrow():
    with pytest.raises(GridTooNarrowError, match="grid too narrow"):
        locate_crossing([1.0, 2.0, 3.0], lambda b: 0.9)
    with pytest.raises(GridTooNarrowError):
        locate_crossing([1.0, 2.0, 3.0], lambda b: 0.1)


def test_beta_c_step_fixture():
    grid = [0.5 + 0.1 * k for k in range(11)]
    est = estimate_beta_c(Side.TWO_SIDED, 1.5, 1.0, [64, 128, 256], grid, 10,
                          rate_fn=lambda m, b: 1.0 if b >= 1.0 - 1e-12 else 0.0)
    assert abs(est.estimate - 1.0) <= 0.1
    assert est.interval[0] <= est.estimate <= est.interval[1]
    assert len(est.crossings) == 3


def test_beta_c_needs_three_sizes():
    with pytest.raises(ParameterError, match="at least 3 sizes"):
        estimate_beta_c(Side.ONE_SIDED, 1.5, 1.0, [64, 128], [0.1, 5.0], 10, s=Seed(1))
    with pytest.raises(ParameterError, match="alpha > 1"):
        estimate_beta_c(Side.ONE_SIDED, 1.0, 1.0, [64, 128, 256], [0.1, 5.0], 10, s=Seed(1))


def test_beta_c_coupled_rates_are_monotone_and_reproducible():
    grid = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
    kwargs = dict(replicas=30, proxy="span", s=Seed(11))
    a = estimate_beta_c(Side.ONE_SIDED, 1.5, 1.0, [64, 128, 256], grid, **kwargs)
    b = estimate_beta_c(Side.ONE_SIDED, 1.5, 1.0, [64, 128, 256], grid, **kwargs)
    assert a.crossings == b.crossings and a.rows == b.rows
    for m in (64, 128, 256):
        rates = [row['proxy_rate'] for row in a.rows if row['M'] == m]
        assert rates == sorted(rates)
        assert len(rates) == len(grid)
    assert a.interval[0] <= a.estimate <= a.interval[1]


def test_beta_c_replica_parallel_matches_serial():
    grid = [0.1, 1.0, 4.0, 16.0]
    serial = estimate_beta_c("two", 1.5, 1.0, [32, 64, 128], grid, 12, s=Seed(12), workers=1)
    parallel = estimate_beta_c("two", 1.5, 1.0, [32, 64, 128], grid, 12, s=Seed(12), workers=3)
    assert serial.crossings == parallel.crossings


def test_beta_c_with_fk_sampling():
    grid = [0.1, 2.0, 20.0]
    est = estimate_beta_c(Side.ONE_SIDED, 1.5, 2.0, [10, 12, 14], grid, 6, s=Seed(13))
    assert len(est.crossings) == 3
    assert all(0.1 <= c <= 20.0 for c in est.crossings)


@pytest.mark.slow
def test_one_sided_crossing_is_not_below_two_sided():
    grid = [0.05 * k for k in range(1, 81)]
    sizes = [2**12, 2**14, 2**16]
    one = estimate_beta_c(Side.ONE_SIDED, 1.5, 1.0, sizes, grid, 400, s=Seed(100))
    two = estimate_beta_c(Side.TWO_SIDED, 1.5, 1.0, sizes, grid, 400, s=Seed(100))
    step = 0.05
    for c_one, c_two in zip(one.crossings, two.crossings):
        assert c_one >= c_two - step
        assert c_one <= 8 * c_two
    gaps = [c_one - c_two for c_one, c_two in zip(one.crossings, two.crossings)]
    assert gaps[-1] <= gaps[0] + step


@pytest.mark.slow
def test_goodness_rate_at_desk_scale():
    grid = [0.05 * k for k in range(1, 81)]
    two = estimate_beta_c(Side.TWO_SIDED, 1.5, 1.0, [2**10, 2**12, 2**14], grid, 200, s=Seed(101))
    params = ModelParams(1.5, 1.5 * two.estimate)
    report = lemma2_experiment(params, 0.8, [2**k for k in range(8, 15)], 400, Seed(102))
    assert report.non_decreasing()
    assert report.rates[-1] > 0.9
    assert math.isfinite(two.estimate)

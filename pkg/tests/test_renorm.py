import math
import numpy as np
import pytest
from core.errors import DomainError, GraphError, InfeasibleScaleError, ParameterError
from core.graph import Graph, Interval, clusters
from core.models import ModelParams, dyson, sample_bernoulli
from core.renorm import (BlockPartition, CoarseGraphSpec, build_scaled_schedule, build_schedule, clamp_probability,
                         coarse_connectivity_q, coarse_edge_prob_lb, coarse_graph, effective_beta,
                         er_disconnect_bound, good_blocks, induction_step_experiment, infinite_product_bound,
                         is_good, markov_bound)
from core.rng import Seed


def complete(v):
    return Graph.from_pairs(v, v.pairs())


def star(v, size):
    """One cluster of `size` vertices starting at v.lo, the rest isolated"""
    return Graph.from_pairs(v, [(v.lo, v.lo + k) for k in range(1, size)])


def test_block_partition_covers_domain():
    p = BlockPartition(4, Interval(2, 13))
    assert p.blocks == [Interval(2, 4), Interval(4, 8), Interval(8, 12), Interval(12, 13)]
    assert list(p.indices) == [0, 1, 2, 3]
    with pytest.raises(ParameterError):
        BlockPartition(0, Interval(0, 4))


def test_is_good_examples():
    assert not is_good(Graph.empty(Interval(0, 100)), Interval(0, 100), 0.5)
    assert is_good(complete(Interval(0, 12)), Interval(0, 12), 0.9)
    # clusters {0,2,5}, {1}, {3}, {4}
    g = Graph.from_pairs(Interval(0, 6), [(0, 2), (2, 5)])
    assert is_good(g, Interval(0, 3), 0.5)


def test_is_good_errors():
    g = Graph.empty(Interval(0, 5))
    with pytest.raises(DomainError, match="empty domain"):
        is_good(g, Interval(3, 3), 0.5)
    with pytest.raises(ParameterError):
        is_good(g, Interval(0, 5), 1.0)


def test_is_good_is_monotone_in_edges():
    v = Interval(0, 60)
    rng = np.random.default_rng(3)
    for r in range(30):
        g = sample_bernoulli(v, dyson(0.4, 1.5), Seed(r))
        extra = [p for p in rng.integers(0, 60, size=(10, 2)) if p[0] != p[1]]
        bigger = Graph.from_pairs(v, list(map(tuple, g.edges.tolist())) + [tuple(p) for p in extra])
        if is_good(g, v, 0.7):
            assert is_good(bigger, v, 0.7)


def test_good_blocks_mixed_fixture():
    n, gamma = 16, 0.5
    partition = BlockPartition(n, Interval(0, 4 * n))
    threshold = math.ceil(n ** gamma)
    sizes = [1, threshold, n, threshold - 1]
    graphs = [star(block, size) for block, size in zip(partition.blocks, sizes)]
    assert good_blocks(graphs, partition, gamma) == [1, 2]


def test_good_blocks_extremes_and_errors():
    partition = BlockPartition(8, Interval(0, 32))
    assert good_blocks([Graph.empty(b) for b in partition.blocks], partition, 0.5) == []
    assert good_blocks([complete(b) for b in partition.blocks], partition, 0.5) == [0, 1, 2, 3]
    with pytest.raises(GraphError):
        good_blocks([Graph.empty(Interval(0, 8))], partition, 0.5)


def test_coarse_graph_direct_rule():
    h = Graph.from_pairs(Interval(0, 8), [(1, 5)])
    spec = CoarseGraphSpec([{0, 1}, {5}])
    assert coarse_graph(h, spec).edge_set() == {(0, 1)}
    assert coarse_graph(Graph.empty(Interval(0, 8)), spec).num_edges == 0


def test_coarse_graph_rejects_overlap():
    with pytest.raises(GraphError, match="overlapping"):
        CoarseGraphSpec([{0, 1}, {1, 2}])


def brute_force_coarse(h, sets):
    edges = set()
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            if any(h.has_edge(x, y) for x in sets[a] for y in sets[b]):
                edges.add((a, b))
    return edges


def test_coarse_graph_matches_brute_force():
    rng = np.random.default_rng(17)
    for trial in range(200):
        n = int(rng.integers(10, 121))
        v = Interval(0, n)
        h = sample_bernoulli(v, dyson(float(rng.uniform(0.1, 2.0)), 1.5), Seed(trial))
        k = int(rng.integers(1, 9))
        labels = rng.integers(-1, k, size=n)
        sets = [frozenset(np.nonzero(labels == j)[0].tolist()) for j in range(k)]
        spec = CoarseGraphSpec(sets)
        assert coarse_graph(h, spec).edge_set() == brute_force_coarse(h, sets)


def test_block_diameter_bound_is_valid():
    n = 10
    sets = [frozenset({0, 9}), frozenset({21, 29}), frozenset({40})]
    spec = CoarseGraphSpec.from_blocks(sets, [0, 2, 4], n)
    assert spec.bound(0, 1) == 30
    assert spec.bound(0, 2) == 50
    assert all(spec.bound(a, b) >= spec.diameter(a, b) for a in range(3) for b in range(a + 1, 3))


def test_coarse_edge_prob_lb_values():
    assert coarse_edge_prob_lb(0.0, 3, 4, 5, 1.5) == 0.0
    assert coarse_edge_prob_lb(1.0, 2, 2, 2, 1.5) == pytest.approx(1 - math.exp(-4 * 2 ** -1.5))
    assert coarse_edge_prob_lb(1.0, 2, 2, 2, 1.5) == pytest.approx(0.75688, abs=1e-5)
    with pytest.raises(ParameterError):
        coarse_edge_prob_lb(1.0, 1, 1, 0, 1.5)


def test_coarse_edge_prob_lb_singletons_equal_edge_probability():
    assert coarse_edge_prob_lb(0.8, 1, 1, 7, 1.5) == pytest.approx(float(dyson(0.8, 1.5).probs_for(0, 7)))


def test_coarse_edge_prob_lb_below_empirical_frequency():
    v = Interval(0, 40)
    sets = [frozenset(range(0, 5)), frozenset(range(20, 26))]
    spec = CoarseGraphSpec.from_blocks(sets, [0, 2], 10)
    delta, trials = 0.3, 400
    hits = sum(coarse_graph(sample_bernoulli(v, dyson(delta, 1.5), Seed(99).spawn(r)), spec).num_edges
               for r in range(trials))
    bound = coarse_edge_prob_lb(delta, 5, 6, spec.bound(0, 1), 1.5)
    freq = hits / trials
    assert bound <= freq + 4 * math.sqrt(bound * (1 - bound) / trials)


def test_effective_beta():
    assert effective_beta(0.0, 100, 0.8, 1.5) == 0.0
    assert effective_beta(0.1, 10**6, 0.8, 1.5) == pytest.approx(0.1 * 2 ** -1.5 * 10 ** 0.6)
    assert effective_beta(0.1, 10**6, 0.8, 1.5) == pytest.approx(0.14076, abs=1e-5)
    ratio = effective_beta(1.0, 10**8, 0.8, 1.5) / effective_beta(1.0, 10**4, 0.8, 1.5)
    assert ratio == pytest.approx(10 ** (4 * (2 * 0.8 - 1.5)))
    with pytest.raises(ParameterError, match="subcritical exponent"):
        effective_beta(1.0, 100, 0.7, 1.5)


def test_effective_beta_reproduces_block_edge_probability():
    # good blocks at block distance k hold >= N^gamma vertices each, within (k+1)N of each other
    delta, n, gamma, alpha = 0.5, 64, 0.8, 1.5
    size = math.ceil(n ** gamma)
    b = effective_beta(delta, n, gamma, alpha)
    for k in range(1, 6):
        lb = coarse_edge_prob_lb(delta, size, size, (k + 1) * n, alpha)
        assert lb >= -math.expm1(-b * k ** -alpha) - 1e-12


def test_markov_bound_examples():
    bound, holds = markov_bound(0.01, 0.25)
    assert bound == pytest.approx(0.986667, abs=1e-6) and holds
    bound, holds = markov_bound(0.2, 0.4)
    assert bound == pytest.approx(2 / 3) and holds
    assert markov_bound(0.05, 1e-9)[0] == pytest.approx(0.95)
    with pytest.raises(ParameterError):
        markov_bound(0.1, 0.5)


def test_er_disconnect_bound():
    assert er_disconnect_bound(4, 0.9) == pytest.approx(0.008)
    assert er_disconnect_bound(5, 1.0) == 0.0
    assert er_disconnect_bound(2, 0.5) == pytest.approx(2.0)
    assert clamp_probability(er_disconnect_bound(2, 0.5)) == 1.0


def test_schedule_proof_form():
    s = build_schedule(0.8, 0.9, 1.5, 0.1, 2**20, 100, 0, 8)
    assert s.c_n(1) == 1048576
    assert s.d_n(1) == 0.25
    assert s.c_n(2) == 2**20
    assert s.c_n(3) == 3**20
    for n in range(2, 9):
        assert s.M_n(n) == s.M_n(n - 1) * s.c_n(n)
        assert s.eps_n(n) == pytest.approx((1 + 3 * s.d_n(n)) * s.eps_n(n - 1))
        assert s.d_n(n) == pytest.approx(s.c_n(n) ** (0.9 - 1))
        assert s.M_n(n) > s.M_n(n - 1)
    assert all(e < 0.1 for e in s.eps)
    assert list(s.eps) == sorted(s.eps)


def test_product_bound_is_stable_under_deeper_truncation():
    coarse = infinite_product_bound(0.9, 2**20)
    deeper = infinite_product_bound(0.9, 2**20, depth=2 * coarse.depth)
    assert coarse.relative_width < 1e-9
    assert deeper.upper == pytest.approx(coarse.upper, rel=1e-9)
    assert deeper.log_lower <= coarse.log_upper and coarse.log_lower <= deeper.log_upper


def test_schedule_epsilon_one_against_direct_product():
    s = build_schedule(0.8, 0.9, 1.5, 0.1, 2**20, 100, 0, 4)
    # c_1 = c_2 = 2^20, then c_k = k^20
    log_product = 2 * math.log1p(0.75) + sum(math.log1p(3 * k ** -2.0) for k in range(3, 200_000))
    tail = 3 / 200_000
    assert s.epsilon_1 == pytest.approx(0.1 / math.exp(log_product + tail), rel=1e-8)


def test_schedule_errors_name_the_inequality():
    with pytest.raises(ParameterError, match="alpha/2 < gamma'"):
        build_schedule(0.7, 0.9, 1.5, 0.1, 2**20, 100, 0, 3)
    with pytest.raises(ParameterError, match="gamma' < gamma"):
        build_schedule(0.95, 0.9, 1.5, 0.1, 2**20, 100, 0, 3)
    with pytest.raises(ParameterError, match="epsilon"):
        build_schedule(0.8, 0.9, 1.5, 1.5, 2**20, 100, 0, 3)


def test_scaled_schedule():
    s = build_scaled_schedule(0.78, 0.8, 1.5, 0.2, 64, [64, 16, 16])
    assert s.M == (64, 1024, 16384)
    assert not s.proof_form
    assert s.eps_n(3) < 0.2
    assert s.with_padding(5).L == 5


def test_coarse_connectivity_q():
    assert coarse_connectivity_q(0.0, 16, 64, 0.8, 1.5) == 0.0
    expected = 1 - math.exp(-0.5 * 16 ** -1.5 * 64 ** (1.6 - 1.5))
    assert coarse_connectivity_q(0.5, 16, 64, 0.8, 1.5) == pytest.approx(expected)


def test_induction_step_with_saturated_children():
    params = ModelParams(1.5, 50.0, delta=0.5)
    schedule = build_scaled_schedule(0.78, 0.8, 1.5, 0.2, 16, [16, 8])
    report = induction_step_experiment(params, schedule, 2, 5, Seed(1))
    assert report.child_good_rate == 1.0
    assert report.tally.k_counts == {8: 5}
    assert report.big_cluster_rate == 1.0
    assert report.tally.chain_violations == 0


def test_induction_step_with_nothing_present():
    params = ModelParams(1.5, 0.0, delta=0.0)
    schedule = build_scaled_schedule(0.78, 0.8, 1.5, 0.2, 16, [16, 8])
    report = induction_step_experiment(params, schedule, 2, 4, Seed(2))
    assert report.child_good_rate == 0.0
    assert report.big_cluster_rate == 0.0
    rows = {row['quantity']: row for row in report.rows()}
    assert rows['p_big_cluster']['empirical'] == 0.0


def test_induction_step_small_scale_report():
    params = ModelParams(1.5, 2.0, delta=0.5)
    schedule = build_scaled_schedule(0.78, 0.8, 1.5, 0.2, 64, [64, 16])
    report = induction_step_experiment(params, schedule, 2, 20, Seed(3))
    rows = {row['quantity']: row for row in report.rows()}
    for quantity in ('child_good_rate', 'p_k_large', 'p_coarse_disconnected', 'p_big_cluster'):
        assert quantity in rows
    assert rows['chain_violations']['holds']
    assert rows['p_joint_lower']['holds']
    assert 0.0 <= report.child_good_rate <= 1.0


def test_induction_tallies_merge_in_any_order():
    params = ModelParams(1.5, 1.0, delta=0.3)
    schedule = build_scaled_schedule(0.78, 0.8, 1.5, 0.2, 16, [16, 8])
    serial = induction_step_experiment(params, schedule, 2, 6, Seed(4), workers=1)
    parallel = induction_step_experiment(params, schedule, 2, 6, Seed(4), workers=2)
    assert serial.tally == parallel.tally


def test_induction_step_rejects_infeasible_scale():
    params = ModelParams(1.5, 1.0)
    schedule = build_schedule(0.8, 0.9, 1.5, 0.1, 2**20, 100, 0, 3)
    with pytest.raises(InfeasibleScaleError):
        induction_step_experiment(params, schedule, 2, 1, Seed(1))
    with pytest.raises(ParameterError):
        induction_step_experiment(params, schedule, 1, 1, Seed(1))

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from netinf.core import Cascade, CascadeSet, DirectedNetwork, TransmissionConfig
from netinf.synth import (CORE_PERIPHERY_SEED, HIERARCHICAL_SEED, RANDOM_SEED, ForestFireParams,
                          KroneckerParams, SimulationParams, coverage_stats, generate_cascades,
                          generate_forest_fire, generate_kronecker, kronecker_probabilities,
                          perturb_cascade, perturb_corpus, simulate_cascade, simulate_corpus)


def star(leaves=4):
    return DirectedNetwork(leaves + 1, {(0, i) for i in range(1, leaves + 1)})


def test_kronecker_probabilities_are_products():
    p = kronecker_probabilities(KroneckerParams(((0.9, 0.5), (0.3, 0.1)), power=2))
    assert p.shape == (4, 4)
    assert p[0, 0] == pytest.approx(0.81)
    assert p[1, 2] == pytest.approx(0.5 * 0.3)
    assert p[3, 3] == pytest.approx(0.01)


def test_kronecker_uniform_seed_edge_count():
    counts = [len(generate_kronecker(KroneckerParams(RANDOM_SEED, 10), s).edges) for s in range(5)]
    # each of 1024*1023 pairs independently with p = 2^-10
    mean = 1024 * 1023 / 1024
    assert abs(np.mean(counts) - mean) < 4 * math.sqrt(mean / 5)


def test_kronecker_uniform_seed_in_degree_is_binomial():
    n, p = 1024, 0.5 ** 10
    degs = []
    for seed in range(20):
        net = generate_kronecker(KroneckerParams(RANDOM_SEED, 10), seed)
        deg = np.zeros(n, dtype=int)
        for _, v in net.edges:
            deg[v] += 1
        degs.append(deg)
    degs = np.concatenate(degs)
    top = 4  # pool 4+ into one bin so every expected count is large
    observed = np.array([np.sum(degs == d) for d in range(top)] + [np.sum(degs >= top)])
    pmf = stats.binom.pmf(np.arange(top), n - 1, p)
    expected = degs.size * np.append(pmf, 1 - pmf.sum())
    _, pvalue = stats.chisquare(observed, expected)
    assert pvalue > 0.01


def test_kronecker_exact_target():
    net = generate_kronecker(KroneckerParams(HIERARCHICAL_SEED, 10, 1446), 0)
    assert net.n == 1024 and len(net.edges) == 1446
    assert all(u != v for u, v in net.edges)


def test_kronecker_two_node_complete():
    net = generate_kronecker(KroneckerParams(CORE_PERIPHERY_SEED, 1, 2), 3)
    assert net.edges == {(0, 1), (1, 0)}


def test_kronecker_infeasible_target():
    with pytest.raises(ValueError):
        generate_kronecker(KroneckerParams(RANDOM_SEED, 1, 3), 0)
    with pytest.raises(ValueError):
        generate_kronecker(KroneckerParams(((1, 0), (0, 0)), 2, 2), 0)


def test_kronecker_deterministic():
    params = KroneckerParams(CORE_PERIPHERY_SEED, 8, 360)
    assert generate_kronecker(params, 5) == generate_kronecker(params, 5)
    assert generate_kronecker(params, 5) != generate_kronecker(params, 6)


def test_forest_fire_two_nodes():
    for seed in range(5):
        assert generate_forest_fire(ForestFireParams(2, 0.6, 0.6), seed).edges == {(1, 0)}


def test_forest_fire_no_burning():
    net = generate_forest_fire(ForestFireParams(50, 0.0, 0.17), 4)
    assert len(net.edges) == 49
    outdeg = net.out_degree()
    assert outdeg[0] == 0 and np.all(outdeg[1:] == 1)
    assert all(v < u for u, v in net.edges)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_forest_fire_edge_band(seed):
    net = generate_forest_fire(ForestFireParams(1024, 0.20, 0.17), seed)
    assert 1200 <= len(net.edges) <= 1800


def test_simulate_isolated_root():
    cfg = TransmissionConfig(beta=1.0, epsilon=1e-9)
    c = simulate_cascade(DirectedNetwork(3, set()), cfg, 1, np.random.default_rng(0))
    assert c.size == 1 and c.root == 1


def test_simulate_certain_transmission():
    cfg = TransmissionConfig(beta=1.0, epsilon=1e-9)
    c = simulate_cascade(star(), cfg, 0, np.random.default_rng(0))
    assert c.size == 5
    assert c.root == 0 and np.all(c.times[1:] > 0)


def test_simulate_star_mean_size():
    cfg = TransmissionConfig(beta=0.5)
    rng = np.random.default_rng(12)
    net = star()
    adj = net.out_neighbors()
    sizes = [simulate_cascade(net, cfg, 0, rng, adj).size for _ in range(10_000)]
    assert np.mean(sizes) == pytest.approx(1 + 4 * 0.5, abs=0.1)


def test_powerlaw_simulation_gaps_at_least_one():
    cfg = TransmissionConfig("powerlaw", alpha=2.0, beta=1.0)
    c = simulate_cascade(star(6), cfg, 0, np.random.default_rng(1))
    assert np.all(c.times[1:] >= 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 1.0), st.sampled_from(["exp", "powerlaw"]))
def test_simulated_cascades_are_trees(seed, beta, model):
    rng = np.random.default_rng(seed)
    n = 30
    edges = {(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < 0.1}
    net = DirectedNetwork(n, edges)
    cfg = TransmissionConfig(model, alpha=2.0, beta=beta)
    c = simulate_cascade(net, cfg, int(rng.integers(n)), rng)
    t = c.as_dict()
    assert set(c.parents) == set(t) - {c.root}
    for v, u in c.parents.items():
        assert (u, v) in net.edges
        assert t[u] < t[v]


def test_corpus_determinism_and_coverage():
    net = generate_kronecker(KroneckerParams(CORE_PERIPHERY_SEED, 6, 90), 2)
    params = SimulationParams(TransmissionConfig(), coverage_target=0.9, rng_seed=4)
    a, sa = simulate_corpus(net, params)
    b, sb = simulate_corpus(net, params)
    assert len(a) == len(b) and all(x == y for x, y in zip(a, b))
    assert sa == sb
    assert sa.covered_fraction >= 0.9 and sa.target_reached
    assert sa.total_transmissions == a.total_transmissions()
    assert all(c.size >= 2 and c.times[0] == 0.0 for c in a)
    fractions = [coverage_stats(net, a.cascades[:i]).covered_fraction for i in range(len(a) + 1)]
    assert all(x <= y for x, y in zip(fractions, fractions[1:]))
    hist = sa.edge_histogram
    assert all(x >= y for x, y in zip(hist, hist[1:]))


def test_corpus_unreachable_target_is_flagged(caplog):
    net = DirectedNetwork(4, {(0, 1), (2, 3)})
    params = SimulationParams(TransmissionConfig(beta=0.5), coverage_target=1.0, max_cascades=1,
                              rng_seed=0)
    corpus, st_ = simulate_corpus(net, params)
    assert "below target" in caplog.text
    assert len(corpus) <= 1 and not st_.target_reached


def test_corpus_zero_target_is_empty():
    net = DirectedNetwork(3, {(0, 1)})
    corpus, st_ = simulate_corpus(net, SimulationParams(coverage_target=0.0, max_cascades=0))
    assert len(corpus) == 0 and st_.num_cascades == 0


def test_generate_cascades_stream_is_prefix_stable():
    net = generate_kronecker(KroneckerParams(CORE_PERIPHERY_SEED, 5, 40), 0)
    params = SimulationParams(max_cascades=30, rng_seed=9)
    long = [c for _, c in generate_cascades(net, params)]
    short = [c for _, c in generate_cascades(net, SimulationParams(max_cascades=10, rng_seed=9))]
    assert all(x == y for x, y in zip(short, long[:10]))


def _ten_node_cascade():
    return Cascade(np.arange(10), np.arange(10, dtype=float))


def test_perturbation_identity():
    c = _ten_node_cascade()
    assert perturb_cascade(c, 0.0, 0.0, 1, 0) is c


def test_missing_half_of_ten():
    c = _ten_node_cascade()
    for seed in range(5):
        assert perturb_cascade(c, 0.5, 0.0, seed, 0).size == 5


def test_missing_sets_are_nested():
    c = _ten_node_cascade()
    kept = [set(perturb_cascade(c, f, 0.0, 3, 7).nodes.tolist()) for f in (0.1, 0.3, 0.5)]
    assert kept[0] >= kept[1] >= kept[2]


def test_external_retimes_within_range_and_keeps_root():
    c = _ten_node_cascade()
    p = perturb_cascade(c, 0.0, 0.3, 2, 0)
    assert p.size == 10 and p.root == 0
    changed = [u for u in range(10) if p.time_of(u) != c.time_of(u)]
    assert 1 <= len(changed) <= 3
    assert np.all((p.times >= 0) & (p.times <= 9))


def test_perturb_corpus_small_cascades_survive():
    corpus = CascadeSet(3, [Cascade([0, 1], [0.0, 1.0])])
    out = perturb_corpus(corpus, 0.5, 0.5, 1)
    assert out[0].size == 1


@pytest.mark.parametrize("kwargs", [dict(missing_fraction=1.0), dict(external_fraction=-0.1),
                                    dict(coverage_target=1.5), dict(noise_std=-1)])
def test_simulation_params_validation(kwargs):
    with pytest.raises(ValueError):
        SimulationParams(**kwargs)

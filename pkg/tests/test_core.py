import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from netinf.core import (Cascade, CascadeSet, DirectedNetwork, TransmissionConfig, edge_weight,
                         edge_weight_from_delta, incubation_density, log_incubation_density,
                         sample_incubation, transmission_probability)


def test_exponential_density_at_zero_limit():
    cfg = TransmissionConfig("exp", alpha=1.0)
    assert incubation_density(cfg, 1e-300) == pytest.approx(1.0)


def test_density_closed_forms():
    assert incubation_density(TransmissionConfig("exp", alpha=2.0), 2.0) == pytest.approx(
        0.5 * math.exp(-1), rel=1e-15)
    assert incubation_density(TransmissionConfig("powerlaw", alpha=2.0), 2.0) == pytest.approx(0.25)


def test_powerlaw_clamp_option():
    plain = TransmissionConfig("powerlaw", alpha=2.0)
    clamped = TransmissionConfig("powerlaw", alpha=2.0, powerlaw_clamp=True)
    assert incubation_density(clamped, 0.5) == pytest.approx(1.0)
    assert incubation_density(plain, 0.5) == pytest.approx(4.0)
    assert incubation_density(clamped, 3.0) == incubation_density(plain, 3.0)


@pytest.mark.parametrize("delta", [0.0, -1.0, math.inf, math.nan])
def test_density_domain_errors(delta):
    with pytest.raises(ValueError):
        incubation_density(TransmissionConfig(), delta)


@pytest.mark.parametrize("model,alpha", [("exp", 0.3), ("exp", 1.0), ("exp", 4.0),
                                         ("powerlaw", 1.5), ("powerlaw", 2.0), ("powerlaw", 3.0)])
def test_density_normalizes(model, alpha):
    cfg = TransmissionConfig(model, alpha=alpha)
    lo = 0.0 if model == "exp" else 1.0
    total, _ = integrate.quad(lambda d: incubation_density(cfg, d) if d > 0 else 1 / alpha,
                              lo, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def _oracle_weight(beta, eps, delta, network):
    mpmath.mp.dps = 50
    if network:
        return float(mpmath.log(mpmath.mpf(beta) * mpmath.e ** (-mpmath.mpf(delta)) / mpmath.mpf(eps)))
    return float(mpmath.log(mpmath.e ** (-mpmath.mpf(delta))))


@pytest.mark.parametrize("network,t_v", [(True, 1.0), (False, 1.0), (True, 2.0)])
def test_edge_weight_against_arbitrary_precision(cfg, network, t_v):
    expected = _oracle_weight("0.5", "1e-9", t_v, network)
    assert edge_weight(cfg, network, 0.0, t_v) == pytest.approx(expected, abs=1e-12)


def test_edge_weight_reference_values(cfg):
    assert edge_weight(cfg, True, 0.0, 1.0) == pytest.approx(19.030119, abs=1e-6)
    assert edge_weight(cfg, False, 0.0, 1.0) == -1.0
    assert edge_weight(cfg, True, 0.0, 2.0) == pytest.approx(18.030119, abs=1e-6)


@pytest.mark.parametrize("t_u,t_v", [(1.0, 1.0), (2.0, 1.0)])
def test_edge_weight_absent_backwards(cfg, t_u, t_v):
    assert edge_weight(cfg, True, t_u, t_v) is None
    assert edge_weight(cfg, False, t_u, t_v) is None


def test_transmission_probability(cfg):
    assert transmission_probability(cfg, True, 1.0) == pytest.approx(0.183940, abs=1e-6)
    assert transmission_probability(cfg, True, 2.0) == pytest.approx(0.067668, abs=1e-6)
    assert transmission_probability(cfg, False, 1.0) == pytest.approx(3.6788e-10, rel=1e-4)


@given(st.floats(0.01, 100), st.floats(0.05, 1.0), st.floats(1e-12, 1e-2),
       st.sampled_from(["exp", "powerlaw"]), st.floats(1.1, 5))
def test_network_dominance(delta, beta, eps, model, alpha):
    cfg = TransmissionConfig(model, alpha=alpha, beta=beta, epsilon=min(eps, beta / 2))
    gap = edge_weight_from_delta(cfg, True, delta) - edge_weight_from_delta(cfg, False, delta)
    assert gap == pytest.approx(math.log(cfg.beta / cfg.epsilon), rel=1e-12)
    assert gap > 0


def test_vectorized_matches_scalar():
    cfg = TransmissionConfig("powerlaw", alpha=2.5)
    d = np.array([0.2, 1.0, 3.7])
    vec = log_incubation_density(cfg, d)
    assert [log_incubation_density(cfg, float(x)) for x in d] == pytest.approx(vec.tolist(), rel=0,
                                                                              abs=0)


@pytest.mark.parametrize("kwargs", [dict(alpha=0), dict(alpha=-1), dict(beta=0), dict(beta=1.2),
                                    dict(epsilon=0.6), dict(epsilon=0),
                                    dict(model="powerlaw", alpha=1.0), dict(model="gamma")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        TransmissionConfig(**kwargs)


def test_sampler_mean():
    rng = np.random.default_rng(3)
    exp = sample_incubation(TransmissionConfig("exp", alpha=2.0), rng, 200_000)
    assert exp.mean() == pytest.approx(2.0, rel=0.02)
    pl = sample_incubation(TransmissionConfig("powerlaw", alpha=3.0), rng, 200_000)
    assert pl.min() >= 1.0
    assert pl.mean() == pytest.approx(2.0, rel=0.03)  # (a-1)/(a-2)


def test_network_rejects_bad_edges():
    with pytest.raises(ValueError):
        DirectedNetwork(3, {(1, 1)})
    with pytest.raises(ValueError):
        DirectedNetwork(3, {(0, 3)})
    net = DirectedNetwork(3, {(0, 1), (1, 0)})
    assert (1, 0) in net and len(net) == 2


def test_cascade_ordering_and_validation():
    c = Cascade.from_mapping({2: 1.5, 0: 0.0, 1: 1.5, 3: math.inf})
    assert c.nodes.tolist() == [0, 1, 2]
    assert c.root == 0
    assert c.time_of(3) == math.inf
    assert c.hit_times(4).tolist() == [0.0, 1.5, 1.5, math.inf]
    with pytest.raises(ValueError):
        Cascade.from_mapping({0: 1.0, 1: 1.0})
    with pytest.raises(ValueError):
        Cascade.from_mapping({0: -1.0})
    with pytest.raises(ValueError):
        Cascade.from_mapping({})
    with pytest.raises(ValueError):
        CascadeSet(2, [Cascade.from_mapping({5: 0.0})])

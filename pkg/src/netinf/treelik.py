"""Per-cascade likelihood: the time-ordered DAG, its best tree, and the exact oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .core import (Cascade, CascadeSet, DirectedNetwork, TransmissionConfig,
                   edge_weight_from_delta, log_incubation_density)


@dataclass(frozen=True)
class Candidate:
    parent: int
    weight: float
    is_network: bool


@dataclass
class CascadeDag:
    """Infected nodes in (time, id) order and every strictly-earlier candidate parent."""

    infected: list[int]
    times: list[float]
    candidates: dict[int, list[Candidate]] = field(default_factory=dict)

    @property
    def root(self) -> int | None:
        return self.infected[0] if self.infected else None

    def is_empty(self) -> bool:
        return len(self.infected) < 2


@dataclass
class CascadeTree:
    parent: dict[int, int]
    weight_sum: float
    parent_weight: dict[int, float] = field(default_factory=dict)

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for v, u in self.parent.items()}


@dataclass(frozen=True)
class LikelihoodBreakdown:
    q: int        # network edges in the tree
    q_eps: int    # epsilon-edges in the tree
    s: int        # network edges out of infected nodes that did not transmit
    s_eps: int    # epsilon-edges out of infected nodes that did not transmit

    def log_likelihood(self, config: TransmissionConfig, log_incubation_sum: float) -> float:
        """Full log P(c|T) including the non-transmitting factors."""
        return (self.q * math.log(config.beta) + self.q_eps * math.log(config.epsilon)
                + self.s * math.log1p(-config.beta) + self.s_eps * math.log1p(-config.epsilon)
                + log_incubation_sum)


def build_cascade_dag(cascade: Cascade, network: DirectedNetwork,
                      config: TransmissionConfig) -> CascadeDag:
    nodes = cascade.nodes.tolist()
    times = cascade.times.tolist()
    dag = CascadeDag(nodes, times)
    if len(nodes) < 2:
        return dag
    for b in range(1, len(nodes)):
        v, tv = nodes[b], times[b]
        earlier = [a for a in range(b) if times[a] < tv]
        if not earlier:
            continue
        parents = [nodes[a] for a in earlier]
        is_net = np.array([(u, v) in network.edges for u in parents])
        deltas = np.array([tv - times[a] for a in earlier])
        weights = np.atleast_1d(edge_weight_from_delta(config, is_net, deltas))
        dag.candidates[v] = [Candidate(u, float(w), bool(f))
                             for u, w, f in zip(parents, weights, is_net)]
    return dag


def best_tree(dag: CascadeDag) -> CascadeTree:
    """Each node independently keeps its heaviest incoming candidate (smaller id on ties)."""
    parent: dict[int, int] = {}
    pw: dict[int, float] = {}
    for v, cands in dag.candidates.items():
        best = max(cands, key=lambda c: (c.weight, -c.parent))
        parent[v] = best.parent
        pw[v] = best.weight
    return CascadeTree(parent, math.fsum(pw.values()), pw)


def cascade_loglik(cascade: Cascade, network: DirectedNetwork, config: TransmissionConfig) -> float:
    if cascade.size < 2:
        return 0.0
    return best_tree(build_cascade_dag(cascade, network, config)).weight_sum


def corpus_loglik(cascades: CascadeSet, network: DirectedNetwork, config: TransmissionConfig) -> float:
    """Sum over cascades of the best-tree weight under ``network``."""
    return math.fsum(cascade_loglik(c, network, config) for c in cascades)


def corpus_improvement(cascades: CascadeSet, network: DirectedNetwork,
                       config: TransmissionConfig) -> float:
    """Log-likelihood gain of ``network`` over the edgeless graph."""
    empty = DirectedNetwork(network.n)
    return math.fsum(cascade_loglik(c, network, config) - cascade_loglik(c, empty, config)
                     for c in cascades)


def _log_transmission_matrix(cascade: Cascade, network: DirectedNetwork,
                             config: TransmissionConfig) -> np.ndarray:
    """log P'(u, v) over infected nodes in time order; -inf where u is not strictly earlier."""
    nodes = cascade.nodes.tolist()
    t = cascade.times
    m = len(nodes)
    logp = np.full((m, m), -np.inf)
    for b in range(1, m):
        for a in range(b):
            if t[a] < t[b]:
                scale = config.beta if (nodes[a], nodes[b]) in network.edges else config.epsilon
                logp[a, b] = math.log(scale) + log_incubation_density(config, t[b] - t[a])
    return logp


def exact_cascade_loglik(cascade: Cascade, network: DirectedNetwork,
                         config: TransmissionConfig) -> float:
    """Log of the sum over all root arborescences of the product of P'(u,v).

    With nodes in time order the reduced Kirchhoff matrix is triangular, so
    the sum factorizes into a product over nodes of their summed incoming
    transmission probabilities.
    """
    if cascade.size < 2:
        raise ValueError("exact likelihood needs at least two infected nodes")
    logp = _log_transmission_matrix(cascade, network, config)
    per_node = logsumexp(logp[:, 1:], axis=0)
    return float(np.sum(per_node))


def exact_cascade_likelihood(cascade: Cascade, network: DirectedNetwork,
                             config: TransmissionConfig) -> float:
    return math.exp(exact_cascade_loglik(cascade, network, config))


def matrix_tree_likelihood(cascade: Cascade, network: DirectedNetwork,
                           config: TransmissionConfig) -> float:
    """Same quantity via the general directed matrix-tree determinant (small cascades)."""
    w = np.exp(_log_transmission_matrix(cascade, network, config))
    lap = -w.copy()
    np.fill_diagonal(lap, w.sum(axis=0))
    return float(np.linalg.det(lap[1:, 1:]))


def tree_likelihood_breakdown(tree: CascadeTree, network: DirectedNetwork,
                              cascade: Cascade) -> LikelihoodBreakdown:
    q = sum(1 for v, u in tree.parent.items() if (u, v) in network.edges)
    q_eps = len(tree.parent) - q
    out_deg = network.out_degree()
    infected = cascade.nodes
    net_out = int(out_deg[infected].sum())
    eps_out = int(infected.size * (network.n - 1) - net_out)
    return LikelihoodBreakdown(q=q, q_eps=q_eps, s=net_out - q, s_eps=eps_out - q_eps)

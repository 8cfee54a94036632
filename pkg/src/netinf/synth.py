"""Ground-truth network generators and the cascade simulator."""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Cascade, CascadeSet, DirectedNetwork, TransmissionConfig, sample_incubation

logger = logging.getLogger(__name__)

HIERARCHICAL_SEED = ((0.962, 0.107), (0.107, 0.962))
CORE_PERIPHERY_SEED = ((0.962, 0.535), (0.535, 0.107))
RANDOM_SEED = ((0.5, 0.5), (0.5, 0.5))


@dataclass(frozen=True)
class KroneckerParams:
    seed_matrix: tuple = RANDOM_SEED
    power: int = 10
    target_edges: int | None = None

    def __post_init__(self):
        seed = np.asarray(self.seed_matrix, dtype=np.float64)
        if seed.shape != (2, 2):
            raise ValueError("Kronecker seed must be 2x2")
        if np.any(seed < 0) or np.any(seed > 1):
            raise ValueError("Kronecker seed entries must lie in [0, 1]")
        if self.power < 1:
            raise ValueError("power must be a positive integer")
        if self.target_edges is not None and self.target_edges < 1:
            raise ValueError("target_edges must be positive")
        object.__setattr__(self, "seed_matrix", tuple(map(tuple, seed.tolist())))

    @property
    def n(self) -> int:
        return 2 ** self.power


@dataclass(frozen=True)
class ForestFireParams:
    n: int
    forward_prob: float = 0.20
    backward_prob: float = 0.17

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("forest fire needs at least one node")
        for p in (self.forward_prob, self.backward_prob):
            if not 0 <= p < 1:
                raise ValueError("burning probabilities must lie in [0, 1)")


@dataclass(frozen=True)
class SimulationParams:
    config: TransmissionConfig = field(default_factory=TransmissionConfig)
    coverage_target: float = 0.99
    max_cascades: int = 100_000
    missing_fraction: float = 0.0
    external_fraction: float = 0.0
    noise_std: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.coverage_target <= 1:
            raise ValueError("coverage_target must lie in [0, 1]")
        if self.max_cascades < 0:
            raise ValueError("max_cascades must be non-negative")
        if not 0 <= self.missing_fraction < 1:
            raise ValueError("missing_fraction must lie in [0, 1)")
        if not 0 <= self.external_fraction < 1:
            raise ValueError("external_fraction must lie in [0, 1)")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


@dataclass
class CoverageStats:
    num_cascades: int
    total_transmissions: int
    covered_fraction: float
    edge_histogram: list[int]  # edge_histogram[l-1] = |E_l|
    target_reached: bool = True
    attempts: int = 0

    def as_items(self) -> list[tuple[str, object]]:
        items = [("num_cascades", self.num_cascades),
                 ("total_transmissions", self.total_transmissions),
                 ("covered_fraction", self.covered_fraction),
                 ("target_reached", self.target_reached),
                 ("attempts", self.attempts)]
        items += [(f"E_{l}", count) for l, count in enumerate(self.edge_histogram, start=1)]
        return items


# -- generators ---------------------------------------------------------------

def kronecker_probabilities(params: KroneckerParams) -> np.ndarray:
    """Dense edge-probability matrix of the k-th Kronecker power."""
    seed = np.asarray(params.seed_matrix)
    probs = seed.copy()
    for _ in range(params.power - 1):
        probs = np.kron(probs, seed)
    return probs


def generate_kronecker(params: KroneckerParams, rng_seed: int = 0) -> DirectedNetwork:
    rng = np.random.default_rng(rng_seed)
    n = params.n
    if params.target_edges is None:
        probs = kronecker_probabilities(params)
        np.fill_diagonal(probs, 0.0)
        src, dst = np.nonzero(rng.random(probs.shape) < probs)
        return DirectedNetwork(n, frozenset(zip(src.tolist(), dst.tolist())))

    m = params.target_edges
    if m > n * (n - 1):
        raise ValueError(f"cannot place {m} edges on {n} nodes without self-loops")
    seed = np.asarray(params.seed_matrix)
    positive = int(np.count_nonzero(seed > 0)) ** params.power
    positive_loops = int(np.count_nonzero(np.diag(seed) > 0)) ** params.power
    if m > positive - positive_loops:
        raise ValueError(f"only {positive - positive_loops} pairs have positive probability, "
                         f"{m} edges requested")

    # quadrant descent: one categorical draw per level picks a (row bit, col bit)
    quad = seed.ravel() / seed.sum()
    edges: set[tuple[int, int]] = set()
    weights = 2 ** np.arange(params.power - 1, -1, -1)
    while len(edges) < m:
        batch = max(64, 2 * (m - len(edges)))
        picks = rng.choice(4, size=(batch, params.power), p=quad)
        src = (picks // 2) @ weights
        dst = (picks % 2) @ weights
        for u, v in zip(src.tolist(), dst.tolist()):
            if u != v:
                edges.add((u, v))
                if len(edges) == m:
                    break
    return DirectedNetwork(n, frozenset(edges))


def generate_forest_fire(params: ForestFireParams, rng_seed: int = 0) -> DirectedNetwork:
    """Directed Forest Fire growth; new nodes link to every node they burn.

    Per burning step the number of out-links (in-links) followed is
    geometric with mean p/(1-p). A zero forward probability switches
    burning off entirely, so each node only links to its ambassador.
    """
    rng = np.random.default_rng(rng_seed)
    out_adj: list[list[int]] = [[] for _ in range(params.n)]
    in_adj: list[list[int]] = [[] for _ in range(params.n)]
    edges: set[tuple[int, int]] = set()
    burning = params.forward_prob > 0

    for v in range(1, params.n):
        ambassador = int(rng.integers(v))
        visited = {v, ambassador}
        frontier = [ambassador]
        burned = [ambassador]
        while frontier and burning:
            w = frontier.pop(0)
            n_fwd = int(rng.geometric(1.0 - params.forward_prob)) - 1
            n_bwd = int(rng.geometric(1.0 - params.backward_prob)) - 1
            fresh_out = [x for x in out_adj[w] if x not in visited]
            fresh_in = [x for x in in_adj[w] if x not in visited]
            picked = []
            if n_fwd and fresh_out:
                idx = rng.permutation(len(fresh_out))[:n_fwd]
                picked += [fresh_out[i] for i in idx]
            fresh_in = [x for x in fresh_in if x not in picked]
            if n_bwd and fresh_in:
                idx = rng.permutation(len(fresh_in))[:n_bwd]
                picked += [fresh_in[i] for i in idx]
            for x in picked:
                visited.add(x)
                burned.append(x)
                frontier.append(x)
        for x in burned:
            edges.add((v, x))
            out_adj[v].append(x)
            in_adj[x].append(v)
    return DirectedNetwork(params.n, frozenset(edges))


# -- cascades -----------------------------------------------------------------

def _cascade_rng(rng_seed: int, index: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(rng_seed) & 0xFFFFFFFFFFFFFFFF, index, stream])


def simulate_cascade(network: DirectedNetwork, config: TransmissionConfig, root: int,
                     rng: np.random.Generator, out_adj=None, noise_std: float = 0.0) -> Cascade:
    """Continuous-time independent cascade from ``root`` at t = 0.

    Infections are processed in ascending time order; each newly infected
    node tries every still-uninfected out-neighbour once with probability
    beta. The earliest arrival wins, so the result is a tree.
    """
    if not 0 <= root < network.n:
        raise ValueError(f"root {root} outside [0, {network.n})")
    if out_adj is None:
        out_adj = network.out_neighbors()
    times: dict[int, float] = {}
    parents: dict[int, int] = {}
    heap: list[tuple[float, int, int]] = [(0.0, root, -1)]
    while heap:
        t, v, par = heapq.heappop(heap)
        if v in times:
            continue
        times[v] = t
        if par >= 0:
            parents[v] = par
        for w in out_adj[v]:
            if w in times or rng.random() >= config.beta:
                continue
            delta = float(sample_incubation(config, rng))
            if noise_std > 0:
                delta = abs(delta + rng.normal(0.0, noise_std))
            if delta <= 0.0:
                delta = np.nextafter(0.0, 1.0)
            heapq.heappush(heap, (t + delta, w, v))
    nodes = np.fromiter(times.keys(), dtype=np.int64, count=len(times))
    vals = np.fromiter(times.values(), dtype=np.float64, count=len(times))
    return Cascade(nodes, vals, parents)


def coverage_stats(network: DirectedNetwork, cascades, target_reached=True, attempts=0) -> CoverageStats:
    counts: dict[tuple[int, int], int] = {}
    for c in cascades:
        for v, u in (c.parents or {}).items():
            if (u, v) in network.edges:
                counts[(u, v)] = counts.get((u, v), 0) + 1
    max_l = max(counts.values(), default=0)
    per_edge = np.array(list(counts.values()), dtype=np.int64)
    hist = [int(np.count_nonzero(per_edge >= l)) for l in range(1, max_l + 1)]
    covered = len(counts) / len(network.edges) if network.edges else 1.0
    cascades = list(cascades)
    return CoverageStats(num_cascades=len(cascades),
                         total_transmissions=sum(c.size - 1 for c in cascades),
                         covered_fraction=covered, edge_histogram=hist,
                         target_reached=target_reached, attempts=attempts)


def generate_cascades(network: DirectedNetwork, params: SimulationParams, stop=None,
                      max_attempts: int | None = None):
    """Yield (index, cascade) for multi-node cascades with uniformly random roots.

    ``stop(cascade)`` is called after each kept cascade; returning True ends
    the stream. Each cascade draws from its own generator seeded by
    (rng_seed, attempt index), so the stream is reproducible.
    """
    out_adj = network.out_neighbors()
    if max_attempts is None:
        max_attempts = max(1000, 50 * params.max_cascades)
    kept = 0
    for attempt in range(max_attempts):
        if kept >= params.max_cascades:
            return
        rng = _cascade_rng(params.rng_seed, attempt)
        root = int(rng.integers(network.n))
        c = simulate_cascade(network, params.config, root, rng, out_adj, params.noise_std)
        if c.size < 2:
            continue
        kept += 1
        yield attempt, c
        if stop is not None and stop(c):
            return


def _removal_count(size: int, fraction: float) -> int:
    if fraction <= 0 or size < 2:
        return 0
    return min(math.ceil(fraction * size - 1e-12), size - 1)


def perturb_cascade(cascade: Cascade, missing_fraction: float, external_fraction: float,
                    rng_seed: int, index: int) -> Cascade:
    """Drop a fraction of infected nodes and re-time another fraction as exogenous hits.

    Victims come from a fixed per-cascade permutation, so for one seed the
    affected sets are nested as the fractions grow.
    """
    if missing_fraction <= 0 and external_fraction <= 0:
        return cascade
    nodes = cascade.nodes.copy()
    times = cascade.times.copy()

    n_missing = _removal_count(nodes.size, missing_fraction)
    if n_missing:
        perm = _cascade_rng(rng_seed, index, 1).permutation(nodes.size)
        keep = np.sort(perm[n_missing:])
        nodes, times = nodes[keep], times[keep]

    n_external = _removal_count(nodes.size, external_fraction)
    if n_external:
        lo, hi = float(times[0]), float(times[-1])
        rng = _cascade_rng(rng_seed, index, 2)
        order = rng.permutation(nodes.size - 1) + 1  # never re-time the earliest node
        new_times = rng.uniform(lo, hi, size=nodes.size - 1)
        victims = order[:n_external]
        times[victims] = np.maximum(new_times[:n_external], np.nextafter(times[0], np.inf))
    parents = None
    if cascade.parents is not None:
        alive = set(nodes.tolist())
        parents = {v: u for v, u in cascade.parents.items() if v in alive and u in alive}
    return Cascade(nodes, times, parents)


def perturb_corpus(cascades: CascadeSet, missing_fraction: float, external_fraction: float,
                   rng_seed: int, indices=None) -> CascadeSet:
    if indices is None:
        indices = range(len(cascades))
    out = [perturb_cascade(c, missing_fraction, external_fraction, rng_seed, idx)
           for idx, c in zip(indices, cascades)]
    return CascadeSet(cascades.n, out, cascades.node_labels)


def simulate_corpus(network: DirectedNetwork, params: SimulationParams):
    """Simulate until a ``coverage_target`` share of true edges transmitted at least once.

    Returns (CascadeSet, CoverageStats). Coverage is measured on the clean
    cascades, before the missing/external perturbations are applied.
    """
    covered: set[tuple[int, int]] = set()
    n_edges = len(network.edges)

    def reached() -> bool:
        return n_edges == 0 or len(covered) >= params.coverage_target * n_edges

    def stop(c: Cascade) -> bool:
        for v, u in c.parents.items():
            if (u, v) in network.edges:
                covered.add((u, v))
        return reached()

    kept: list[Cascade] = []
    indices: list[int] = []
    attempts = 0
    if not (params.coverage_target <= 0 or reached()):
        for idx, c in generate_cascades(network, params, stop):
            kept.append(c)
            indices.append(idx)
            attempts = idx + 1
    target_reached = reached() or params.coverage_target <= 0
    if not target_reached:
        logger.warning("coverage %.3f below target %.3f after %d cascades",
                       len(covered) / max(n_edges, 1), params.coverage_target, len(kept))
    stats = coverage_stats(network, kept, target_reached, attempts)
    clean = CascadeSet(network.n, kept)
    corpus = perturb_corpus(clean, params.missing_fraction, params.external_fraction,
                            params.rng_seed, indices)
    return corpus, stats

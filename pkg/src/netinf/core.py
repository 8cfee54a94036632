"""Data model and transmission-probability primitives.

Everything downstream (simulation, tree likelihoods, the greedy optimizer)
speaks in terms of the types and weight functions defined here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np


class IncubationModel(str, Enum):
    EXPONENTIAL = "exp"
    POWER_LAW = "powerlaw"

    @classmethod
    def parse(cls, value) -> "IncubationModel":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"exp": cls.EXPONENTIAL, "exponential": cls.EXPONENTIAL,
                   "powerlaw": cls.POWER_LAW, "power-law": cls.POWER_LAW,
                   "power_law": cls.POWER_LAW, "pl": cls.POWER_LAW}
        if key not in aliases:
            raise ValueError(f"unknown incubation model {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class TransmissionConfig:
    """Incubation model, edge transmission probability and epsilon-edge probability.

    The power-law kernel (alpha-1) * delta^-alpha is the normalized density on
    [1, inf), which is where the simulator draws from. Gaps below 1 keep the
    same kernel unless ``powerlaw_clamp`` is set, in which case they take the
    value at delta = 1.
    """

    model: IncubationModel = IncubationModel.EXPONENTIAL
    alpha: float = 1.0
    beta: float = 0.5
    epsilon: float = 1e-9
    powerlaw_clamp: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model", IncubationModel.parse(self.model))
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.model is IncubationModel.POWER_LAW and self.alpha <= 1:
            raise ValueError("power-law incubation needs alpha > 1 to normalize")
        if not (0 < self.beta <= 1):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not (0 < self.epsilon < self.beta):
            raise ValueError(f"epsilon must lie in (0, beta), got {self.epsilon}")

    @property
    def log_network_bonus(self) -> float:
        """ln(beta / epsilon): the weight gap between a network edge and an epsilon-edge."""
        return math.log(self.beta) - math.log(self.epsilon)


@dataclass(frozen=True)
class DirectedNetwork:
    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("node count must be non-negative")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop ({u}, {v}) not allowed")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside node range [0, {self.n})")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedNetwork":
        return cls(n, frozenset(edges))

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def out_neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            adj[u].append(v)
        return adj

    def in_neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            adj[v].append(u)
        return adj

    def out_degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, _ in self.edges:
            deg[u] += 1
        return deg


@dataclass(frozen=True, eq=False)
class Cascade:
    """Observed hit times of one contagion.

    Only infected nodes are stored; every other node implicitly has t = inf.
    Nodes are kept sorted by (time, node id), so ``nodes[0]`` is the root.
    ``parents`` optionally carries the true propagation tree when the cascade
    came out of the simulator.
    """

    nodes: np.ndarray
    times: np.ndarray
    parents: Mapping[int, int] | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64).ravel()
        times = np.asarray(self.times, dtype=np.float64).ravel()
        if nodes.shape != times.shape:
            raise ValueError("nodes and times must have equal length")
        if nodes.size == 0:
            raise ValueError("a cascade needs at least one infected node")
        if not np.all(np.isfinite(times)):
            raise ValueError("stored hit times must be finite")
        if np.any(times < 0):
            raise ValueError("hit times must be non-negative")
        if np.any(nodes < 0):
            raise ValueError("node ids must be non-negative")
        if np.unique(nodes).size != nodes.size:
            raise ValueError("a node appears twice in one cascade")
        order = np.lexsort((nodes, times))
        nodes, times = nodes[order], times[order]
        if times.size > 1 and times[1] == times[0]:
            raise ValueError("the earliest hit time must be unique")
        nodes.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "times", times)

    @classmethod
    def from_mapping(cls, hits: Mapping[int, float], parents=None) -> "Cascade":
        finite = [(int(k), float(t)) for k, t in hits.items() if math.isfinite(t)]
        return cls(np.array([k for k, _ in finite], dtype=np.int64),
                   np.array([t for _, t in finite], dtype=np.float64), parents)

    @property
    def root(self) -> int:
        return int(self.nodes[0])

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def __len__(self) -> int:
        return self.size

    def as_dict(self) -> dict[int, float]:
        return {int(u): float(t) for u, t in zip(self.nodes, self.times)}

    def time_of(self, node: int) -> float:
        hit = np.nonzero(self.nodes == node)[0]
        return float(self.times[hit[0]]) if hit.size else math.inf

    def hit_times(self, n: int) -> np.ndarray:
        """Dense length-n vector with inf for uninfected nodes."""
        t = np.full(n, np.inf)
        t[self.nodes] = self.times
        return t

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cascade):
            return NotImplemented
        return (np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.times, other.times))

    __hash__ = None


@dataclass
class CascadeSet:
    n: int
    cascades: list[Cascade] = field(default_factory=list)
    node_labels: list[str] | None = None

    def __post_init__(self):
        for c in self.cascades:
            if c.nodes.size and int(c.nodes.max()) >= self.n:
                raise ValueError(f"cascade references node {int(c.nodes.max())} >= n={self.n}")
        if self.node_labels is not None and len(self.node_labels) != self.n:
            raise ValueError("node_labels must have one entry per node")

    def __len__(self) -> int:
        return len(self.cascades)

    def __iter__(self):
        return iter(self.cascades)

    def __getitem__(self, idx):
        return self.cascades[idx]

    def subset(self, indices: Sequence[int]) -> "CascadeSet":
        return CascadeSet(self.n, [self.cascades[i] for i in indices], self.node_labels)

    def total_transmissions(self) -> int:
        return sum(c.size - 1 for c in self.cascades)


def _check_delta(delta):
    d = np.asarray(delta, dtype=np.float64)
    if not np.all(np.isfinite(d)):
        raise ValueError("incubation time must be finite")
    if np.any(d <= 0):
        raise ValueError("incubation time must be positive")
    return d


def _scalar_or_array(value: np.ndarray, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


def log_incubation_density(config: TransmissionConfig, delta):
    """Natural log of the incubation density; accepts scalars or arrays."""
    d = _check_delta(delta)
    if config.model is IncubationModel.EXPONENTIAL:
        out = -np.log(config.alpha) - d / config.alpha
    else:
        if config.powerlaw_clamp:
            d = np.maximum(d, 1.0)
        out = np.log(config.alpha - 1.0) - config.alpha * np.log(d)
    return _scalar_or_array(out, delta)


def incubation_density(config: TransmissionConfig, delta):
    return _scalar_or_array(np.exp(np.asarray(log_incubation_density(config, delta))), delta)


def transmission_probability(config: TransmissionConfig, is_network_edge: bool, delta):
    scale = config.beta if is_network_edge else config.epsilon
    return _scalar_or_array(scale * np.asarray(incubation_density(config, delta)), delta)


def edge_weight_from_delta(config: TransmissionConfig, is_network_edge, delta):
    """log P'(u,v) - log(epsilon) for a positive gap ``delta``.

    ``is_network_edge`` may be a boolean array aligned with ``delta``.
    """
    logf = np.asarray(log_incubation_density(config, delta))
    bonus = np.where(is_network_edge, config.log_network_bonus, 0.0)
    return _scalar_or_array(bonus + logf, delta)


def edge_weight(config: TransmissionConfig, is_network_edge: bool, t_u: float, t_v: float):
    """Weight of the pair (u, v) inside one cascade, or None when u is not strictly earlier."""
    if not (math.isfinite(t_u) and math.isfinite(t_v)):
        raise ValueError("edge weights need finite hit times")
    if t_u >= t_v:
        return None
    return edge_weight_from_delta(config, is_network_edge, t_v - t_u)


def sample_incubation(config: TransmissionConfig, rng: np.random.Generator, size=None):
    """Draw incubation times from the normalized density."""
    if config.model is IncubationModel.EXPONENTIAL:
        return rng.exponential(config.alpha, size=size)
    u = rng.random(size=size)
    return (1.0 - u) ** (-1.0 / (config.alpha - 1.0))

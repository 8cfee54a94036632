"""Greedy network inference with localized updates and lazy gain evaluation.

The optimizer never materializes the n^2 candidate space. Only ordered
pairs (j, i) that appear in some cascade with t_j < t_i can ever have a
positive marginal gain, so those are indexed once up front:

* a *slot* is one (cascade, infected non-root node) occurrence; it holds
  the current best incoming weight and parent for that node in that cascade;
* an *entry* is one (candidate edge, slot) occurrence with the weight the
  candidate would have as a network edge.

The gain of (j, i) only reads slots belonging to node i, so selecting
(j*, i*) can only change gains of candidates that also point into i*.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import CascadeSet, DirectedNetwork, TransmissionConfig, log_incubation_density

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    NAIVE = "naive"
    LAZY = "lazy_localized"

    @classmethod
    def parse(cls, value) -> "Strategy":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        if key in ("fast", "lazy", "lazy_localized"):
            return cls.LAZY
        if key == "naive":
            return cls.NAIVE
        raise ValueError(f"unknown strategy {value!r}")


@dataclass(frozen=True)
class StoppingRule:
    mode: str = "bound_fraction"
    k: int | None = None
    x: float = 0.85

    def __post_init__(self):
        if self.mode not in ("fixed_k", "bound_fraction", "nonpositive_gain"):
            raise ValueError(f"unknown stopping mode {self.mode!r}")
        if self.mode == "fixed_k" and (self.k is None or self.k < 0):
            raise ValueError("fixed_k needs a non-negative k")
        if self.mode == "bound_fraction" and not 0 < self.x < 1:
            raise ValueError("bound fraction x must lie in (0, 1)")

    @classmethod
    def fixed(cls, k: int) -> "StoppingRule":
        return cls("fixed_k", k=k)

    @classmethod
    def bound_fraction(cls, x: float = 0.85) -> "StoppingRule":
        return cls("bound_fraction", x=x)

    @classmethod
    def exhaust(cls) -> "StoppingRule":
        return cls("nonpositive_gain")


@dataclass(frozen=True)
class BoundReport:
    k: int
    objective: float
    online_bound: float

    @property
    def ratio(self) -> float:
        if self.online_bound <= 0:
            return 1.0
        return self.objective / self.online_bound


@dataclass(frozen=True)
class ChosenEdge:
    edge: tuple[int, int]
    gain: float
    iteration: int


class PairIndex:
    """Co-infected ordered pairs of a corpus, laid out for fast gain evaluation."""

    def __init__(self, cascades: CascadeSet, config: TransmissionConfig):
        self.n = cascades.n
        self.config = config
        self.num_cascades = len(cascades)

        slot_cascade, slot_node = [], []
        e_slot, e_src, e_logf = [], [], []
        next_slot = 0
        for ci, c in enumerate(cascades):
            m = c.size
            if m < 2:
                continue
            a, b = np.triu_indices(m, k=1)
            t = c.times
            forward = t[a] < t[b]
            a, b = a[forward], b[forward]
            # slot numbering follows infected order; node positions 1..m-1
            has_parent = np.zeros(m, dtype=bool)
            has_parent[b] = True
            pos = np.flatnonzero(has_parent)
            slot_of_pos = np.full(m, -1, dtype=np.int64)
            slot_of_pos[pos] = next_slot + np.arange(pos.size)
            next_slot += pos.size
            slot_cascade.append(np.full(pos.size, ci, dtype=np.int64))
            slot_node.append(c.nodes[pos])
            e_slot.append(slot_of_pos[b])
            e_src.append(c.nodes[a])
            e_logf.append(np.atleast_1d(log_incubation_density(config, t[b] - t[a])))

        def cat(parts, dtype):
            return np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype=dtype)

        self.slot_cascade = cat(slot_cascade, np.int64)
        self.slot_node = cat(slot_node, np.int64)
        e_slot = cat(e_slot, np.int64)
        e_src = cat(e_src, np.int64)
        e_logf = cat(e_logf, np.float64)
        e_dst = self.slot_node[e_slot]

        key = e_src * self.n + e_dst
        order = np.lexsort((e_slot, key))
        key = key[order]
        self.entry_slot = e_slot[order]
        self.entry_src = e_src[order]
        self.entry_eps = e_logf[order]
        self.entry_net = self.entry_eps + config.log_network_bonus
        keys, starts = np.unique(key, return_index=True)
        self.cand_src = (keys // self.n).astype(np.int64)
        self.cand_dst = (keys % self.n).astype(np.int64)
        self.cand_start = np.append(starts, key.size).astype(np.int64)
        self.entry_cand = np.repeat(np.arange(keys.size), np.diff(self.cand_start))
        self._cand_lookup = {int(k): i for i, k in enumerate(keys.tolist())}

        self.num_slots = self.slot_node.size
        # C_i: cascades in which node i has at least one earlier node
        self.node_cascades = [set() for _ in range(self.n)]
        for ci, v in zip(self.slot_cascade.tolist(), self.slot_node.tolist()):
            self.node_cascades[v].add(ci)

    @property
    def num_candidates(self) -> int:
        return self.cand_src.size

    @property
    def num_entries(self) -> int:
        return self.entry_slot.size

    def candidate_id(self, edge) -> int | None:
        j, i = edge
        return self._cand_lookup.get(int(j) * self.n + int(i))

    def edge_of(self, cid: int) -> tuple[int, int]:
        return int(self.cand_src[cid]), int(self.cand_dst[cid])

    def best_parents(self, in_graph: np.ndarray):
        """From-scratch best tree of every cascade given a per-candidate membership mask."""
        w = np.where(in_graph[self.entry_cand], self.entry_net, self.entry_eps)
        order = np.lexsort((self.entry_src, -w, self.entry_slot))
        slots = self.entry_slot[order]
        first = np.ones(slots.size, dtype=bool)
        first[1:] = slots[1:] != slots[:-1]
        pick = order[first]
        weight = np.empty(self.num_slots)
        parent = np.empty(self.num_slots, dtype=np.int64)
        weight[self.entry_slot[pick]] = w[pick]
        parent[self.entry_slot[pick]] = self.entry_src[pick]
        return weight, parent


class GreedyState:
    """Current inferred graph plus the optimal tree of every cascade under it."""

    def __init__(self, index: PairIndex, edges=()):
        self.index = index
        self.in_graph = np.zeros(index.num_candidates, dtype=bool)
        self.extra_edges: set[tuple[int, int]] = set()
        for e in edges:
            cid = index.candidate_id(e)
            if cid is None:
                self.extra_edges.add(tuple(e))
            else:
                self.in_graph[cid] = True
        self.base_weight, _ = index.best_parents(np.zeros(index.num_candidates, dtype=bool))
        self.slot_weight, self.slot_parent = index.best_parents(self.in_graph)
        self.chosen: list[ChosenEdge] = []
        self.objective = float(np.sum(self.slot_weight) - np.sum(self.base_weight))
        self.evaluations = 0
        # number of additions after which each target node's slots last changed
        self.last_change = np.zeros(index.n, dtype=np.int64)

    # -- gains ---------------------------------------------------------------
    def gain(self, cid: int) -> float:
        """Marginal gain of candidate ``cid``; counts as one evaluation."""
        self.evaluations += 1
        if self.in_graph[cid]:
            return 0.0
        lo, hi = self.index.cand_start[cid], self.index.cand_start[cid + 1]
        d = self.index.entry_net[lo:hi] - self.slot_weight[self.index.entry_slot[lo:hi]]
        return float(np.sum(d[d > 0]))

    def improved_cascades(self, cid: int) -> set[int]:
        idx = self.index
        lo, hi = idx.cand_start[cid], idx.cand_start[cid + 1]
        slots = idx.entry_slot[lo:hi]
        better = idx.entry_net[lo:hi] > self.slot_weight[slots]
        return set(idx.slot_cascade[slots[better]].tolist())

    def all_gains(self) -> np.ndarray:
        """Exact current gains of every candidate in one vectorized pass (not counted)."""
        idx = self.index
        d = idx.entry_net - self.slot_weight[idx.entry_slot]
        np.maximum(d, 0.0, out=d)
        g = np.bincount(idx.entry_cand, weights=d, minlength=idx.num_candidates)
        g[self.in_graph] = 0.0
        return g

    # -- updates -------------------------------------------------------------
    def add(self, cid: int, gain: float, iteration: int, localized: bool = True):
        idx = self.index
        j, i = idx.edge_of(cid)
        self.in_graph[cid] = True
        if localized:
            lo, hi = idx.cand_start[cid], idx.cand_start[cid + 1]
            slots = idx.entry_slot[lo:hi]
            w_new = idx.entry_net[lo:hi]
            w_old = self.slot_weight[slots]
            better = w_new > w_old
            # equal weight: the smaller parent id wins, as in a from-scratch rebuild
            tie = (w_new == w_old) & (j < self.slot_parent[slots])
            upd = slots[better | tie]
            self.slot_weight[upd] = w_new[better | tie]
            self.slot_parent[upd] = j
        else:
            self.slot_weight, self.slot_parent = idx.best_parents(self.in_graph)
        self.objective += gain
        self.chosen.append(ChosenEdge((j, i), gain, iteration))
        self.last_change[i] = len(self.chosen)

    # -- views ---------------------------------------------------------------
    def network(self) -> DirectedNetwork:
        edges = {c.edge for c in self.chosen}
        edges |= {self.index.edge_of(int(c)) for c in np.flatnonzero(self.in_graph)}
        return DirectedNetwork(self.index.n, frozenset(edges | self.extra_edges))

    def trees(self) -> list[dict[int, int]]:
        """Parent map of every cascade's current best tree."""
        out: list[dict[int, int]] = [dict() for _ in range(self.index.num_cascades)]
        for c, v, p in zip(self.index.slot_cascade.tolist(), self.index.slot_node.tolist(),
                           self.slot_parent.tolist()):
            out[c][v] = p
        return out

    def cascade_weights(self) -> np.ndarray:
        w = np.zeros(self.index.num_cascades)
        np.add.at(w, self.index.slot_cascade, self.slot_weight)
        return w

    def bound(self, k: int) -> BoundReport:
        gains = self.all_gains()
        positive = gains[gains > 0]
        k = min(k, positive.size)
        top = 0.0
        if k > 0:
            top = float(np.sum(np.sort(positive)[::-1][:k]))
        return BoundReport(len(self.chosen), self.objective, self.objective + top)


def marginal_gain(state: GreedyState, edge) -> tuple[float, set[int]]:
    """Gain of adding ``edge`` to the state's graph and the cascades whose tree it improves."""
    cid = state.index.candidate_id(edge)
    if cid is None or state.in_graph[cid]:
        return 0.0, set()
    return state.gain(cid), state.improved_cascades(cid)


def online_bound(state: GreedyState, k: int | None = None) -> BoundReport:
    """Objective plus the k largest positive current gains; k defaults to |G|."""
    if k is None:
        k = len(state.chosen)
    return state.bound(k)


def _select_naive(state: GreedyState) -> tuple[int, float]:
    best, best_gain = -1, -math.inf
    for cid in range(state.index.num_candidates):
        if state.in_graph[cid]:
            continue
        g = state.gain(cid)
        if g > best_gain:  # strict: lower candidate id (lexicographic edge) keeps ties
            best, best_gain = cid, g
    return best, best_gain


class _LazyQueue:
    """Max-heap of possibly stale gains.

    Each key is stamped with the number of additions made when it was
    computed; it is fresh if no later addition touched its target node.
    """

    def __init__(self, state: GreedyState):
        self.state = state
        self.heap: list[tuple[float, int, int]] = []
        for cid in range(state.index.num_candidates):
            if not state.in_graph[cid]:
                self.heap.append((-state.gain(cid), cid, 0))
        heapq.heapify(self.heap)

    def select(self) -> tuple[int, float]:
        st = self.state
        dst = st.index.cand_dst
        now = len(st.chosen)
        while self.heap:
            neg, cid, stamp = self.heap[0]
            if stamp >= st.last_change[dst[cid]]:
                heapq.heappop(self.heap)
                return cid, -neg
            heapq.heapreplace(self.heap, (-st.gain(cid), cid, now))
        return -1, -math.inf


def run_greedy(cascades: CascadeSet, config: TransmissionConfig,
               stopping: StoppingRule | None = None, strategy="lazy_localized",
               track_bounds: bool = True, index: PairIndex | None = None):
    """Greedily add the edge of largest marginal gain until the stopping rule fires.

    Returns (inferred network, per-iteration BoundReports, final GreedyState).
    Bound reports are computed from an exact vectorized gain pass and do not
    count towards ``state.evaluations``.
    """
    stopping = stopping or StoppingRule.bound_fraction()
    strategy = Strategy.parse(strategy)
    if index is None:
        index = PairIndex(cascades, config)
    state = GreedyState(index)
    reports: list[BoundReport] = []
    if stopping.mode == "fixed_k" and stopping.k == 0:
        return state.network(), reports, state

    need_bounds = track_bounds or stopping.mode == "bound_fraction"
    queue = _LazyQueue(state) if strategy is Strategy.LAZY else None
    iteration = 0
    while True:
        if stopping.mode == "fixed_k" and len(state.chosen) >= stopping.k:
            break
        if queue is None:
            cid, g = _select_naive(state)
        else:
            cid, g = queue.select()
        if cid < 0 or g <= 0:
            if stopping.mode == "fixed_k":
                logger.warning("no positive-gain edge left after %d of %d edges",
                               len(state.chosen), stopping.k)
            break
        state.add(cid, g, iteration, localized=strategy is Strategy.LAZY)
        iteration += 1
        if need_bounds:
            rep = state.bound(len(state.chosen))
            reports.append(rep)
            if stopping.mode == "bound_fraction" and rep.objective >= stopping.x * rep.online_bound:
                break
    return state.network(), reports, state


def inferred_order(state: GreedyState) -> list[tuple[int, int]]:
    return [c.edge for c in state.chosen]


def baseline_scores(cascades: CascadeSet, config: TransmissionConfig,
                    index: PairIndex | None = None):
    """Per-candidate sum over cascades of the incubation density of the pair's gap."""
    if index is None:
        index = PairIndex(cascades, config)
    scores = np.bincount(index.entry_cand, weights=np.exp(index.entry_eps),
                         minlength=index.num_candidates)
    return index, scores


def baseline_infer(cascades: CascadeSet, config: TransmissionConfig, k: int,
                   index: PairIndex | None = None):
    """Top-k ordered pairs by summed incubation density; returns (network, ranked [(edge, score)])."""
    if k < 1:
        raise ValueError("k must be at least 1")
    index, scores = baseline_scores(cascades, config, index)
    order = np.lexsort((np.arange(scores.size), -scores))
    order = [c for c in order.tolist() if scores[c] > 0][:k]
    ranked = [(index.edge_of(c), float(scores[c])) for c in order]
    return DirectedNetwork(cascades.n, frozenset(e for e, _ in ranked)), ranked

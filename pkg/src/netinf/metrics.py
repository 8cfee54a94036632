"""Accuracy of an inferred edge ranking against ground truth, plus influence index."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import DirectedNetwork

logger = logging.getLogger(__name__)


@dataclass
class PrCurve:
    points: list[tuple[int, float, float]] = field(default_factory=list)  # (k, precision, recall)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def precision(self) -> np.ndarray:
        return np.array([p for _, p, _ in self.points])

    @property
    def recall(self) -> np.ndarray:
        return np.array([r for _, _, r in self.points])


@dataclass(frozen=True)
class AccuracyReport:
    bep: float
    auc: float
    k_at_bep: float
    crossed: bool = True


def pr_sweep(ordered_edges, truth: DirectedNetwork) -> PrCurve:
    if not truth.edges:
        raise ValueError("ground truth must contain at least one edge")
    total = len(truth.edges)
    hits = 0
    points = []
    for k, edge in enumerate(ordered_edges, start=1):
        if tuple(edge) in truth.edges:
            hits += 1
        points.append((k, hits / k, hits / total))
    return PrCurve(points)


def _break_even(curve: PrCurve) -> tuple[float, float, bool]:
    if not curve.points:
        raise ValueError("break-even point of an empty curve")
    prev = None
    for k, p, r in curve.points:
        if p <= r:
            if prev is None or prev[1] <= prev[2]:
                return p, float(k), True
            # precision - recall changes sign between prev and here
            d0, d1 = prev[1] - prev[2], p - r
            frac = d0 / (d0 - d1)
            return prev[1] + frac * (p - prev[1]), prev[0] + frac * (k - prev[0]), True
        prev = (k, p, r)
    k, p, r = curve.points[-1]
    logger.warning("precision never falls to recall within %d edges", k)
    return min(p, r), float(k), False


def break_even(curve: PrCurve) -> float:
    """Precision where it first meets recall along the sweep (linear between k values)."""
    return _break_even(curve)[0]


def pr_auc(curve: PrCurve) -> float:
    """Trapezoidal area under precision vs recall, from recall 0 to the largest recall reached.

    The first precision value is extended back to recall 0.
    """
    if not curve.points:
        raise ValueError("area of an empty curve")
    rec = np.concatenate([[0.0], curve.recall])
    prec = np.concatenate([[curve.points[0][1]], curve.precision])
    return float(np.sum(np.diff(rec) * (prec[1:] + prec[:-1]) / 2.0))


def accuracy_report(curve: PrCurve) -> AccuracyReport:
    if not curve.points:
        return AccuracyReport(0.0, 0.0, 0.0, False)
    bep, k, crossed = _break_even(curve)
    return AccuracyReport(bep, pr_auc(curve), k, crossed)


def influence_index(network: DirectedNetwork, node: int, out_adj=None) -> float:
    """Sum of 1/d over nodes reachable from ``node``, d the directed hop distance."""
    if not 0 <= node < network.n:
        raise ValueError(f"node {node} outside [0, {network.n})")
    if out_adj is None:
        out_adj = network.out_neighbors()
    dist = {node: 0}
    queue = deque([node])
    total = 0.0
    while queue:
        u = queue.popleft()
        for v in out_adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                total += 1.0 / dist[v]
                queue.append(v)
    return total


def influence_table(network: DirectedNetwork) -> list[float]:
    adj = network.out_neighbors()
    return [influence_index(network, w, adj) for w in range(network.n)]

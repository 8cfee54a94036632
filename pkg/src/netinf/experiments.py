"""End-to-end synthetic studies: generate a network, simulate, infer, score."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import CascadeSet, DirectedNetwork, TransmissionConfig
from .greedy import StoppingRule, baseline_infer, run_greedy
from .metrics import AccuracyReport, accuracy_report, pr_sweep
from .synth import (CORE_PERIPHERY_SEED, KroneckerParams, SimulationParams, generate_cascades,
                    generate_kronecker, perturb_corpus, simulate_corpus)


@dataclass
class RecoveryResult:
    netinf: AccuracyReport
    baseline: AccuracyReport
    num_cascades: int
    transmissions: int
    bound_ratio: float | None
    seconds: float
    extras: dict = field(default_factory=dict)


def desk_network(rng_seed: int = 1, power: int = 8, edges: int = 360,
                 seed_matrix=CORE_PERIPHERY_SEED) -> DirectedNetwork:
    return generate_kronecker(KroneckerParams(seed_matrix, power, edges), rng_seed)


def score_netinf(cascades: CascadeSet, truth: DirectedNetwork, config: TransmissionConfig,
                 k: int | None = None, track_bounds: bool = False):
    """Run NetInf to k = |E*| edges; returns (AccuracyReport, final bound ratio, state)."""
    k = len(truth.edges) if k is None else k
    _, reports, state = run_greedy(cascades, config, StoppingRule.fixed(k),
                                   track_bounds=track_bounds)
    order = [c.edge for c in state.chosen]
    report = accuracy_report(pr_sweep(order, truth))
    ratio = reports[-1].ratio if reports else None
    return report, ratio, state


def score_baseline(cascades: CascadeSet, truth: DirectedNetwork, config: TransmissionConfig,
                   k: int | None = None) -> AccuracyReport:
    k = len(truth.edges) if k is None else k
    _, ranked = baseline_infer(cascades, config, k)
    return accuracy_report(pr_sweep([e for e, _ in ranked], truth))


def recovery_study(truth: DirectedNetwork, config: TransmissionConfig, coverage: float = 0.99,
                   rng_seed: int = 7, missing: float = 0.0, external: float = 0.0,
                   track_bounds: bool = True, with_baseline: bool = True,
                   inference_config: TransmissionConfig | None = None) -> RecoveryResult:
    start = time.perf_counter()
    params = SimulationParams(config=config, coverage_target=coverage, rng_seed=rng_seed,
                              missing_fraction=missing, external_fraction=external)
    corpus, stats = simulate_corpus(truth, params)
    infer_cfg = inference_config or config
    net_report, ratio, _ = score_netinf(corpus, truth, infer_cfg, track_bounds=track_bounds)
    base_report = score_baseline(corpus, truth, infer_cfg) if with_baseline else None
    return RecoveryResult(net_report, base_report, stats.num_cascades, stats.total_transmissions,
                          ratio, time.perf_counter() - start, {"coverage": stats})


def data_efficiency_study(truth: DirectedNetwork, config: TransmissionConfig,
                          multiples=(0.5, 1, 1.5, 2, 3, 4, 5, 6), rng_seed: int = 11):
    """BEP against the number of observed transmissions, r = multiple * |E*|.

    One long cascade stream is simulated; each corpus is a prefix of it.
    """
    n_edges = len(truth.edges)
    goal = max(multiples) * n_edges
    seen = [0]

    def stop(c):
        seen[0] += c.size - 1
        return seen[0] >= goal

    params = SimulationParams(config=config, coverage_target=1.0, rng_seed=rng_seed)
    stream = [c for _, c in generate_cascades(truth, params, stop)]
    sizes = np.cumsum([c.size - 1 for c in stream])
    rows = []
    for mult in multiples:
        count = int(np.searchsorted(sizes, mult * n_edges) + 1)
        corpus = CascadeSet(truth.n, stream[:count])
        report, _, _ = score_netinf(corpus, truth, config)
        rows.append((mult, int(sizes[count - 1]), report.bep))
    return rows


def robustness_study(truth: DirectedNetwork, config: TransmissionConfig, kind: str,
                     fractions=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5), seeds=(1, 2, 3, 4, 5),
                     coverage: float = 0.99, inference_config: TransmissionConfig | None = None):
    """Mean NetInf BEP per perturbation fraction; ``kind`` is 'missing' or 'external'.

    For each seed the clean corpus is simulated once and perturbed at every
    fraction, so the curves compare like with like.
    """
    if kind not in ("missing", "external"):
        raise ValueError("kind must be 'missing' or 'external'")
    infer_cfg = inference_config or config
    table = np.zeros((len(seeds), len(fractions)))
    for si, seed in enumerate(seeds):
        params = SimulationParams(config=config, coverage_target=coverage, rng_seed=seed)
        clean, _ = simulate_corpus(truth, params)
        for fi, frac in enumerate(fractions):
            miss, ext = (frac, 0.0) if kind == "missing" else (0.0, frac)
            corpus = perturb_corpus(clean, miss, ext, seed)
            table[si, fi] = score_netinf(corpus, truth, infer_cfg)[0].bep
    return list(fractions), table.mean(axis=0).tolist(), table

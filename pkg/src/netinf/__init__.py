"""Inference of latent diffusion networks from cascade hit times."""

__version__ = "0.1.0"

from .core import (Cascade, CascadeSet, DirectedNetwork, IncubationModel, TransmissionConfig,
                   edge_weight, incubation_density, transmission_probability)
from .greedy import (BoundReport, GreedyState, PairIndex, StoppingRule, baseline_infer,
                     marginal_gain, online_bound, run_greedy)
from .metrics import (AccuracyReport, PrCurve, accuracy_report, break_even, influence_index,
                      pr_auc, pr_sweep)
from .treelik import (best_tree, build_cascade_dag, corpus_loglik, exact_cascade_likelihood,
                      tree_likelihood_breakdown)

__all__ = [
    "AccuracyReport", "BoundReport", "Cascade", "CascadeSet", "DirectedNetwork", "GreedyState",
    "IncubationModel", "PairIndex", "PrCurve", "StoppingRule", "TransmissionConfig",
    "accuracy_report", "baseline_infer", "best_tree", "break_even", "build_cascade_dag",
    "corpus_loglik", "edge_weight", "exact_cascade_likelihood", "incubation_density",
    "influence_index", "marginal_gain", "online_bound", "pr_auc", "pr_sweep", "run_greedy",
    "transmission_probability", "tree_likelihood_breakdown",
]

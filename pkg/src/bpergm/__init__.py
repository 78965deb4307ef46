"""Exponential random graph models for two-mode (bipartite) networks."""
from .graph import BipartiteGraph, GraphFormatError, Mode, NodeRef, load_graph, save_graph
from .statistics import Model, Term, TermError, TermKind, change_value, model_stats, stat_value
from .sampler import Chain, Kernel, SamplerConfig, mh_step, run_chain
from .estimation import EstimateResult, EstimationConfig, convergence_check, estimate
from .gof import GofReport, cycle_census, gof_run, unique_nodes_in_four_cycles

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph", "GraphFormatError", "Mode", "NodeRef", "load_graph", "save_graph",
    "Model", "Term", "TermError", "TermKind", "change_value", "model_stats", "stat_value",
    "Chain", "Kernel", "SamplerConfig", "mh_step", "run_chain",
    "EstimateResult", "EstimationConfig", "convergence_check", "estimate",
    "GofReport", "cycle_census", "gof_run", "unique_nodes_in_four_cycles",
]

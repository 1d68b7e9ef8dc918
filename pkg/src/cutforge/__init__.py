"""Circuit cutting pipeline with fault-tolerant resource estimation."""

from .circuit import Circuit, Gate, circuit, interaction_graph
from .cutfinder import CutPlan, extract_subcircuits, find_cuts, plan_summary
from .qpd import basis_for, num_samples, pool_size, total_overhead, wire_cut_basis
from .reconstruct import exact_expectation, flops_estimate, mc_expectation, reconstruct_distribution
from .sim import Observable, expectation, simulate

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "CutPlan",
    "Gate",
    "Observable",
    "basis_for",
    "circuit",
    "exact_expectation",
    "expectation",
    "extract_subcircuits",
    "find_cuts",
    "flops_estimate",
    "interaction_graph",
    "mc_expectation",
    "num_samples",
    "plan_summary",
    "pool_size",
    "reconstruct_distribution",
    "simulate",
    "total_overhead",
    "wire_cut_basis",
]

"""Simulated annealing on couplings and the replicated experiments built on it."""
from .chain import AnnealConfig, AnnealReport, Schedule, anneal, draw_chunk, run_chain
from .experiments import (
    ExperimentSpec,
    convergence_profile,
    first_move_acceptance,
    first_move_acceptance_cell,
    grid_rows,
    sample_margins,
    select_tau0,
)

__all__ = [
    "AnnealConfig",
    "AnnealReport",
    "ExperimentSpec",
    "Schedule",
    "anneal",
    "convergence_profile",
    "draw_chunk",
    "first_move_acceptance",
    "first_move_acceptance_cell",
    "grid_rows",
    "run_chain",
    "sample_margins",
    "select_tau0",
]

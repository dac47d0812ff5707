"""Finite optimal transport through table moves.

Couplings of two (or three) margins, the moves that connect them, the
maximal-homophily coupling, an exact solver with a cyclical-monotonicity
certificate and a simulated-annealing search over the coupling polytope.
"""
from ._kernels import BACKEND
from .annealing import AnnealConfig, AnnealReport, ExperimentSpec, Schedule, anneal
from .errors import (
    DegenerateIndices,
    DimensionMismatch,
    InputError,
    InvalidInterval,
    MarginMismatch,
    NegativeEntry,
    NonConvergence,
    NotAMove,
    NotAProbability,
    NotMetric,
    NotSimple,
    TableMovesError,
    ValidationError,
)
from .homophily import BivariateSample, MovePath, cograduation_index, connect, homophily_coupling, path_to_homophily
from .moves import (
    BasicMove,
    Move,
    SimpleMove,
    decompose_simple,
    difference_criterion,
    express_in_basis,
    is_admissible,
    is_cyclically_monotone,
    make_basic,
    max_step,
    move_cost,
    permutation_of_simple,
    pivotal_basis,
    simple_from_permutation,
)
from .tables import (
    Coupling,
    Coupling3,
    CostMatrix,
    ProbabilityVector,
    cost_of,
    product_coupling,
    support,
    support_components,
    validate_coupling,
    vertex_support_check,
)
from .transport import DualPair, TransportSolution, dual_feasible, dual_value, exact_kcost, fill_diagonal, geodesic_coupling, reduce_cycles
from .trivariate import TriMove, homophily3, path_to_homophily3

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig",
    "AnnealReport",
    "BACKEND",
    "BasicMove",
    "BivariateSample",
    "CostMatrix",
    "Coupling",
    "Coupling3",
    "DegenerateIndices",
    "DimensionMismatch",
    "DualPair",
    "ExperimentSpec",
    "InputError",
    "InvalidInterval",
    "MarginMismatch",
    "Move",
    "MovePath",
    "NegativeEntry",
    "NonConvergence",
    "NotAMove",
    "NotAProbability",
    "NotMetric",
    "NotSimple",
    "ProbabilityVector",
    "Schedule",
    "SimpleMove",
    "TableMovesError",
    "TransportSolution",
    "TriMove",
    "ValidationError",
    "anneal",
    "cograduation_index",
    "connect",
    "cost_of",
    "decompose_simple",
    "difference_criterion",
    "dual_feasible",
    "dual_value",
    "exact_kcost",
    "express_in_basis",
    "fill_diagonal",
    "geodesic_coupling",
    "homophily3",
    "homophily_coupling",
    "is_admissible",
    "is_cyclically_monotone",
    "make_basic",
    "max_step",
    "move_cost",
    "path_to_homophily",
    "path_to_homophily3",
    "permutation_of_simple",
    "pivotal_basis",
    "product_coupling",
    "reduce_cycles",
    "simple_from_permutation",
    "support",
    "support_components",
    "validate_coupling",
    "vertex_support_check",
    "__version__",
]

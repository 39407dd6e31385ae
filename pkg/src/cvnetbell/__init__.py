"""Bell-type tests for continuous-variable networks of Gaussian sources.

Parties measure displaced-parity style operators built from order-s
quasiprobabilities; this package evaluates the resulting nonlinear Bell
functional for chain, star, tree and cycle networks and searches for its
supremum over the displacements.
"""

__version__ = "0.1.0"

from .bell import BellAssignment, BellEvaluation, SourceDisplacements, bell_value, theorem_expression, two_point
from .gaussian import GaussianState, StsParams, epr_state, sts_state, validate
from .network import (
    IndependentSet,
    NetworkTopology,
    build,
    canonical_independent_set,
    chain,
    cycle,
    exact_independent_set,
    star,
    tree,
)
from .optimize import OptimizerConfig, SupremumResult, supremum_b, sweep
from .quasiprob import q_epr, q_generic, q_sts

__all__ = [
    "BellAssignment",
    "BellEvaluation",
    "GaussianState",
    "IndependentSet",
    "NetworkTopology",
    "OptimizerConfig",
    "SourceDisplacements",
    "StsParams",
    "SupremumResult",
    "bell_value",
    "build",
    "canonical_independent_set",
    "chain",
    "cycle",
    "epr_state",
    "exact_independent_set",
    "q_epr",
    "q_generic",
    "q_sts",
    "star",
    "sts_state",
    "supremum_b",
    "sweep",
    "theorem_expression",
    "tree",
    "two_point",
    "validate",
]

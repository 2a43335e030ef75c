"""Many-objective evolutionary optimization with cascade-clustering selection
and learned reference-vector adaptation."""

from cascadeopt.core import (
    ContractError,
    FrontierSplit,
    Individual,
    Population,
    dominates,
    identify_frontiers,
)
from cascadeopt.refgen import ReferenceSet, SimplexProjection, generate_simplex_lattice
from cascadeopt.cascade import SelectionOutcome, select
from cascadeopt.problems import get_problem

__all__ = [
    "ContractError",
    "FrontierSplit",
    "Individual",
    "Population",
    "ReferenceSet",
    "SelectionOutcome",
    "SimplexProjection",
    "dominates",
    "generate_simplex_lattice",
    "get_problem",
    "identify_frontiers",
    "select",
]

__version__ = "0.1.0"

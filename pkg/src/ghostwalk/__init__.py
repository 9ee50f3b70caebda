"""Exact annihilation and coalescence weights for walkers on spacetime DAGs."""

from .errors import GhostwalkError, InvalidArgument, ResourceLimit
from .ghostdet import (
    FinalState,
    annihilation_weight,
    annihilation_weight_laplace,
    build_matrix,
    enumerate_final_states,
    final_state_weight,
    plain_determinant,
)
from .pfaffian import pairwise_coalescence_weight
from .spacetime import Configuration, SpacetimeGraph, build_lattice_graph, lattice_instance

__all__ = [
    "Configuration",
    "FinalState",
    "GhostwalkError",
    "InvalidArgument",
    "ResourceLimit",
    "SpacetimeGraph",
    "annihilation_weight",
    "annihilation_weight_laplace",
    "build_lattice_graph",
    "build_matrix",
    "enumerate_final_states",
    "final_state_weight",
    "lattice_instance",
    "pairwise_coalescence_weight",
    "plain_determinant",
]

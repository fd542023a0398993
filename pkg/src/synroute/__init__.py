"""Retrosynthesis route planning with k-best And-Or graph search."""

from synroute.core import (
    Molecule,
    ProposalMetrics,
    Reaction,
    Route,
    RouteList,
    canonical_id,
    proposal_metrics,
    reaction_id,
    repetition_rate,
    route_cost,
    validate_route,
)

__version__ = "0.1.0"

__all__ = [
    "Molecule",
    "ProposalMetrics",
    "Reaction",
    "Route",
    "RouteList",
    "canonical_id",
    "proposal_metrics",
    "reaction_id",
    "repetition_rate",
    "route_cost",
    "validate_route",
    "__version__",
]

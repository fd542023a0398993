"""Similar-route suppression: penalize overlap with cheaper routes, re-rank.

Single pass over the cost-sorted routes: each route's repeat count is its
maximum reaction overlap with any strictly cheaper route, the penalty
multiplier is (1 + alpha * repeat) ** power, and the final ranking sorts
by penalized cost. Re-running on the output is not idempotent by design;
penalties are only ever computed against original-cost order.
"""

from __future__ import annotations

from typing import Sequence

from synroute.core import Route

DEFAULT_PENALTY_ALPHA = 0.1
DEFAULT_PENALTY_POWER = 2.0


def route_overlap(a: Route, b: Route) -> int:
    """Number of reactions (by id) shared between two routes."""
    return len(set(a.reaction_ids) & set(b.reaction_ids))


def suppression_penalty(
    repeat: int,
    alpha: float = DEFAULT_PENALTY_ALPHA,
    power: float = DEFAULT_PENALTY_POWER,
) -> float:
    if repeat < 0:
        raise ValueError("repeat count must be >= 0")
    return (1.0 + alpha * repeat) ** power


def suppress(
    routes: Sequence[Route],
    k: int,
    alpha: float = DEFAULT_PENALTY_ALPHA,
    power: float = DEFAULT_PENALTY_POWER,
) -> list[Route]:
    """Return the k best routes after overlap penalization.

    Routes must be complete, share one root, and have finite costs.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not routes:
        return []
    roots = {r.root for r in routes}
    if len(roots) != 1:
        raise ValueError(f"routes must share one root, got {sorted(roots)}")
    if any(not r.complete for r in routes):
        raise ValueError("suppression applies to complete routes only")

    ordered = sorted(routes, key=Route.sort_key)
    penalized: list[tuple[float, Route]] = []
    for i, route in enumerate(ordered):
        repeat = max(
            (route_overlap(route, ordered[j]) for j in range(i)), default=0
        )
        penalized.append((route.total_cost * suppression_penalty(repeat, alpha, power), route))
    penalized.sort(key=lambda pair: (pair[0],) + pair[1].sort_key())
    return [route for _, route in penalized[:k]]

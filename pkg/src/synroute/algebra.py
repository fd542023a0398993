"""k-best route-list operators: AND combination, OR merge, leaf lists.

The cost recurrences treat a route's cost as reaction cost plus the sum of
its child route costs (tree semantics: a precursor shared by two branches
is paid once per use). Combination candidates that would produce the same
molecule through two distinct reactions, or that close a dependency cycle,
are rejected so every emitted route is a valid acyclic in-tree.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

from synroute.core import EMPTY_ROUTELIST, Molecule, Reaction, Route, RouteList, route_cost

#: Upper bound on enumerated combinations per AND node; full k^arity
#: enumeration is used below the cap (desk-scale arities are small).
DEFAULT_COMBINE_CAP = 4096


def leaf_routelist(molecule: Molecule, value: float, k: int) -> RouteList:
    """Route list for an unexpanded leaf.

    Stock molecules yield one complete zero-step route priced at
    ln(price + 1); other molecules yield one incomplete route costed at
    their value estimate. Remaining slots are implicit +infinity.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if molecule.in_stock:
        route = Route.build(
            root=molecule.id,
            reactions=(),
            total_cost=route_cost(molecule.price or 0.0, 0),
            complete=True,
        )
        return RouteList((route,))
    if value < 0:
        raise ValueError("leaf value must be >= 0")
    if math.isinf(value):
        return EMPTY_ROUTELIST
    route = Route.build(
        root=molecule.id,
        reactions=(),
        total_cost=value,
        complete=False,
        open_leaves=(molecule.id,),
    )
    return RouteList((route,))


def or_merge(alternatives: Sequence[RouteList], k: int) -> RouteList:
    """Merge alternative route lists: sort, deduplicate, truncate to k."""
    merged = itertools.chain.from_iterable(alt.entries for alt in alternatives)
    return RouteList.build(merged, k)


def and_combine(
    children: Sequence[RouteList],
    reaction: Reaction,
    k: int,
    combine_cap: int = DEFAULT_COMBINE_CAP,
) -> RouteList:
    """Combine per-reactant route lists through one reaction.

    Takes one entry per child, sums costs, unions reaction sets, and keeps
    the k cheapest candidates that survive validity checks:

    - no molecule may be produced by two distinct reactions in the union;
    - the union must stay acyclic (in particular the reaction's product
      must not occur anywhere inside a child route).
    """
    if len(children) != len(reaction.reactants):
        raise ValueError(
            f"reaction {reaction.id} has {len(reaction.reactants)} reactants "
            f"but {len(children)} child lists were given"
        )
    candidates: list[Route] = []
    combos = itertools.product(*(child.entries for child in children))
    for combo in itertools.islice(combos, combine_cap):
        route = _combine_one(combo, reaction)
        if route is not None:
            candidates.append(route)
    return RouteList.build(candidates, k)


def _combine_one(combo: Sequence[Route], reaction: Reaction) -> Route | None:
    # Cheap rejection first: a child route already touching the product
    # would close a cycle (or double-produce it).
    for child in combo:
        if reaction.product in child.molecules():
            return None

    union: dict[str, Reaction] = {reaction.id: reaction}
    producers: dict[str, str] = {reaction.product: reaction.id}
    for child in combo:
        for rx in child.reactions:
            known = producers.get(rx.product)
            if known is not None and known != rx.id:
                return None  # same molecule from two distinct reactions
            producers[rx.product] = rx.id
            union[rx.id] = rx
    reactions = tuple(union.values())
    if not _is_acyclic(reactions):
        return None

    open_leaves: set[str] = set()
    for child in combo:
        open_leaves.update(child.open_leaves)
    cost = reaction.cost + sum(child.total_cost for child in combo)
    return Route.build(
        root=reaction.product,
        reactions=reactions,
        total_cost=cost,
        complete=not open_leaves,
        open_leaves=open_leaves,
    )


def _is_acyclic(reactions: Sequence[Reaction]) -> bool:
    """Kahn's algorithm over dependency edges reactant -> product."""
    producers = {rx.product: rx for rx in reactions}
    indegree = {
        mol: sum(1 for r in rx.reactants if r in producers)
        for mol, rx in producers.items()
    }
    ready = [mol for mol, deg in indegree.items() if deg == 0]
    consumers: dict[str, list[str]] = {}
    for mol, rx in producers.items():
        for reactant in rx.reactants:
            if reactant in producers:
                consumers.setdefault(reactant, []).append(mol)
    done = 0
    while ready:
        mol = ready.pop()
        done += 1
        for parent in consumers.get(mol, ()):
            indegree[parent] -= 1
            if indegree[parent] == 0:
                ready.append(parent)
    return done == len(producers)

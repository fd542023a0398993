"""Domain types and shared metrics for retrosynthetic route planning.

Molecules are opaque canonical strings. Reactions are single retro steps
keyed by a content hash so identical proposals from different sources
collapse. Routes are acyclic reaction sets forming an in-tree rooted at
a target molecule; route lists hold the k cheapest routes per molecule.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

Normalizer = Callable[[str], str]

#: Molecule id -> price for commercially available building blocks.
Stock = Mapping[str, float]


def canonical_id(raw: str, normalizer: Normalizer | None = None) -> str:
    """Canonicalize a molecule identifier.

    Default canonicalization is whitespace trimming; a custom normalizer
    (e.g. a SMILES canonicalizer) can be plugged in. Idempotent for any
    normalizer that is itself idempotent.
    """
    text = raw.strip()
    if normalizer is not None:
        text = normalizer(text).strip()
    if not text:
        raise ValueError("molecule id is empty after canonicalization")
    return text


def reaction_id(product: str, reactants: Iterable[str]) -> str:
    """Stable content hash of (product, sorted reactants).

    Invariant under reactant permutation, so the same reaction proposed
    by different models deduplicates.
    """
    key = product + "<=" + "+".join(sorted(reactants))
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Molecule:
    """A molecule the search plans over; price only meaningful in stock."""

    id: str
    in_stock: bool = False
    price: float | None = None

    def __post_init__(self) -> None:
        if not self.id or self.id != self.id.strip():
            raise ValueError(f"molecule id is not canonical: {self.id!r}")
        if self.in_stock:
            if self.price is None:
                object.__setattr__(self, "price", 0.0)
            if self.price < 0:
                raise ValueError("stock price must be >= 0")
        elif self.price is not None:
            raise ValueError("molecules not in stock carry no price")


@dataclass(frozen=True)
class Reaction:
    """One retro step: product decomposes into reactants (an AND node)."""

    id: str
    product: str
    reactants: tuple[str, ...]
    cost: float = 1.0
    model: str = ""
    score: float | None = None

    def __post_init__(self) -> None:
        if not self.reactants:
            raise ValueError("reaction needs at least one reactant")
        if len(set(self.reactants)) != len(self.reactants):
            raise ValueError(f"duplicate reactant ids in {self.reactants!r}")
        if self.product in self.reactants:
            raise ValueError("product may not appear among its own reactants")
        if not self.cost > 0:
            raise ValueError("reaction cost must be positive")

    @classmethod
    def make(
        cls,
        product: str,
        reactants: Iterable[str],
        cost: float = 1.0,
        model: str = "",
        score: float | None = None,
    ) -> "Reaction":
        """Build a reaction with its content-derived id."""
        rs = tuple(reactants)
        return cls(reaction_id(product, rs), product, rs, cost, model, score)

    def with_cost(self, cost: float) -> "Reaction":
        return dataclasses.replace(self, cost=cost)

    def with_model(self, model: str) -> "Reaction":
        return dataclasses.replace(self, model=model)


@dataclass(frozen=True)
class Route:
    """An acyclic reaction set rooted at a target molecule.

    Incomplete routes carry open leaves: non-stock molecules whose
    synthesis is not yet resolved (their value estimate is already folded
    into total_cost). Complete routes have none.
    """

    reactions: tuple[Reaction, ...]
    root: str
    total_cost: float
    complete: bool
    open_leaves: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.complete != (not self.open_leaves):
            raise ValueError("complete flag inconsistent with open leaves")

    @classmethod
    def build(
        cls,
        root: str,
        reactions: Iterable[Reaction],
        total_cost: float,
        complete: bool,
        open_leaves: Iterable[str] = (),
    ) -> "Route":
        ordered = tuple(sorted(reactions, key=lambda r: r.id))
        return cls(ordered, root, float(total_cost), complete, frozenset(open_leaves))

    @property
    def length(self) -> int:
        return len(self.reactions)

    @property
    def reaction_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.reactions)

    def sort_key(self) -> tuple[float, tuple[str, ...], str]:
        # Global tie-break rule: cost, then sorted reaction ids, then root.
        return (self.total_cost, self.reaction_ids, self.root)

    def molecules(self) -> frozenset[str]:
        """Every molecule mentioned anywhere in this route."""
        seen: set[str] = {self.root}
        seen.update(self.open_leaves)
        for rx in self.reactions:
            seen.add(rx.product)
            seen.update(rx.reactants)
        return frozenset(seen)


@dataclass(frozen=True)
class RouteList:
    """Up to k routes sorted ascending by cost; absent slots mean +infinity."""

    entries: tuple[Route, ...] = ()

    @classmethod
    def build(cls, routes: Iterable[Route], k: int) -> "RouteList":
        if k < 1:
            raise ValueError("k must be >= 1")
        picked: list[Route] = []
        seen: set[tuple[str, ...]] = set()
        for route in sorted(routes, key=Route.sort_key):
            if not math.isfinite(route.total_cost):
                continue  # infinite entries are implicit padding
            if route.reaction_ids in seen:
                continue
            seen.add(route.reaction_ids)
            picked.append(route)
            if len(picked) == k:
                break
        return cls(tuple(picked))

    def costs(self) -> tuple[float, ...]:
        return tuple(r.total_cost for r in self.entries)

    @property
    def best(self) -> Route | None:
        return self.entries[0] if self.entries else None

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)


EMPTY_ROUTELIST = RouteList()


def route_cost(price: float, steps: int) -> float:
    """Synthesis cost of a route: ln(price + 1) + number of steps."""
    if price < 0:
        raise ValueError("price must be >= 0")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    return math.log1p(price) + steps


def repetition_rate(routes: Sequence[Route]) -> float:
    """Reaction repetition across routes: |reactions| / |unique reactions| - 1."""
    if not routes:
        raise ValueError("at least one route required")
    total = sum(r.length for r in routes)
    if total == 0:
        raise ValueError("routes contain no reactions")
    distinct = len({rid for r in routes for rid in r.reaction_ids})
    return total / distinct - 1.0


@dataclass(frozen=True)
class ProposalMetrics:
    recall: float
    precision: float
    top_n_hit: bool


def proposal_metrics(
    proposals: Sequence[Reaction],
    truth: Iterable[Reaction],
    n: int,
) -> ProposalMetrics:
    """Recall / precision / top-N hit of a ranked proposal list vs known reactions.

    Intersection is by reaction id. Raises if truth or proposals are empty
    (the corresponding ratios are undefined).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    truth_ids = {r.id for r in truth}
    if not truth_ids:
        raise ValueError("truth set is empty; recall undefined")
    prop_ids = [r.id for r in proposals]
    if not prop_ids:
        raise ValueError("proposal list is empty; precision undefined")
    hits = truth_ids.intersection(prop_ids)
    return ProposalMetrics(
        recall=len(hits) / len(truth_ids),
        precision=len(hits) / len(prop_ids),
        top_n_hit=any(pid in truth_ids for pid in prop_ids[:n]),
    )


def validate_route(route: Route, stock: Stock | Iterable[str]) -> list[str]:
    """Independent structural validation of a route; returns violation messages.

    Checks single-producer, acyclicity (by fresh graph traversal),
    reachability of every reaction from the root, and, for routes flagged
    complete, that every unresolved leaf is in stock.
    """
    stock_ids = set(stock)
    problems: list[str] = []

    producers: dict[str, Reaction] = {}
    for rx in route.reactions:
        prev = producers.get(rx.product)
        if prev is not None and prev.id != rx.id:
            problems.append(f"molecule {rx.product} produced by two distinct reactions")
        producers[rx.product] = rx

    # Cycle detection over dependency edges reactant -> product.
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(mol: str, trail: tuple[str, ...]) -> None:
        mark = state.get(mol)
        if mark == 1:
            return
        if mark == 0:
            problems.append(f"dependency cycle through {mol}")
            return
        state[mol] = 0
        rx = producers.get(mol)
        if rx is not None:
            for reactant in rx.reactants:
                visit(reactant, trail + (mol,))
        state[mol] = 1

    visit(route.root, ())

    if route.reactions and route.root not in producers:
        problems.append("root molecule is not produced by any reaction")

    # Reachability: every reaction must feed the root.
    reached: set[str] = set()
    frontier = [route.root]
    seen_mols: set[str] = set()
    while frontier:
        mol = frontier.pop()
        if mol in seen_mols:
            continue
        seen_mols.add(mol)
        rx = producers.get(mol)
        if rx is not None:
            reached.add(rx.id)
            frontier.extend(rx.reactants)
    unreachable = {rx.id for rx in route.reactions} - reached
    if unreachable:
        problems.append(f"{len(unreachable)} reaction(s) not reachable from root")

    leaves = {
        reactant
        for rx in route.reactions
        for reactant in rx.reactants
        if reactant not in producers
    }
    if not route.reactions:
        leaves = {route.root} if route.root not in stock_ids else set()
        if route.complete and leaves:
            problems.append("empty route whose root is not in stock")
    open_non_stock = {m for m in leaves if m not in stock_ids}
    if route.complete and open_non_stock:
        problems.append(f"complete route has non-stock leaves: {sorted(open_non_stock)}")
    if not route.complete and set(route.open_leaves) != open_non_stock:
        problems.append("declared open leaves do not match unresolved non-stock leaves")
    return problems

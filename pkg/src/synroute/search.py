"""Best-first And-Or graph search maintaining per-molecule k-best route lists.

The search loop repeatedly selects an open frontier molecule implicated in
the cheapest unresolved candidate at the root, expands it through the
proposer ensemble (optionally filtered by the feasibility checker), and
recomputes route lists bottom-up to a fixed point. Molecule nodes are
deduplicated by canonical id, so the structure is a graph, not a tree;
cycle safety lives in the combination operator's candidate rejection.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from synroute.algebra import DEFAULT_COMBINE_CAP, and_combine, leaf_routelist, or_merge
from synroute.checker import Checker
from synroute.core import (
    EMPTY_ROUTELIST,
    Molecule,
    Reaction,
    Route,
    RouteList,
    Stock,
    canonical_id,
)
from synroute.proposers import Ensemble, apply_checker_filter
from synroute.protocol import TransportError
from synroute.suppression import (
    DEFAULT_PENALTY_ALPHA,
    DEFAULT_PENALTY_POWER,
    suppress,
)

logger = logging.getLogger(__name__)

ValueFn = Callable[[str], float]


class ConfigurationError(Exception):
    """Bad planner wiring (unknown proposer/checker spec, invalid budget)."""


class NoFrontierError(Exception):
    """select_frontier called with nothing left to expand."""


class InternalInconsistencyError(RuntimeError):
    """Bottom-up update failed to reach a fixed point within the pass cap."""


class ExpansionError(Exception):
    """Expansion failed entirely; carries the offending model tags."""

    def __init__(self, molecule: str, models: Sequence[str], cause: Exception):
        super().__init__(f"expansion of {molecule} failed via {', '.join(models) or '?'}: {cause}")
        self.molecule = molecule
        self.models = tuple(models)


@dataclass
class SearchConfig:
    """Planner knobs; mirrors the search-config keys consumed by the CLI."""

    k: int = 1
    max_expansions: int = 500
    wall_clock_limit_secs: float | None = None
    proposal_limit_per_expansion: int = 50
    default_leaf_value: float = 1.0
    reaction_cost: float = 1.0
    reaction_cost_overrides: dict[str, float] = field(default_factory=dict)
    early_stop: bool = False
    match_rank: int = 1
    checker_fail_open: bool = False
    retry_failed_expansions: bool = False
    combine_cap: int = DEFAULT_COMBINE_CAP
    # Internal route lists carry this many slots beyond k. Truncated child
    # lists can otherwise starve a parent of combination partners when the
    # cheap entries disagree on a shared intermediate's producer (they get
    # rejected as double-producing) while the agreeing entry sits just past
    # the cutoff.
    list_headroom: int = 4
    suppress_similar: bool = False
    suppress_penalty_alpha: float = DEFAULT_PENALTY_ALPHA
    suppress_penalty_power: float = DEFAULT_PENALTY_POWER

    def cost_for(self, model: str) -> float:
        return self.reaction_cost_overrides.get(model, self.reaction_cost)


@dataclass
class MoleculeNode:
    id: str
    in_stock: bool
    price: float
    routelist: RouteList
    order: int  # insertion index; breaks selection ties
    expanded: bool = False
    children: list[str] = field(default_factory=list)  # reaction node ids
    consumers: list[str] = field(default_factory=list)  # reactions using this molecule


@dataclass
class ReactionNode:
    reaction: Reaction
    children: tuple[str, ...]  # reactant molecule ids
    parent: str  # product molecule id


class SearchGraph:
    """And-Or graph state: molecule nodes, reaction nodes, frontier."""

    def __init__(
        self,
        root: str,
        stock: Stock,
        value_fn: ValueFn,
        k: int,
        combine_cap: int = DEFAULT_COMBINE_CAP,
    ):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.root = root
        self.stock = stock
        self.value_fn = value_fn
        self.k = k
        self.combine_cap = combine_cap
        self.nodes: dict[str, MoleculeNode] = {}
        self.reaction_nodes: dict[str, ReactionNode] = {}
        self.frontier: set[str] = set()
        self._counter = 0
        self.ensure_molecule(root)

    def ensure_molecule(self, mol_id: str) -> MoleculeNode:
        node = self.nodes.get(mol_id)
        if node is not None:
            return node
        in_stock = mol_id in self.stock
        price = float(self.stock[mol_id]) if in_stock else 0.0
        molecule = Molecule(mol_id, in_stock=in_stock, price=price if in_stock else None)
        node = MoleculeNode(
            id=mol_id,
            in_stock=in_stock,
            price=price,
            routelist=leaf_routelist(molecule, self.value_fn(mol_id), self.k),
            order=self._counter,
        )
        self._counter += 1
        self.nodes[mol_id] = node
        if not in_stock:
            self.frontier.add(mol_id)
        return node

    def attach_reaction(self, reaction: Reaction) -> bool:
        """Insert a reaction node under its product; returns False if present."""
        if reaction.id in self.reaction_nodes:
            return False
        product_node = self.ensure_molecule(reaction.product)
        for reactant in reaction.reactants:
            self.ensure_molecule(reactant)
        self.reaction_nodes[reaction.id] = ReactionNode(
            reaction=reaction, children=tuple(reaction.reactants), parent=reaction.product
        )
        product_node.children.append(reaction.id)
        for reactant in reaction.reactants:
            self.nodes[reactant].consumers.append(reaction.id)
        return True

    def compute_routelist(self, mol_id: str) -> RouteList:
        """Route list implied by the node's current children (one level)."""
        node = self.nodes[mol_id]
        if not node.expanded:
            molecule = Molecule(
                node.id, in_stock=node.in_stock, price=node.price if node.in_stock else None
            )
            return leaf_routelist(molecule, self.value_fn(mol_id), self.k)
        alternatives = []
        for rxn_id in node.children:
            rxn_node = self.reaction_nodes[rxn_id]
            child_lists = [self.nodes[c].routelist for c in rxn_node.children]
            alternatives.append(
                and_combine(child_lists, rxn_node.reaction, self.k, self.combine_cap)
            )
        return or_merge(alternatives, self.k) if alternatives else EMPTY_ROUTELIST


def update(graph: SearchGraph, start: str) -> int:
    """Recompute route lists bottom-up from ``start`` to a fixed point.

    Returns the number of node recomputations. A wave whose recomputation
    changes a node's list marks the node's consumers' products dirty for
    the next wave; the wave count is capped at |molecule nodes| + 1.
    """
    if start not in graph.nodes:
        raise KeyError(f"unknown molecule {start!r}")
    recomputed = 0
    dirty: list[str] = [start]
    passes = 0
    while dirty:
        passes += 1
        if passes > len(graph.nodes) + 1:
            raise InternalInconsistencyError(
                f"update from {start!r} exceeded {len(graph.nodes) + 1} passes"
            )
        next_dirty: dict[str, None] = {}
        for mol_id in dirty:
            node = graph.nodes[mol_id]
            fresh = graph.compute_routelist(mol_id)
            recomputed += 1
            if fresh != node.routelist:
                node.routelist = fresh
                for rxn_id in node.consumers:
                    next_dirty.setdefault(graph.reaction_nodes[rxn_id].parent)
        dirty = list(next_dirty)
    return recomputed


def select_frontier(graph: SearchGraph) -> str:
    """Pick the next molecule to expand.

    Prefers an open leaf of the cheapest incomplete candidate at the root
    (whose cost already includes the leaf's value estimate); ties and the
    no-incomplete-candidate case fall back to insertion order.
    """
    if not graph.frontier:
        raise NoFrontierError("frontier is empty")
    for route in graph.nodes[graph.root].routelist.entries:
        if route.complete:
            continue
        open_here = [m for m in route.open_leaves if m in graph.frontier]
        if open_here:
            return min(open_here, key=lambda m: graph.nodes[m].order)
    return min(graph.frontier, key=lambda m: graph.nodes[m].order)


def expand(
    graph: SearchGraph,
    mol_id: str,
    proposers: Ensemble,
    checker: Checker | None,
    limit: int,
    config: SearchConfig | None = None,
) -> int:
    """Expand a frontier molecule through the proposer ensemble.

    Structurally bad proposals (self-loops, canonicalization failures) are
    dropped, the rest optionally filtered through the checker, deduplicated
    by reaction id, and attached with their configured costs. Returns the
    number of reaction nodes added. On total proposer failure the node
    either stays in the frontier (retry) or collapses to a dead end.
    """
    cfg = config or SearchConfig()
    if mol_id not in graph.frontier:
        raise ValueError(f"{mol_id!r} is not in the frontier")
    try:
        proposals = proposers.propose(mol_id, limit)
    except TransportError as exc:
        raise ExpansionError(mol_id, getattr(proposers, "name", "?").split("+"), exc) from exc

    structural: list = []
    seen: set[str] = set()
    for proposal in proposals:
        rx = proposal.reaction
        if rx.product != mol_id or mol_id in rx.reactants:
            continue
        try:
            if any(canonical_id(r) != r for r in rx.reactants):
                continue
        except ValueError:
            continue
        if rx.id in seen:
            continue
        seen.add(rx.id)
        structural.append(proposal)

    if checker is not None:
        kept, dropped = apply_checker_filter(
            structural, checker, mol_id, cfg.match_rank, cfg.checker_fail_open
        )
        if dropped:
            logger.debug("checker dropped %d/%d proposals for %s", len(dropped), len(structural), mol_id)
    else:
        kept = structural

    added = 0
    for proposal in kept:
        reaction = proposal.reaction.with_cost(cfg.cost_for(proposal.model))
        if graph.attach_reaction(reaction):
            added += 1
    node = graph.nodes[mol_id]
    node.expanded = True
    graph.frontier.discard(mol_id)
    return added


@dataclass(frozen=True)
class PlanResult:
    routes: tuple[Route, ...]
    expansions_used: int
    succeeded: bool
    timings: dict[str, float]


def _converged(graph: SearchGraph, k: int) -> bool:
    entries = graph.nodes[graph.root].routelist.entries
    return len(entries) >= k and all(r.complete for r in entries[:k])


def plan(
    target: str,
    proposers: Ensemble,
    checker: Checker | None,
    value_fn: ValueFn,
    stock: Stock,
    config: SearchConfig,
) -> PlanResult:
    """Search for the k cheapest complete synthesis routes of ``target``.

    Runs select/expand/update until the frontier empties, the expansion or
    wall-clock budget runs out, or (with early_stop) the root's top-k
    candidates are all complete. Only complete routes are returned.
    """
    if config.k < 1:
        raise ValueError("k must be >= 1")
    if config.max_expansions < 1:
        raise ValueError("max_expansions must be >= 1")

    target = canonical_id(target)
    internal_k = config.k + max(config.list_headroom, 0)
    if config.suppress_similar:
        # Suppression needs a pool of candidates beyond the k finally returned.
        internal_k = max(internal_k, config.k * 2)
    graph = SearchGraph(
        root=target,
        stock=stock,
        value_fn=value_fn,
        k=internal_k,
        combine_cap=config.combine_cap,
    )

    started = time.monotonic()
    timings = {"select_secs": 0.0, "expand_secs": 0.0, "update_secs": 0.0}
    expansions = 0
    while graph.frontier and expansions < config.max_expansions:
        if (
            config.wall_clock_limit_secs is not None
            and time.monotonic() - started > config.wall_clock_limit_secs
        ):
            logger.info("wall clock limit reached for %s", target)
            break
        if config.early_stop and _converged(graph, config.k):
            break
        t0 = time.monotonic()
        mol_id = select_frontier(graph)
        timings["select_secs"] += time.monotonic() - t0

        expansions += 1
        t0 = time.monotonic()
        try:
            expand(
                graph,
                mol_id,
                proposers,
                checker,
                config.proposal_limit_per_expansion,
                config,
            )
        except ExpansionError as exc:
            logger.warning("%s", exc)
            if not config.retry_failed_expansions:
                # Abandon: the molecule becomes a dead end.
                graph.nodes[mol_id].expanded = True
                graph.frontier.discard(mol_id)
            timings["expand_secs"] += time.monotonic() - t0
            t0 = time.monotonic()
            if not config.retry_failed_expansions:
                update(graph, mol_id)
            timings["update_secs"] += time.monotonic() - t0
            continue
        timings["expand_secs"] += time.monotonic() - t0

        t0 = time.monotonic()
        update(graph, mol_id)
        timings["update_secs"] += time.monotonic() - t0

    completes = [r for r in graph.nodes[target].routelist.entries if r.complete]
    if config.suppress_similar:
        routes = tuple(
            suppress(
                completes,
                config.k,
                config.suppress_penalty_alpha,
                config.suppress_penalty_power,
            )
        )
    else:
        routes = tuple(completes[: config.k])
    timings["total_secs"] = time.monotonic() - started
    return PlanResult(
        routes=routes,
        expansions_used=expansions,
        succeeded=bool(routes),
        timings=timings,
    )

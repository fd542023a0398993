"""Batch evaluation harness and synthetic network generation.

Generated networks are layered acyclic corpora: stock molecules sit at the
bottom and every higher molecule gets one or more reactions drawing
reactants from strictly earlier molecules, so everything is synthesizable
by construction. Noise injection fabricates reactant-swapped reactions
that the corpus forward oracle rejects, modeling infeasible proposals
without any chemistry.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from synroute.checker import corpus_forward_index
from synroute.core import Reaction, repetition_rate
from synroute.search import PlanResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkParams:
    molecules: int
    stock_fraction: float
    max_arity: int = 2
    alt_routes_per_molecule: int = 2

    def __post_init__(self) -> None:
        if self.molecules < 2:
            raise ValueError("need at least 2 molecules")
        if not 0.0 < self.stock_fraction < 1.0:
            raise ValueError("stock_fraction must be in (0, 1)")
        if self.max_arity < 1 or self.alt_routes_per_molecule < 1:
            raise ValueError("max_arity and alt_routes_per_molecule must be >= 1")


def generate_network(
    seed: int, params: NetworkParams
) -> tuple[list[Reaction], dict[str, float]]:
    """Deterministic layered reaction network: (corpus, stock)."""
    rng = random.Random(seed)
    n_stock = int(params.molecules * params.stock_fraction)
    n_stock = min(max(n_stock, 1), params.molecules - 1)
    names = [f"M{i:03d}" for i in range(params.molecules)]
    stock = {name: 0.0 for name in names[:n_stock]}

    corpus: list[Reaction] = []
    for i in range(n_stock, params.molecules):
        product = names[i]
        available = names[:i]
        seen_ids: set[str] = set()
        for _ in range(rng.randint(1, params.alt_routes_per_molecule)):
            arity = rng.randint(1, min(params.max_arity, len(available)))
            reactants = rng.sample(available, arity)
            rx = Reaction.make(product, reactants, model="synthetic")
            if rx.id in seen_ids:
                continue
            seen_ids.add(rx.id)
            corpus.append(rx)
    return corpus, stock


def inject_infeasible(
    corpus: Sequence[Reaction], fraction: float, seed: int
) -> list[Reaction]:
    """Append fabricated reactions the forward oracle will reject.

    Each fake swaps one reactant of a corpus reaction for a reactant drawn
    from another reaction, keeping the product, and is only admitted when
    the resulting (reactants -> product) pair never occurs in the true
    corpus. Returns the corpus plus ``round(fraction * len(corpus))`` fakes.
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError("fraction must be in [0, 1)")
    if not corpus or fraction == 0.0:
        return list(corpus)
    rng = random.Random(seed)
    index = corpus_forward_index(corpus)
    known_ids = {rx.id for rx in corpus}
    wanted = round(len(corpus) * fraction)

    fakes: list[Reaction] = []
    attempts = 0
    while len(fakes) < wanted and attempts < 50 * wanted:
        attempts += 1
        source = rng.choice(list(corpus))
        donor = rng.choice(list(corpus))
        replacement = rng.choice(donor.reactants)
        position = rng.randrange(len(source.reactants))
        reactants = list(source.reactants)
        reactants[position] = replacement
        if source.product in reactants or len(set(reactants)) != len(reactants):
            continue
        key = tuple(sorted(reactants))
        if source.product in index.get(key, ()):
            continue  # would still pass the oracle; not infeasible
        fake = Reaction.make(source.product, reactants, model=source.model)
        if fake.id in known_ids:
            continue
        known_ids.add(fake.id)
        fakes.append(fake)
    if len(fakes) < wanted:
        logger.warning("only generated %d/%d infeasible reactions", len(fakes), wanted)
    return list(corpus) + fakes


@dataclass(frozen=True)
class TargetOutcome:
    target: str
    succeeded: bool
    top_route_lengths: tuple[int, ...]
    expansions: int


@dataclass(frozen=True)
class BatchReport:
    per_target: tuple[TargetOutcome, ...]
    success_rate: float
    avg_len_top1: float | None
    avg_len_topk: float | None
    repetition_rate_topk: float | None
    config_echo: dict

    def to_dict(self) -> dict:
        return {
            "config_echo": self.config_echo,
            "success_rate": self.success_rate,
            "avg_len_top1": self.avg_len_top1,
            "avg_len_topk": self.avg_len_topk,
            "repetition_rate_topk": self.repetition_rate_topk,
            "per_target": [
                {
                    "target": t.target,
                    "succeeded": t.succeeded,
                    "top_route_lengths": list(t.top_route_lengths),
                    "expansions": t.expansions,
                }
                for t in self.per_target
            ],
        }


def run_batch(
    targets: Sequence[str],
    plan_fn: Callable[[str], PlanResult],
    workers: int = 1,
    config_echo: dict | None = None,
) -> tuple[BatchReport, list[PlanResult | None]]:
    """Plan every target and aggregate metrics.

    Per-target failures are recorded, never abort the batch. Aggregation is
    in target order, so reports are deterministic regardless of worker
    completion order. Averages are over succeeded targets only; the
    repetition rate averages over targets with at least two returned
    routes. Returns the report plus per-target plan results (None where
    planning raised) for optional route dumps.
    """
    if not targets:
        raise ValueError("targets must be nonempty")

    def safe_plan(target: str) -> PlanResult | None:
        try:
            return plan_fn(target)
        except Exception as exc:  # noqa: BLE001 - harness records, never aborts
            logger.warning("planning %s failed: %s", target, exc)
            return None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(safe_plan, targets))
    else:
        results = [safe_plan(t) for t in targets]

    outcomes: list[TargetOutcome] = []
    for target, result in zip(targets, results):
        if result is None:
            outcomes.append(TargetOutcome(target, False, (), 0))
        else:
            outcomes.append(
                TargetOutcome(
                    target=target,
                    succeeded=result.succeeded,
                    top_route_lengths=tuple(r.length for r in result.routes),
                    expansions=result.expansions_used,
                )
            )

    succeeded = [o for o in outcomes if o.succeeded]
    success_rate = len(succeeded) / len(outcomes)
    avg_len_top1 = (
        sum(o.top_route_lengths[0] for o in succeeded) / len(succeeded)
        if succeeded
        else None
    )
    avg_len_topk = (
        sum(
            sum(o.top_route_lengths) / len(o.top_route_lengths) for o in succeeded
        )
        / len(succeeded)
        if succeeded
        else None
    )
    rep_rates = []
    for result in results:
        if result is None or len(result.routes) < 2:
            continue
        if sum(r.length for r in result.routes) == 0:
            continue
        rep_rates.append(repetition_rate(result.routes))
    repetition_topk = sum(rep_rates) / len(rep_rates) if rep_rates else None

    report = BatchReport(
        per_target=tuple(outcomes),
        success_rate=success_rate,
        avg_len_top1=avg_len_top1,
        avg_len_topk=avg_len_topk,
        repetition_rate_topk=repetition_topk,
        config_echo=dict(config_echo or {}),
    )
    return report, results

"""Service handlers: all orchestration behind the endpoints.

The CLI calls these directly in local mode; the FastAPI routes call the
same functions, so both surfaces stay in lockstep. A ServiceContext holds
the server-side session (corpus, stock, externally declared models);
requests carrying inline corpus/stock data get a self-contained
corpus-backed session instead. External ``cmd:``/``url:`` model specs are
only ever honored from the server-side context, never from request bodies.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

from synroute.bench import NetworkParams, generate_network, run_batch
from synroute.checker import Checker, CorpusChecker, ExternalChecker
from synroute.core import Reaction, Route, Stock, canonical_id
from synroute.fileio import reaction_from_record
from synroute.proposers import (
    CorpusProposer,
    Ensemble,
    EnsembleConfig,
    ExternalProposer,
    Proposer,
)
from synroute.protocol import ProtocolClient, client_from_spec
from synroute.search import ConfigurationError, PlanResult, SearchConfig, plan
from synroute.service import schemas
from synroute.value import CostTable, label_costs, value_of

logger = logging.getLogger(__name__)


@dataclass
class ServiceContext:
    """Server-side session shared across requests."""

    corpus: list[Reaction] | None = None
    stock: Stock | None = None
    proposer_specs: tuple[str, ...] = ("corpus",)
    checker_spec: str | None = "corpus"
    ensemble_config: EnsembleConfig = field(default_factory=EnsembleConfig)
    value_table: CostTable | None = None
    protocol_timeout: float = 30.0

    def __post_init__(self) -> None:
        self._clients: dict[str, ProtocolClient] = {}

    def _client(self, spec: str) -> ProtocolClient:
        if spec not in self._clients:
            self._clients[spec] = client_from_spec(spec, timeout=self.protocol_timeout)
        return self._clients[spec]

    def build_proposer(self, spec: str, corpus: Sequence[Reaction] | None) -> Proposer:
        if spec == "corpus":
            if corpus is None:
                raise ConfigurationError("corpus proposer requires a corpus")
            return CorpusProposer(corpus)
        if spec.startswith(("cmd:", "url:")):
            return ExternalProposer(self._client(spec))
        raise ConfigurationError(f"unknown proposer spec {spec!r}")

    def build_checker(self, spec: str | None, corpus: Sequence[Reaction] | None) -> Checker | None:
        if spec is None or spec == "none":
            return None
        if spec == "corpus":
            if corpus is None:
                raise ConfigurationError("corpus checker requires a corpus")
            return CorpusChecker(corpus)
        if spec.startswith(("cmd:", "url:")):
            return ExternalChecker(self._client(spec))
        raise ConfigurationError(f"unknown checker spec {spec!r}")

    def close(self) -> None:
        for client in self._clients.values():
            client.close()
        self._clients.clear()


def _parse_inline_corpus(records: Sequence[schemas.ReactionIn]) -> list[Reaction]:
    return [
        reaction_from_record(r.model_dump(by_alias=True, exclude_none=True))
        for r in records
    ]


def _parse_inline_stock(items: Sequence[schemas.StockItem]) -> dict[str, float]:
    return {canonical_id(item.molecule): item.price for item in items}


def _search_config(settings: schemas.SearchSettings) -> SearchConfig:
    return SearchConfig(
        k=settings.k,
        max_expansions=settings.max_expansions,
        wall_clock_limit_secs=settings.wall_clock_limit_secs,
        proposal_limit_per_expansion=settings.proposal_limit_per_expansion,
        default_leaf_value=settings.default_leaf_value,
        reaction_cost=settings.reaction_cost,
        early_stop=settings.early_stop,
        match_rank=settings.match_rank,
        checker_fail_open=settings.checker_fail_open,
        suppress_similar=settings.suppress_similar,
        suppress_penalty_alpha=settings.suppress_penalty_alpha,
        suppress_penalty_power=settings.suppress_penalty_power,
    )


@dataclass
class _Session:
    ensemble: Ensemble
    checker: Checker | None
    stock: Stock
    config: SearchConfig
    value_fn: object
    echo: dict


def _resolve_session(
    context: ServiceContext,
    settings: schemas.SearchSettings,
    inline_corpus: Sequence[schemas.ReactionIn] | None,
    inline_stock: Sequence[schemas.StockItem] | None,
) -> _Session:
    if inline_corpus is not None:
        corpus = _parse_inline_corpus(inline_corpus)
        proposer_specs: tuple[str, ...] = ("corpus",)
        checker_spec = "corpus" if settings.use_checker else None
    else:
        corpus = context.corpus
        proposer_specs = context.proposer_specs
        checker_spec = context.checker_spec if settings.use_checker else None
    if inline_stock is not None:
        stock: Stock = _parse_inline_stock(inline_stock)
    elif context.stock is not None:
        stock = context.stock
    else:
        raise ConfigurationError("no stock configured (inline or server-side)")
    if corpus is None and any(s == "corpus" for s in proposer_specs):
        raise ConfigurationError("no corpus configured (inline or server-side)")

    members = [context.build_proposer(spec, corpus) for spec in proposer_specs]
    checker = context.build_checker(checker_spec, corpus)
    config = _search_config(settings)

    if settings.value_from_corpus and corpus is not None:
        table: CostTable | None = label_costs(corpus, stock)
    else:
        table = context.value_table
    if table is not None:
        value_fn = partial(value_of, table, default=settings.default_leaf_value)
    else:
        value_fn = lambda m: settings.default_leaf_value  # noqa: E731

    echo = {
        "settings": settings.model_dump(),
        "proposers": [m.name for m in members],
        "checker": checker.name if checker is not None else None,
        "ensemble": {
            "per_model_limit": context.ensemble_config.per_model_limit,
            "total_limit": context.ensemble_config.total_limit,
            "merge_policy": context.ensemble_config.merge_policy,
        },
    }
    logger.info("effective config: %s", echo)
    return _Session(
        ensemble=Ensemble(members, context.ensemble_config),
        checker=checker,
        stock=stock,
        config=config,
        value_fn=value_fn,
        echo=echo,
    )


def route_to_model(route: Route) -> schemas.RouteOut:
    """Serialize a route with reactions in synthesis order (leaves first)."""
    producers = {rx.product: rx for rx in route.reactions}
    ordered: list[Reaction] = []
    done: set[str] = set()

    def emit(mol: str) -> None:
        rx = producers.get(mol)
        if rx is None or rx.id in done:
            return
        done.add(rx.id)
        for reactant in rx.reactants:
            emit(reactant)
        ordered.append(rx)

    emit(route.root)
    for rx in route.reactions:  # unreachable reactions would be a bug upstream
        if rx.id not in done:
            ordered.append(rx)
    return schemas.RouteOut(
        cost=route.total_cost,
        length=route.length,
        reactions=[
            schemas.ReactionOut(
                product=rx.product, reactants=list(rx.reactants), model=rx.model
            )
            for rx in ordered
        ],
    )


def handle_plan(request: schemas.PlanRequest, context: ServiceContext) -> schemas.PlanResponse:
    session = _resolve_session(context, request.settings, request.corpus, request.stock)
    result = plan(
        request.target,
        session.ensemble,
        session.checker,
        session.value_fn,
        session.stock,
        session.config,
    )
    logger.info(
        "plan %s: succeeded=%s expansions=%d total=%.3fs",
        request.target,
        result.succeeded,
        result.expansions_used,
        result.timings.get("total_secs", 0.0),
    )
    return schemas.PlanResponse(
        target=canonical_id(request.target),
        succeeded=result.succeeded,
        expansions_used=result.expansions_used,
        routes=[route_to_model(r) for r in result.routes],
    )


def handle_batch(request: schemas.BatchRequest, context: ServiceContext) -> schemas.BatchResponse:
    started = time.monotonic()
    session = _resolve_session(context, request.settings, request.corpus, request.stock)
    targets = [canonical_id(t) for t in request.targets]

    def plan_one(target: str) -> PlanResult:
        return plan(
            target,
            session.ensemble,
            session.checker,
            session.value_fn,
            session.stock,
            session.config,
        )

    echo = dict(session.echo)
    echo["workers"] = request.workers
    report, results = run_batch(targets, plan_one, workers=request.workers, config_echo=echo)

    per_target = []
    for outcome, result in zip(report.per_target, results):
        routes = None
        if request.include_routes and result is not None:
            routes = [route_to_model(r) for r in result.routes]
        per_target.append(
            schemas.TargetReport(
                target=outcome.target,
                succeeded=outcome.succeeded,
                top_route_lengths=list(outcome.top_route_lengths),
                expansions=outcome.expansions,
                routes=routes,
            )
        )
    logger.info(
        "batch of %d targets: success rate %.4f in %.3fs",
        len(targets),
        report.success_rate,
        time.monotonic() - started,
    )
    return schemas.BatchResponse(
        per_target=per_target,
        success_rate=report.success_rate,
        avg_len_top1=report.avg_len_top1,
        avg_len_topk=report.avg_len_topk,
        repetition_rate_topk=report.repetition_rate_topk,
        config_echo=report.config_echo,
    )


def handle_label_costs(
    request: schemas.LabelCostsRequest, context: ServiceContext
) -> schemas.LabelCostsResponse:
    corpus = (
        _parse_inline_corpus(request.corpus) if request.corpus is not None else context.corpus
    )
    stock = (
        _parse_inline_stock(request.stock) if request.stock is not None else context.stock
    )
    if corpus is None or stock is None:
        raise ConfigurationError("label-costs needs a corpus and a stock")
    table = label_costs(corpus, stock)
    labels = [
        schemas.LabelRecord(
            molecule=mol,
            cost=table.costs[mol].cost,
            steps=table.costs[mol].steps,
            price_estimate=table.costs[mol].price_estimate,
        )
        for mol in sorted(table.costs)
    ]
    return schemas.LabelCostsResponse(count=len(labels), labels=labels)


def handle_gen_network(request: schemas.GenNetworkRequest) -> schemas.GenNetworkResponse:
    params = NetworkParams(
        molecules=request.molecules,
        stock_fraction=request.stock_fraction,
        max_arity=request.max_arity,
        alt_routes_per_molecule=request.alt_routes_per_molecule,
    )
    corpus, stock = generate_network(request.seed, params)
    return schemas.GenNetworkResponse(
        corpus=[
            schemas.ReactionIn(product=rx.product, reactants=list(rx.reactants))
            for rx in corpus
        ],
        stock=[schemas.StockItem(molecule=m, price=p) for m, p in stock.items()],
    )

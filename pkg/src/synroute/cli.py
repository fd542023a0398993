"""Command-line client for the planning service.

All logic lives behind the service handlers; the CLI parses arguments,
reads input files into request models, dispatches either to the in-process
handlers (default) or to a running server (``--server URL``), and writes
the responses out. Primary outputs are byte-deterministic for identical
inputs; config echo and timing go to the log, never into output files.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import httpx

from synroute import __version__
from synroute.fileio import (
    CorpusFormatError,
    dump_json,
    load_config,
    load_corpus,
    load_stock,
    load_targets,
    reaction_from_record,
    write_corpus,
    write_stock,
)
from synroute.proposers import EnsembleConfig
from synroute.protocol import TransportError
from synroute.search import ConfigurationError
from synroute.service import handlers, schemas
from synroute.service.handlers import ServiceContext
from synroute.value import load_labels

logger = logging.getLogger("synroute")

_SETTINGS_FLAGS = (
    "k",
    "max_expansions",
    "wall_clock_limit_secs",
    "proposal_limit_per_expansion",
    "default_leaf_value",
    "reaction_cost",
    "early_stop",
    "match_rank",
    "checker_fail_open",
    "suppress_similar",
    "suppress_penalty_alpha",
    "suppress_penalty_power",
    "value_from_corpus",
)
_ENSEMBLE_KEYS = ("per_model_limit", "total_limit", "merge_policy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synroute",
        description="Retrosynthesis route planning over And-Or reaction graphs.",
    )
    parser.add_argument("--version", action="version", version=f"synroute {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, corpus_required=True):
        p.add_argument("--corpus", required=corpus_required, help="reaction corpus (ndjson)")
        p.add_argument("--stock", required=corpus_required, help="stock file (molecule[,price] per line)")

    def add_planner(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--max-expansions", type=int, default=None, dest="max_expansions")
        p.add_argument(
            "--wall-clock-limit-secs", type=float, default=None, dest="wall_clock_limit_secs"
        )
        p.add_argument(
            "--proposal-limit", type=int, default=None, dest="proposal_limit_per_expansion"
        )
        p.add_argument(
            "--default-leaf-value", type=float, default=None, dest="default_leaf_value"
        )
        p.add_argument("--reaction-cost", type=float, default=None, dest="reaction_cost")
        p.add_argument("--early-stop", action="store_true", default=None, dest="early_stop")
        p.add_argument("--match-rank", type=int, default=None, dest="match_rank")
        p.add_argument(
            "--checker-fail-open", action="store_true", default=None, dest="checker_fail_open"
        )
        p.add_argument(
            "--suppress-similar", action="store_true", default=None, dest="suppress_similar"
        )
        p.add_argument(
            "--value-from-corpus", action="store_true", default=None, dest="value_from_corpus"
        )
        p.add_argument("--no-checker", action="store_true", help="disable feasibility filtering")
        p.add_argument(
            "--proposer",
            action="append",
            dest="proposers",
            help="proposer spec: 'corpus', 'cmd:<program ...>' or 'url:<endpoint>' (repeatable)",
        )
        p.add_argument(
            "--checker",
            help="checker spec: 'corpus', 'none', 'cmd:<program ...>' or 'url:<endpoint>'",
        )
        p.add_argument("--value-table", help="cost-label export used as the value function")
        p.add_argument(
            "--protocol-timeout", type=float, default=None, dest="protocol_timeout",
            help="per-request timeout for external models (seconds, default 30)",
        )
        p.add_argument("--server", help="base URL of a running synroute server")

    p_plan = sub.add_parser("plan", help="plan routes for a single target")
    p_plan.add_argument("--target", required=True)
    add_io(p_plan, corpus_required=False)
    add_planner(p_plan)
    p_plan.add_argument("--output", help="write the plan response here instead of stdout")

    p_batch = sub.add_parser("batch", help="plan a targets file and write a report")
    p_batch.add_argument("--targets", required=True, help="targets file (one molecule per line)")
    p_batch.add_argument("--report", required=True, help="output report path (JSON)")
    p_batch.add_argument("--routes-dump", help="optional per-target route dump (ndjson)")
    p_batch.add_argument("--workers", type=int, default=1)
    add_io(p_batch, corpus_required=False)
    add_planner(p_batch)

    p_label = sub.add_parser("label-costs", help="label synthesis costs over a corpus")
    add_io(p_label)
    p_label.add_argument("--out", required=True, help="label export path (ndjson)")
    p_label.add_argument("--server", help="base URL of a running synroute server")

    p_gen = sub.add_parser("gen-network", help="generate a synthetic benchmark network")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--molecules", type=int, required=True)
    p_gen.add_argument("--stock-fraction", type=float, required=True, dest="stock_fraction")
    p_gen.add_argument("--max-arity", type=int, default=2, dest="max_arity")
    p_gen.add_argument("--alt-routes", type=int, default=2, dest="alt_routes_per_molecule")
    p_gen.add_argument("--corpus-out", required=True, dest="corpus_out")
    p_gen.add_argument("--stock-out", required=True, dest="stock_out")
    p_gen.add_argument("--server", help="base URL of a running synroute server")

    p_serve = sub.add_parser("serve", help="run the planning service")
    add_io(p_serve, corpus_required=False)
    add_planner(p_serve)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _settings_from(args: argparse.Namespace) -> schemas.SearchSettings:
    """Defaults < config file < explicit flags."""
    values: dict = {}
    if getattr(args, "config", None):
        file_config = load_config(args.config)
        values.update(
            {key: file_config[key] for key in _SETTINGS_FLAGS if key in file_config}
        )
    for key in _SETTINGS_FLAGS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "no_checker", False):
        values["use_checker"] = False
    return schemas.SearchSettings(**values)


def _ensemble_config_from(args: argparse.Namespace) -> EnsembleConfig:
    values: dict = {}
    if getattr(args, "config", None):
        file_config = load_config(args.config)
        values.update(
            {key: file_config[key] for key in _ENSEMBLE_KEYS if key in file_config}
        )
    return EnsembleConfig(**values)


def _local_context(args: argparse.Namespace) -> ServiceContext:
    corpus = load_corpus(args.corpus) if getattr(args, "corpus", None) else None
    stock = load_stock(args.stock) if getattr(args, "stock", None) else None
    proposers = tuple(getattr(args, "proposers", None) or ("corpus",))
    checker = getattr(args, "checker", None) or "corpus"
    table = None
    if getattr(args, "value_table", None):
        table = load_labels(args.value_table)
    timeout = getattr(args, "protocol_timeout", None)
    if timeout is None and getattr(args, "config", None):
        timeout = load_config(args.config).get("protocol_timeout")
    return ServiceContext(
        corpus=corpus,
        stock=stock,
        proposer_specs=proposers,
        checker_spec=checker,
        ensemble_config=_ensemble_config_from(args),
        value_table=table,
        protocol_timeout=timeout if timeout is not None else 30.0,
    )


def _post(server: str, path: str, payload: dict) -> dict:
    url = server.rstrip("/") + path
    response = httpx.post(url, json=payload, timeout=None)
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ConfigurationError(f"server rejected request: {detail}")
    return response.json()


def _remote_guard(args: argparse.Namespace) -> None:
    external_checker = getattr(args, "checker", None) not in (None, "corpus", "none")
    if getattr(args, "proposers", None) or getattr(args, "value_table", None) or external_checker:
        raise ConfigurationError(
            "--proposer/--checker model specs and --value-table are server-side "
            "settings; configure them on the server process, not through --server"
        )


def _cmd_plan(args: argparse.Namespace) -> int:
    settings = _settings_from(args)
    if args.server:
        _remote_guard(args)
        request = schemas.PlanRequest(
            target=args.target,
            corpus=_inline_corpus(args) if args.corpus else None,
            stock=_inline_stock_models(args) if args.stock else None,
            settings=settings,
        )
        payload = request.model_dump(mode="json", exclude_none=True)
        response = _post(args.server, "/plan", payload)
    else:
        # Local mode: files load into the context so external proposer and
        # checker specs apply; the request itself stays lean.
        request = schemas.PlanRequest(target=args.target, settings=settings)
        response = handlers.handle_plan(request, _local_context(args)).model_dump()
    text = dump_json(response, args.output)
    if not args.output:
        sys.stdout.write(text)
    logger.info("plan finished: succeeded=%s", response.get("succeeded"))
    return 0


def _inline_corpus(args: argparse.Namespace) -> list[schemas.ReactionIn]:
    corpus = load_corpus(args.corpus)
    return [
        schemas.ReactionIn(product=rx.product, reactants=list(rx.reactants))
        for rx in corpus
    ]


def _inline_stock(args: argparse.Namespace) -> list[dict]:
    return [
        {"molecule": mol, "price": price} for mol, price in load_stock(args.stock).items()
    ]


def _inline_stock_models(args: argparse.Namespace) -> list[schemas.StockItem]:
    return [schemas.StockItem(**item) for item in _inline_stock(args)]


def _cmd_batch(args: argparse.Namespace) -> int:
    settings = _settings_from(args)
    targets = load_targets(args.targets)
    include_routes = bool(args.routes_dump)
    if args.server:
        _remote_guard(args)
        request = schemas.BatchRequest(
            targets=targets,
            corpus=_inline_corpus(args) if args.corpus else None,
            stock=_inline_stock_models(args) if args.stock else None,
            settings=settings,
            workers=args.workers,
            include_routes=include_routes,
        )
        raw = _post(args.server, "/batch", request.model_dump(mode="json", exclude_none=True))
        response = schemas.BatchResponse(**raw)
    else:
        request = schemas.BatchRequest(
            targets=targets,
            settings=settings,
            workers=args.workers,
            include_routes=include_routes,
        )
        response = handlers.handle_batch(request, _local_context(args))
    dump_json(response.report_dict(), args.report)
    if args.routes_dump:
        lines = []
        for entry in response.per_target:
            routes = entry.routes or []
            lines.append(
                json.dumps(
                    {
                        "target": entry.target,
                        "routes": [
                            [r.model_dump() for r in route.reactions] for route in routes
                        ],
                    },
                    sort_keys=True,
                )
            )
        Path(args.routes_dump).write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )
    logger.info(
        "batch finished: %d targets, success rate %.4f",
        len(response.per_target),
        response.success_rate,
    )
    return 0


def _cmd_label_costs(args: argparse.Namespace) -> int:
    request = schemas.LabelCostsRequest(
        corpus=_inline_corpus(args), stock=_inline_stock_models(args)
    )
    if args.server:
        raw = _post(args.server, "/label-costs", request.model_dump(mode="json", exclude_none=True))
        response = schemas.LabelCostsResponse(**raw)
    else:
        response = handlers.handle_label_costs(request, ServiceContext())
    lines = [
        json.dumps(
            {
                "molecule": label.molecule,
                "cost": label.cost,
                "steps": label.steps,
                "price_estimate": label.price_estimate,
            },
            sort_keys=True,
        )
        for label in response.labels
    ]
    Path(args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.info("labeled %d molecules -> %s", response.count, args.out)
    return 0


def _cmd_gen_network(args: argparse.Namespace) -> int:
    request = schemas.GenNetworkRequest(
        seed=args.seed,
        molecules=args.molecules,
        stock_fraction=args.stock_fraction,
        max_arity=args.max_arity,
        alt_routes_per_molecule=args.alt_routes_per_molecule,
    )
    if args.server:
        raw = _post(args.server, "/gen-network", request.model_dump(mode="json"))
        response = schemas.GenNetworkResponse(**raw)
    else:
        response = handlers.handle_gen_network(request)
    corpus = [
        reaction_from_record(r.model_dump(by_alias=True, exclude_none=True))
        for r in response.corpus
    ]
    write_corpus(args.corpus_out, corpus)
    write_stock(args.stock_out, {item.molecule: item.price for item in response.stock})
    logger.info(
        "generated %d reactions, %d stock molecules", len(response.corpus), len(response.stock)
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from synroute.service.app import create_app

    context = _local_context(args)
    app = create_app(context)
    logger.info("serving on %s:%d", args.host, args.port)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "plan": _cmd_plan,
    "batch": _cmd_batch,
    "label-costs": _cmd_label_costs,
    "gen-network": _cmd_gen_network,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CorpusFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigurationError, TransportError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: cannot reach server: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

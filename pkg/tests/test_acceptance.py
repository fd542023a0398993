"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines interleaved; without ``-s`` they still appear for failing criteria.
"""

import math
import random
import time

import pytest

from synroute.bench import (
    NetworkParams,
    generate_network,
    inject_infeasible,
    run_batch,
)
from synroute.checker import CorpusChecker
from synroute.core import Reaction, Route, repetition_rate, route_cost, validate_route
from synroute.fileio import dump_json
from synroute.proposers import CorpusProposer, Ensemble, EnsembleConfig
from synroute.search import SearchConfig, plan
from synroute.suppression import suppress, suppression_penalty
from synroute.value import label_costs

from tests.conftest import plan_over_corpus, rx
from tests.oracle import enumerate_costs


def _report(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[ACCEPTANCE] {name}: {status}{suffix}")
    assert passed, f"{name}: {detail}"


def _acceptance_instances():
    """100 seeded networks within the stated envelope (<=30 molecules,
    <=3 alternative routes per molecule), plus per-instance targets."""
    instances = []
    for seed in range(100):
        molecules = [14, 18, 22, 26, 30][seed % 5]
        arity = 2 if seed % 3 else 3
        params = NetworkParams(
            molecules=molecules,
            stock_fraction=0.35,
            max_arity=arity,
            alt_routes_per_molecule=3,
        )
        corpus, stock = generate_network(seed, params)
        targets = list(
            dict.fromkeys(
                [
                    f"M{molecules - 1:03d}",
                    f"M{molecules - 2:03d}",
                    f"M{(molecules * 3) // 4:03d}",
                ]
            )
        )
        instances.append((seed, corpus, stock, targets))
    return instances


class TestKBestOracleEquivalence:
    def test_criterion(self):
        started = time.monotonic()
        checked = 0
        violations = []
        route_violations = 0
        for seed, corpus, stock, targets in _acceptance_instances():
            for target in targets:
                oracle = enumerate_costs(corpus, stock, target, 10)
                for k in (1, 3, 10):
                    result = plan_over_corpus(
                        corpus, stock, target, SearchConfig(k=k, max_expansions=500)
                    )
                    got = [r.total_cost for r in result.routes]
                    expected = oracle[:k]
                    checked += 1
                    if len(got) != len(expected) or any(
                        abs(a - b) > 1e-9 for a, b in zip(got, expected)
                    ):
                        violations.append((seed, target, k, got, expected))
                    for route in result.routes:
                        if validate_route(route, stock):
                            route_violations += 1
        elapsed = time.monotonic() - started
        _report(
            "k-best oracle equivalence",
            not violations and elapsed < 60.0,
            f"{checked} checks over 100 instances, {len(violations)} mismatches, "
            f"{elapsed:.1f}s",
        )
        _report(
            "route validity (oracle-equivalence plans)",
            route_violations == 0,
            f"{route_violations} violations",
        )


class TestSingleBestReduction:
    def test_criterion(self):
        mismatches = []
        checked = 0
        for seed, corpus, stock, targets in _acceptance_instances():
            table = label_costs(corpus, stock)
            for target in targets:
                result = plan_over_corpus(
                    corpus, stock, target, SearchConfig(k=1, max_expansions=500)
                )
                label = table.get(target)
                checked += 1
                if not result.succeeded or label is None:
                    mismatches.append((seed, target, "missing route or label"))
                    continue
                if abs(result.routes[0].total_cost - label.cost) > 1e-9:
                    mismatches.append(
                        (seed, target, result.routes[0].total_cost, label.cost)
                    )
        _report(
            "single-best reduction (k=1 planning equals relaxation minimum)",
            not mismatches,
            f"{checked} targets, {len(mismatches)} mismatches",
        )


class TestCostArithmetic:
    def test_criterion(self):
        exact = all(route_cost(0, n) == float(n) for n in range(101))
        ln100 = abs(route_cost(99, 0) - math.log(100.0)) <= 1e-12
        _report("route cost arithmetic", exact and ln100)


class TestSuppressionArithmetic:
    def test_criterion(self):
        expected = {0: 1.0, 1: 1.21, 2: 1.44, 3: 1.69}
        penalties_ok = all(
            abs(suppression_penalty(r) - v) <= 1e-12 for r, v in expected.items()
        )

        # Worked example: costs (10, 11, 13); route_2 shares 4 reactions with
        # route_1 (penalty 1.96 -> 21.56), route_3 disjoint (13.0).
        shared = [rx(f"S{i}", [f"s{i}"]) for i in range(4)]
        route_1 = Route.build("T", shared + [rx("T", ["S0"])], 10.0, complete=True)
        route_2 = Route.build("T", shared + [rx("T", ["S1"])], 11.0, complete=True)
        route_3 = Route.build(
            "T", [rx("T", ["q1"]), rx("q1", ["q2"])], 13.0, complete=True
        )
        out = suppress([route_1, route_2, route_3], k=3)
        order_ok = [r.total_cost for r in out] == [10.0, 13.0, 11.0]
        _report("suppression arithmetic", penalties_ok and order_ok)


def _subset(corpus, keep_probability, seed):
    rng = random.Random(seed)
    subset = [rx_ for rx_ in corpus if rng.random() < keep_probability]
    return subset or list(corpus)


def _success_rate(corpus_view, true_corpus, stock, targets, use_checker):
    checker = CorpusChecker(true_corpus) if use_checker else None
    ensemble = Ensemble(
        [CorpusProposer(corpus_view)],
        EnsembleConfig(per_model_limit=50, total_limit=50),
    )
    cfg = SearchConfig(k=1, max_expansions=300)
    hits = 0
    for target in targets:
        result = plan(target, ensemble, checker, lambda m: 1.0, stock, cfg)
        hits += result.succeeded
    return hits / len(targets)


def _ensemble_success_rate(views, true_corpus, stock, targets):
    ensemble = Ensemble(
        [CorpusProposer(v, name=f"model{i}") for i, v in enumerate(views)],
        EnsembleConfig(per_model_limit=50, total_limit=100),
    )
    checker = CorpusChecker(true_corpus)
    cfg = SearchConfig(k=1, max_expansions=300)
    hits = 0
    for target in targets:
        result = plan(target, ensemble, checker, lambda m: 1.0, stock, cfg)
        hits += result.succeeded
    return hits / len(targets)


class TestDirectionalCheckerAndEnsemble:
    def test_criterion(self):
        params = NetworkParams(
            molecules=20, stock_fraction=0.35, max_arity=2, alt_routes_per_molecule=3
        )
        checker_monotone = 0
        ensemble_wins = 0
        strict_drops = 0
        seeds = range(20)
        for seed in seeds:
            true_corpus, stock = generate_network(seed, params)
            targets = [f"M{i:03d}" for i in range(10, 20)]
            noisy = inject_infeasible(true_corpus, 0.3, seed=1000 + seed)

            # (a) the checker only ever filters.
            s_off = _success_rate(noisy, true_corpus, stock, targets, use_checker=False)
            s_on = _success_rate(noisy, true_corpus, stock, targets, use_checker=True)
            if s_on <= s_off + 1e-12:
                checker_monotone += 1
            if s_on < s_off - 1e-12:
                strict_drops += 1

            # (b) mixing two partial noisy models beats either alone.
            view_a = inject_infeasible(
                _subset(true_corpus, 0.7, seed=2000 + seed), 0.3, seed=3000 + seed
            )
            view_b = inject_infeasible(
                _subset(true_corpus, 0.7, seed=4000 + seed), 0.3, seed=5000 + seed
            )
            s_a = _success_rate(view_a, true_corpus, stock, targets, use_checker=True)
            s_b = _success_rate(view_b, true_corpus, stock, targets, use_checker=True)
            s_mix = _ensemble_success_rate([view_a, view_b], true_corpus, stock, targets)
            if s_mix >= max(s_a, s_b) - 1e-12:
                ensemble_wins += 1

        _report(
            "directional checker pattern (success only drops under filtering)",
            checker_monotone == 20,
            f"{checker_monotone}/20 seeds monotone, {strict_drops} with a strict drop",
        )
        _report(
            "directional ensemble pattern (mixing beats best single model)",
            ensemble_wins >= 18,
            f"{ensemble_wins}/20 seeds",
        )


def _route_family(seed: int) -> list[Route]:
    """Near-duplicate cluster + fully disjoint alternatives for one target."""
    rng = random.Random(seed)
    core_len = rng.randint(3, 5)
    core = [rx("T", [f"f{seed}c0"])]
    for i in range(core_len - 1):
        core.append(rx(f"f{seed}c{i}", [f"f{seed}c{i + 1}"]))

    routes = []
    for d in range(rng.randint(8, 10)):
        tail_len = rng.randint(1, 2)
        tail = [rx(f"f{seed}c{core_len - 1}", [f"f{seed}d{d}t0"])]
        for j in range(tail_len - 1):
            tail.append(rx(f"f{seed}d{d}t{j}", [f"f{seed}d{d}t{j + 1}"]))
        reactions = core + tail
        routes.append(
            Route.build("T", reactions, float(len(reactions)), complete=True)
        )
    for a in range(rng.randint(4, 6)):
        length = rng.randint(core_len + 2, core_len + 4)
        chain = [rx("T", [f"f{seed}a{a}x0"])]
        for j in range(length - 1):
            chain.append(rx(f"f{seed}a{a}x{j}", [f"f{seed}a{a}x{j + 1}"]))
        routes.append(Route.build("T", chain, float(len(chain)), complete=True))
    return routes


class TestDirectionalSuppression:
    def test_criterion(self):
        improved = 0
        families = 30
        for seed in range(families):
            routes = _route_family(seed)
            before = sorted(routes, key=Route.sort_key)[:10]
            after = suppress(routes, k=10)
            if repetition_rate(after) <= repetition_rate(before) + 1e-12:
                improved += 1
        _report(
            "directional suppression pattern (top-10 repetition never rises)",
            improved == families,
            f"{improved}/{families} families",
        )


class TestRouteValidity:
    def test_criterion(self):
        # Independent validation across planner outputs, including noisy and
        # suppressed configurations.
        violations = 0
        routes_seen = 0
        params = NetworkParams(
            molecules=18, stock_fraction=0.4, max_arity=2, alt_routes_per_molecule=3
        )
        for seed in range(15):
            corpus, stock = generate_network(seed, params)
            noisy = inject_infeasible(corpus, 0.3, seed=seed)
            for cfg in (
                SearchConfig(k=5, max_expansions=300),
                SearchConfig(k=5, max_expansions=300, suppress_similar=True),
            ):
                result = plan_over_corpus(
                    noisy, stock, f"M{params.molecules - 1:03d}", cfg,
                    checker=CorpusChecker(corpus),
                )
                for route in result.routes:
                    routes_seen += 1
                    if validate_route(route, stock):
                        violations += 1
        _report(
            "route validity",
            violations == 0 and routes_seen > 0,
            f"{routes_seen} routes validated, {violations} violations",
        )


class TestDeterminism:
    def test_criterion(self):
        params = NetworkParams(
            molecules=22, stock_fraction=0.35, max_arity=2, alt_routes_per_molecule=3
        )
        corpus, stock = generate_network(42, params)
        targets = [f"M{i:03d}" for i in range(10, 22)]

        def run_once() -> str:
            ensemble = Ensemble(
                [CorpusProposer(corpus)],
                EnsembleConfig(per_model_limit=50, total_limit=50),
            )
            checker = CorpusChecker(corpus)
            cfg = SearchConfig(k=3, max_expansions=300)
            plan_fn = lambda t: plan(t, ensemble, checker, lambda m: 1.0, stock, cfg)
            report, _ = run_batch(
                targets, plan_fn, workers=4, config_echo={"k": 3, "seed": 42}
            )
            return dump_json(report.to_dict())

        first = run_once()
        second = run_once()
        _report(
            "determinism (byte-identical batch reports)",
            first == second,
            f"{len(first)} bytes",
        )


class TestSecondaryProtocolConformance:
    """[SECONDARY] The reference model server at noise 0 is extensionally
    equal to the in-process corpus proposer and oracle; the primary criteria
    above run fully without it."""

    def _plan_fingerprint(self, result):
        return (
            result.succeeded,
            result.expansions_used,
            tuple((r.total_cost, r.reaction_ids) for r in result.routes),
        )

    def test_criterion_plan_parity(self, node, server_dist, tmp_path):
        from synroute.checker import ExternalChecker
        from synroute.fileio import write_corpus
        from synroute.proposers import ExternalProposer
        from synroute.protocol import ProtocolClient, StdioTransport

        params = NetworkParams(
            molecules=14, stock_fraction=0.4, max_arity=2, alt_routes_per_molecule=3
        )
        cfg = SearchConfig(k=3, max_expansions=200)
        mismatches = []
        for seed in range(10):
            corpus, stock = generate_network(seed, params)
            corpus_path = tmp_path / f"corpus_{seed}.jsonl"
            write_corpus(corpus_path, corpus)
            client = ProtocolClient(
                StdioTransport(
                    [node, str(server_dist), "serve", "--corpus", str(corpus_path)],
                    timeout=20,
                )
            )
            try:
                remote_ensemble = Ensemble(
                    [ExternalProposer(client, name="reference")],
                    EnsembleConfig(per_model_limit=50, total_limit=50),
                )
                remote_checker = ExternalChecker(client)
                local_ensemble = Ensemble(
                    [CorpusProposer(corpus)],
                    EnsembleConfig(per_model_limit=50, total_limit=50),
                )
                local_checker = CorpusChecker(corpus)
                target = f"M{params.molecules - 1:03d}"
                remote = plan(
                    target, remote_ensemble, remote_checker, lambda m: 1.0, stock, cfg
                )
                local = plan(
                    target, local_ensemble, local_checker, lambda m: 1.0, stock, cfg
                )
                if self._plan_fingerprint(remote) != self._plan_fingerprint(local):
                    mismatches.append(seed)
            finally:
                client.close()
        _report(
            "secondary protocol conformance (plan parity over the wire)",
            not mismatches,
            f"10 networks, mismatched seeds: {mismatches}",
        )

    def test_criterion_golden_fixture_bytes(self, node, server_dist):
        import json
        import subprocess
        from pathlib import Path

        golden = Path(__file__).parent / "data" / "golden_protocol.ndjson"
        pairs = [json.loads(line) for line in golden.read_text().splitlines()]
        proc = subprocess.Popen(
            [node, str(server_dist), "replay", "--fixture", str(golden)],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        byte_equal = True
        try:
            assert proc.stdin is not None and proc.stdout is not None
            for i, pair in enumerate(pairs):
                request = dict(pair["request"])
                request["id"] = f"g{i}"
                expected = dict(pair["response"])
                expected["id"] = f"g{i}"
                # JSON.stringify form: compact separators, insertion order.
                expected_line = json.dumps(
                    expected, separators=(",", ":"), ensure_ascii=False
                )
                proc.stdin.write(json.dumps(request) + "\n")
                proc.stdin.flush()
                received = proc.stdout.readline().rstrip("\n")
                if received != expected_line:
                    byte_equal = False
        finally:
            proc.terminate()
            proc.wait(timeout=10)
        _report(
            "secondary golden fixture round-trip (byte-for-byte)",
            byte_equal,
            f"{len(pairs)} exchanges",
        )

import json
import sys
from pathlib import Path

import pytest

from synroute.cli import main
from synroute.fileio import load_corpus, load_stock, write_corpus, write_stock

from tests.conftest import rx

HELPER = Path(__file__).parent / "helpers" / "stdio_model.py"


@pytest.fixture
def chain_files(tmp_path):
    corpus = [rx("C", ["A", "B"]), rx("D", ["C"])]
    corpus_path = tmp_path / "corpus.jsonl"
    stock_path = tmp_path / "stock.txt"
    write_corpus(corpus_path, corpus)
    write_stock(stock_path, {"A": 0.0, "B": 0.0})
    return corpus_path, stock_path


class TestPlanCommand:
    def test_chain_plan_to_stdout(self, chain_files, capsys):
        corpus_path, stock_path = chain_files
        code = main(
            [
                "plan",
                "--target", "D",
                "--corpus", str(corpus_path),
                "--stock", str(stock_path),
                "--k", "3",
            ]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["succeeded"]
        assert len(body["routes"]) == 1
        assert body["routes"][0]["cost"] == pytest.approx(2.0)

    def test_output_file(self, chain_files, tmp_path):
        corpus_path, stock_path = chain_files
        out = tmp_path / "plan.json"
        code = main(
            [
                "plan", "--target", "D",
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--output", str(out),
            ]
        )
        assert code == 0
        assert json.loads(out.read_text())["succeeded"]

    def test_missing_corpus_file(self, tmp_path, capsys):
        stock = tmp_path / "stock.txt"
        stock.write_text("A\n")
        code = main(
            [
                "plan", "--target", "D",
                "--corpus", str(tmp_path / "missing.jsonl"), "--stock", str(stock),
            ]
        )
        assert code == 1
        assert "missing.jsonl" in capsys.readouterr().err

    def test_malformed_corpus_line_diagnostic(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.jsonl"
        corpus.write_text('{"product": "C", "reactants": ["A"]}\n{"product": 5}\n')
        stock = tmp_path / "stock.txt"
        stock.write_text("A\n")
        code = main(
            ["plan", "--target", "C", "--corpus", str(corpus), "--stock", str(stock)]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert "corpus.jsonl:2" in err

    def test_config_file_with_flag_override(self, chain_files, tmp_path, capsys):
        corpus_path, stock_path = chain_files
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"k": 1, "max_expansions": 1}))
        # Flag overrides the file's max_expansions so the plan succeeds.
        code = main(
            [
                "plan", "--target", "D",
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--config", str(config), "--max-expansions", "50",
            ]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["succeeded"]

    def test_external_proposer_spec(self, tmp_path, capsys):
        fixture = {
            "propose": {"T": [{"reactants": ["A"], "score": None, "model": "fx"}]},
            "check": {"A": ["T"]},
        }
        fixture_path = tmp_path / "fixture.json"
        fixture_path.write_text(json.dumps(fixture))
        stock = tmp_path / "stock.txt"
        stock.write_text("A\n")
        spec = f"cmd:{sys.executable} {HELPER} --fixture {fixture_path}"
        code = main(
            [
                "plan", "--target", "T", "--stock", str(stock),
                "--proposer", spec, "--checker", spec,
            ]
        )
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["succeeded"]
        assert body["routes"][0]["reactions"][0]["model"] == "fx"


class TestBatchCommand:
    def test_batch_report_and_dump(self, chain_files, tmp_path):
        corpus_path, stock_path = chain_files
        targets = tmp_path / "targets.txt"
        targets.write_text("C\nD\nGHOST\n")
        report = tmp_path / "report.json"
        dump = tmp_path / "routes.ndjson"
        code = main(
            [
                "batch", "--targets", str(targets),
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--report", str(report), "--routes-dump", str(dump), "--k", "2",
            ]
        )
        assert code == 0
        body = json.loads(report.read_text())
        assert body["success_rate"] == pytest.approx(2 / 3)
        lines = [json.loads(l) for l in dump.read_text().splitlines()]
        assert [l["target"] for l in lines] == ["C", "D", "GHOST"]
        assert lines[1]["routes"][0][0]["product"] == "C"

    def test_byte_identical_reports(self, chain_files, tmp_path):
        corpus_path, stock_path = chain_files
        targets = tmp_path / "targets.txt"
        targets.write_text("C\nD\n")
        r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
        argv = [
            "batch", "--targets", str(targets),
            "--corpus", str(corpus_path), "--stock", str(stock_path),
            "--workers", "3", "--k", "2",
        ]
        assert main(argv + ["--report", str(r1)]) == 0
        assert main(argv + ["--report", str(r2)]) == 0
        assert r1.read_bytes() == r2.read_bytes()


class TestLabelCostsCommand:
    def test_label_export(self, chain_files, tmp_path):
        corpus_path, stock_path = chain_files
        out = tmp_path / "labels.ndjson"
        code = main(
            [
                "label-costs",
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--out", str(out),
            ]
        )
        assert code == 0
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert [r["molecule"] for r in records] == ["A", "B", "C", "D"]
        by_mol = {r["molecule"]: r for r in records}
        assert by_mol["D"]["steps"] == 2

    def test_value_table_feeds_plan(self, chain_files, tmp_path, capsys):
        corpus_path, stock_path = chain_files
        labels = tmp_path / "labels.ndjson"
        assert main(
            [
                "label-costs", "--corpus", str(corpus_path),
                "--stock", str(stock_path), "--out", str(labels),
            ]
        ) == 0
        code = main(
            [
                "plan", "--target", "D",
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--value-table", str(labels),
            ]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["succeeded"]


class TestGenNetworkCommand:
    def test_deterministic_files(self, tmp_path):
        outs = []
        for run in ("x", "y"):
            corpus_out = tmp_path / f"corpus_{run}.jsonl"
            stock_out = tmp_path / f"stock_{run}.txt"
            code = main(
                [
                    "gen-network", "--seed", "1", "--molecules", "12",
                    "--stock-fraction", "0.5",
                    "--corpus-out", str(corpus_out), "--stock-out", str(stock_out),
                ]
            )
            assert code == 0
            outs.append((corpus_out.read_bytes(), stock_out.read_bytes()))
        assert outs[0] == outs[1]

    def test_generated_files_loadable_and_plannable(self, tmp_path, capsys):
        corpus_out = tmp_path / "corpus.jsonl"
        stock_out = tmp_path / "stock.txt"
        assert main(
            [
                "gen-network", "--seed", "3", "--molecules", "10",
                "--stock-fraction", "0.5",
                "--corpus-out", str(corpus_out), "--stock-out", str(stock_out),
            ]
        ) == 0
        assert len(load_corpus(corpus_out)) >= 5
        assert len(load_stock(stock_out)) == 5
        # --no-checker: the strict top-1 oracle can reject true reactions
        # whose reactant set also yields a lexicographically earlier product.
        code = main(
            [
                "plan", "--target", "M009",
                "--corpus", str(corpus_out), "--stock", str(stock_out),
                "--no-checker",
            ]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["succeeded"]


class TestRemoteMode:
    def test_plan_against_server(self, chain_files, tmp_path, capsys, monkeypatch):
        corpus_path, stock_path = chain_files

        # Route httpx.post through an in-process test client.
        from fastapi.testclient import TestClient

        from synroute.service.app import create_app

        real_client = TestClient(create_app())

        def fake_post(url, json=None, timeout=None):
            path = url.replace("http://server", "")
            return real_client.post(path, json=json)

        monkeypatch.setattr("synroute.cli.httpx.post", fake_post)
        code = main(
            [
                "plan", "--target", "D",
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--server", "http://server",
            ]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out)["succeeded"]

    def test_batch_against_server(self, chain_files, tmp_path, monkeypatch):
        corpus_path, stock_path = chain_files
        targets = tmp_path / "targets.txt"
        targets.write_text("C\nD\n")
        report = tmp_path / "report.json"

        from fastapi.testclient import TestClient

        from synroute.service.app import create_app

        real_client = TestClient(create_app())

        def fake_post(url, json=None, timeout=None):
            return real_client.post(url.replace("http://server", ""), json=json)

        monkeypatch.setattr("synroute.cli.httpx.post", fake_post)
        code = main(
            [
                "batch", "--targets", str(targets),
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--report", str(report), "--server", "http://server", "--k", "2",
            ]
        )
        assert code == 0
        body = json.loads(report.read_text())
        assert body["success_rate"] == 1.0
        assert len(body["per_target"]) == 2

    def test_remote_rejects_external_specs(self, chain_files, capsys):
        corpus_path, stock_path = chain_files
        code = main(
            [
                "plan", "--target", "D",
                "--corpus", str(corpus_path), "--stock", str(stock_path),
                "--server", "http://server", "--proposer", "cmd:whatever",
            ]
        )
        assert code == 1
        assert "server-side" in capsys.readouterr().err

import shutil
import subprocess
from pathlib import Path

import pytest

from synroute.core import Reaction
from synroute.proposers import CorpusProposer, Ensemble, EnsembleConfig
from synroute.search import SearchConfig, plan
from synroute.value import label_costs, value_of

SERVER_DIR = Path(__file__).parent.parent / "server-ts"


def rx(product, reactants, cost=1.0, model=""):
    return Reaction.make(product, reactants, cost=cost, model=model)


@pytest.fixture
def chain_network():
    """corpus {A+B->C, C->D}, stock {A:0, B:0}."""
    corpus = [rx("C", ["A", "B"]), rx("D", ["C"])]
    stock = {"A": 0.0, "B": 0.0}
    return corpus, stock


@pytest.fixture
def two_route_network():
    """corpus {A+B->C, B->C}, stock {A:0, B:0}."""
    corpus = [rx("C", ["A", "B"]), rx("C", ["B"])]
    stock = {"A": 0.0, "B": 0.0}
    return corpus, stock


def plan_over_corpus(corpus, stock, target, config=None, checker=None, value_table=None):
    """Wire a corpus-backed planner the way the service layer does."""
    cfg = config or SearchConfig()
    ensemble = Ensemble(
        [CorpusProposer(corpus)],
        EnsembleConfig(per_model_limit=50, total_limit=50),
    )
    if value_table is not None:
        value_fn = lambda m: value_of(value_table, m, cfg.default_leaf_value)
    else:
        value_fn = lambda m: cfg.default_leaf_value
    return plan(target, ensemble, checker, value_fn, stock, cfg)


@pytest.fixture
def corpus_planner():
    return plan_over_corpus


@pytest.fixture
def labeled_value_fn():
    def build(corpus, stock, default=1.0):
        table = label_costs(corpus, stock)
        return lambda m: value_of(table, m, default)

    return build


@pytest.fixture(scope="session")
def node() -> str:
    path = shutil.which("node")
    if path is None:
        pytest.skip("node is not installed; secondary component unavailable")
    return path


@pytest.fixture(scope="session")
def server_dist(node) -> Path:
    """Path to the built reference model server; builds it on first use."""
    dist = SERVER_DIR / "dist" / "main.js"
    if dist.exists():
        return dist
    npm = shutil.which("npm")
    if npm is None:
        pytest.skip("npm is not installed; cannot build the reference server")
    for argv in ([npm, "install"], [npm, "run", "build"]):
        proc = subprocess.run(
            argv, cwd=SERVER_DIR, capture_output=True, text=True, timeout=600
        )
        if proc.returncode != 0:
            pytest.skip(f"{' '.join(argv)} failed: {proc.stderr[-500:]}")
    return dist

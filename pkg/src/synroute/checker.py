"""Feasibility gate: does a forward model turn the reactants into the target?

A proposal passes when the target ranks at or above ``match_rank`` among
the products predicted for its reactants. The corpus oracle stands in for
a neural product-prediction model at desk scale: products observed for a
reactant set in the corpus, ranked by frequency. A real model plugs in
unchanged through the wire protocol.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Protocol, Sequence

from synroute.core import Reaction
from synroute.protocol import ProtocolClient

DEFAULT_MATCH_RANK = 1

#: sorted reactant tuple -> products ranked by corpus frequency, then lexicographic
ForwardIndex = dict[tuple[str, ...], tuple[str, ...]]


@dataclass(frozen=True)
class CheckVerdict:
    passed: bool
    rank: int | None  # 1-based position of the target among predicted products
    products: tuple[str, ...]


class Checker(Protocol):
    name: str

    def check(
        self, reactants: Sequence[str], target: str, match_rank: int = DEFAULT_MATCH_RANK
    ) -> CheckVerdict: ...


def _reactant_key(reactants: Sequence[str]) -> tuple[str, ...]:
    return tuple(sorted(reactants))


def corpus_forward_index(corpus: Sequence[Reaction]) -> ForwardIndex:
    """Map each reactant set to its observed products, most frequent first."""
    counts: dict[tuple[str, ...], Counter] = {}
    for rx in corpus:
        counts.setdefault(_reactant_key(rx.reactants), Counter())[rx.product] += 1
    index: ForwardIndex = {}
    for key, counter in counts.items():
        ranked = sorted(counter.items(), key=lambda item: (-item[1], item[0]))
        index[key] = tuple(product for product, _ in ranked)
    return index


def _verdict(products: Sequence[str], target: str, match_rank: int) -> CheckVerdict:
    if match_rank < 1:
        raise ValueError("match_rank must be >= 1")
    rank = products.index(target) + 1 if target in products else None
    return CheckVerdict(
        passed=rank is not None and rank <= match_rank,
        rank=rank,
        products=tuple(products),
    )


class CorpusChecker:
    """Forward oracle backed by exact corpus lookup."""

    def __init__(self, corpus: Sequence[Reaction], name: str = "corpus-oracle"):
        self.name = name
        self._index = corpus_forward_index(corpus)

    def check(
        self, reactants: Sequence[str], target: str, match_rank: int = DEFAULT_MATCH_RANK
    ) -> CheckVerdict:
        if not reactants:
            raise ValueError("reactants must be nonempty")
        products = self._index.get(_reactant_key(reactants), ())
        return _verdict(products, target, match_rank)


class ExternalChecker:
    """Product-prediction model reached over the wire protocol."""

    def __init__(self, client: ProtocolClient, name: str = ""):
        self.client = client
        self.name = name or client.name

    def check(
        self, reactants: Sequence[str], target: str, match_rank: int = DEFAULT_MATCH_RANK
    ) -> CheckVerdict:
        if not reactants:
            raise ValueError("reactants must be nonempty")
        if match_rank < 1:
            raise ValueError("match_rank must be >= 1")
        response = self.client.call(
            "check",
            {"reactants": list(reactants), "target": target, "limit": match_rank},
        )
        products = response.get("products")
        if not isinstance(products, list):
            products = []
        return _verdict([str(p) for p in products], target, match_rank)

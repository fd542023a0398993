"""Single-step reaction generation: proposer interface, corpus lookup,
external wire-protocol clients, and the diversity-preserving ensemble mixer.

Mixing deduplicates by reaction id across models (first model in member
order keeps provenance), then round-robins rank positions so every model
contributes to the front of the merged list.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from synroute.checker import DEFAULT_MATCH_RANK, Checker
from synroute.core import Reaction, canonical_id
from synroute.protocol import ProtocolClient, TransportError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Proposal:
    """One ranked retro step from a single-step model.

    The embedded reaction carries a placeholder cost until the search
    attaches its configured value.
    """

    reaction: Reaction
    rank: int
    model: str


@dataclass(frozen=True)
class EnsembleConfig:
    per_model_limit: int = 10
    total_limit: int = 50
    merge_policy: str = "round_robin"  # or "score_sorted"

    def __post_init__(self) -> None:
        if self.per_model_limit < 1 or self.total_limit < 1:
            raise ValueError("ensemble limits must be >= 1")
        if self.merge_policy not in ("round_robin", "score_sorted"):
            raise ValueError(f"unknown merge policy {self.merge_policy!r}")


class Proposer(Protocol):
    name: str

    def propose(self, target: str, limit: int) -> list[Proposal]: ...


class CorpusProposer:
    """Proposes the corpus reactions whose product is exactly the target."""

    def __init__(self, corpus: Sequence[Reaction], name: str = "corpus"):
        self.name = name
        self._by_product: dict[str, list[Reaction]] = {}
        seen: set[str] = set()
        for rx in corpus:
            if rx.id in seen:
                continue  # duplicates in the corpus collapse; first occurrence ranks
            seen.add(rx.id)
            self._by_product.setdefault(rx.product, []).append(rx)

    def propose(self, target: str, limit: int) -> list[Proposal]:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        matches = self._by_product.get(target, [])[:limit]
        return [
            Proposal(reaction=rx.with_model(self.name), rank=i + 1, model=self.name)
            for i, rx in enumerate(matches)
        ]


class ExternalProposer:
    """Single-step model reached over the wire protocol.

    Malformed proposals (empty reactants, product among reactants,
    duplicate reactants, uncanonicalizable ids) are dropped and counted,
    never fatal; transport failures propagate.
    """

    def __init__(self, client: ProtocolClient, name: str = ""):
        self.client = client
        self.name = name or client.name
        self.dropped_malformed = 0

    def propose(self, target: str, limit: int) -> list[Proposal]:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        response = self.client.call("propose", {"target": target, "limit": limit})
        raw = response.get("proposals")
        if not isinstance(raw, list):
            raise TransportError(f"malformed proposals payload from {self.name}")
        proposals: list[Proposal] = []
        for entry in raw[:limit]:
            parsed = self._parse(entry, target)
            if parsed is None:
                self.dropped_malformed += 1
                continue
            proposals.append(
                Proposal(reaction=parsed, rank=len(proposals) + 1, model=parsed.model)
            )
        return proposals

    def _parse(self, entry: object, target: str) -> Reaction | None:
        if not isinstance(entry, dict):
            return None
        reactants = entry.get("reactants")
        if not isinstance(reactants, list) or not reactants:
            return None
        score = entry.get("score")
        model = entry.get("model") or self.name
        try:
            canon = [canonical_id(str(r)) for r in reactants]
            return Reaction.make(
                product=target,
                reactants=canon,
                model=str(model),
                score=float(score) if score is not None else None,
            )
        except (ValueError, TypeError):
            return None


def mix(responses: Sequence[Sequence[Proposal]], config: EnsembleConfig) -> list[Proposal]:
    """Merge per-model ranked proposal lists into one ranked list.

    Dedup by reaction id first (earlier models keep provenance), then
    interleave by rank position (round_robin) or sort by score descending
    (score_sorted, stable). Output ranks are reassigned 1..n.
    """
    seen: set[str] = set()
    cleaned: list[list[Proposal]] = []
    for model_list in responses:
        kept = []
        for proposal in model_list:
            if proposal.reaction.id in seen:
                continue
            seen.add(proposal.reaction.id)
            kept.append(proposal)
        cleaned.append(kept)

    if config.merge_policy == "round_robin":
        merged: list[Proposal] = []
        for position in range(max((len(lst) for lst in cleaned), default=0)):
            for lst in cleaned:
                if position < len(lst):
                    merged.append(lst[position])
    else:  # score_sorted
        flat = [p for lst in cleaned for p in lst]
        merged = sorted(
            flat,
            key=lambda p: -p.reaction.score if p.reaction.score is not None else float("inf"),
        )

    merged = merged[: config.total_limit]
    return [
        Proposal(reaction=p.reaction, rank=i + 1, model=p.model)
        for i, p in enumerate(merged)
    ]


@dataclass
class Ensemble:
    """Ordered collection of proposers queried together."""

    members: Sequence[Proposer]
    config: EnsembleConfig = field(default_factory=EnsembleConfig)

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("ensemble needs at least one member")

    @property
    def name(self) -> str:
        return "+".join(m.name for m in self.members)

    def propose(self, target: str, limit: int) -> list[Proposal]:
        """Query every member; tolerate partial failures.

        Raises TransportError only when every member fails, carrying the
        failed model tags.
        """
        responses: list[list[Proposal]] = []
        failures: list[str] = []
        for member in self.members:
            try:
                responses.append(member.propose(target, self.config.per_model_limit))
            except TransportError as exc:
                logger.warning("proposer %s failed for %s: %s", member.name, target, exc)
                failures.append(member.name)
        if not responses and failures:
            raise TransportError(f"all proposers failed: {', '.join(failures)}")
        mixed = mix(responses, self.config)
        return mixed[:limit]


def apply_checker_filter(
    proposals: Sequence[Proposal],
    checker: Checker,
    target: str,
    match_rank: int = DEFAULT_MATCH_RANK,
    fail_open: bool = False,
) -> tuple[list[Proposal], list[Proposal]]:
    """Split proposals into (kept, dropped) by checker verdict.

    Relative order is preserved; dropped proposals are retained for audit.
    On checker transport failure, fail_open keeps the proposal and
    fail-closed (the default) drops it.
    """
    kept: list[Proposal] = []
    dropped: list[Proposal] = []
    for proposal in proposals:
        try:
            verdict = checker.check(proposal.reaction.reactants, target, match_rank)
            passed = verdict.passed
        except TransportError as exc:
            logger.warning("checker unavailable for %s: %s", target, exc)
            passed = fail_open
        (kept if passed else dropped).append(proposal)
    return kept, dropped

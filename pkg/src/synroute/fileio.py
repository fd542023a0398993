"""File formats: reaction corpora, stock lists, target lists, configs.

Corpus files are newline-delimited JSON, one reaction per line:
``{"id": str?, "product": str, "reactants": [str, ...], "class": str?}``.
Reaction identity is always derived from content; a provided id or class
tag is accepted and ignored. Stock files hold one molecule per line with
an optional ``,price`` suffix (absent means 0). All loader errors carry
the offending path and line number.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from synroute.core import Reaction, canonical_id


class CorpusFormatError(ValueError):
    def __init__(self, path: str | Path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def _read_lines(path: str | Path) -> list[str]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    return p.read_text(encoding="utf-8").splitlines()


def reaction_from_record(record: dict) -> Reaction:
    """Build a reaction from a corpus-file record (content-derived id)."""
    if not isinstance(record, dict):
        raise ValueError("expected a JSON object")
    product = record.get("product")
    reactants = record.get("reactants")
    if not isinstance(product, str) or not product.strip():
        raise ValueError("missing or empty 'product'")
    if not isinstance(reactants, list) or not reactants:
        raise ValueError("'reactants' must be a nonempty list")
    if not all(isinstance(r, str) and r.strip() for r in reactants):
        raise ValueError("'reactants' entries must be nonempty strings")
    return Reaction.make(
        product=canonical_id(product),
        reactants=[canonical_id(r) for r in reactants],
    )


def load_corpus(path: str | Path) -> list[Reaction]:
    """Load a reaction corpus; duplicates are kept (they carry frequency)."""
    corpus: list[Reaction] = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(path, line_no, f"invalid JSON: {exc.msg}") from exc
        try:
            corpus.append(reaction_from_record(record))
        except ValueError as exc:
            raise CorpusFormatError(path, line_no, str(exc)) from exc
    return corpus


def write_corpus(path: str | Path, corpus: Iterable[Reaction]) -> None:
    lines = [
        json.dumps(
            {"product": rx.product, "reactants": list(rx.reactants)}, sort_keys=True
        )
        for rx in corpus
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def load_stock(path: str | Path) -> dict[str, float]:
    stock: dict[str, float] = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        text = line.strip()
        if not text:
            continue
        molecule, _, price_text = text.partition(",")
        try:
            molecule = canonical_id(molecule)
        except ValueError as exc:
            raise CorpusFormatError(path, line_no, str(exc)) from exc
        price = 0.0
        if price_text.strip():
            try:
                price = float(price_text)
            except ValueError as exc:
                raise CorpusFormatError(
                    path, line_no, f"bad price {price_text.strip()!r}"
                ) from exc
        if price < 0:
            raise CorpusFormatError(path, line_no, "price must be >= 0")
        stock[molecule] = price
    return stock


def write_stock(path: str | Path, stock: dict[str, float]) -> None:
    lines = [
        f"{mol},{price:g}" if price else mol for mol, price in stock.items()
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def load_targets(path: str | Path) -> list[str]:
    targets: list[str] = []
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        try:
            targets.append(canonical_id(line))
        except ValueError as exc:
            raise CorpusFormatError(path, line_no, str(exc)) from exc
    return targets


def load_config(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    try:
        config = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(path, exc.lineno, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(config, dict):
        raise CorpusFormatError(path, 1, "config must be a JSON object")
    return config


def dump_json(obj: object, path: str | Path | None = None) -> str:
    """Canonical JSON serialization (sorted keys, stable floats)."""
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text

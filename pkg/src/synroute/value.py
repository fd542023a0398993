"""Synthesis-cost labeling over a reaction corpus and a stock.

Starting from the building blocks, molecules synthesizable in one step get
labeled, then molecules reachable through more steps, relaxing each label
to the cheapest known synthesis. The resulting table serves as the search
value function and can be exported as training records for an external
cost model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from synroute.core import Reaction, Stock, route_cost

_IMPROVE_EPS = 1e-12


@dataclass(frozen=True)
class CostLabel:
    cost: float
    price_estimate: float
    steps: int
    witness: str | None  # reaction id that achieved the label; None for stock


@dataclass(frozen=True)
class CostTable:
    costs: dict[str, CostLabel]

    def __contains__(self, molecule: str) -> bool:
        return molecule in self.costs

    def __len__(self) -> int:
        return len(self.costs)

    def get(self, molecule: str) -> CostLabel | None:
        return self.costs.get(molecule)


def label_costs(corpus: Sequence[Reaction], stock: Stock) -> CostTable:
    """Fixed-point cost labeling.

    Stock molecules are pinned at route_cost(price, 0). Each pass relaxes
    every reaction whose reactants are all labeled: steps add up per branch
    (a shared precursor is counted once per use, matching the search's cost
    arithmetic), price estimates are the sum of reactant estimates, and the
    cheaper label wins. Unlabelable molecules are simply absent.
    """
    labels: dict[str, CostLabel] = {
        mol: CostLabel(route_cost(price, 0), float(price), 0, None)
        for mol, price in stock.items()
    }
    changed = True
    while changed:
        changed = False
        for rx in corpus:
            if rx.product in stock:
                continue  # stock labels are pinned
            if not all(r in labels for r in rx.reactants):
                continue
            steps = 1 + sum(labels[r].steps for r in rx.reactants)
            price = sum(labels[r].price_estimate for r in rx.reactants)
            cost = route_cost(price, steps)
            current = labels.get(rx.product)
            if current is None or cost < current.cost - _IMPROVE_EPS:
                labels[rx.product] = CostLabel(cost, price, steps, rx.id)
                changed = True
    return CostTable(labels)


def value_of(table: CostTable, molecule: str, default: float) -> float:
    """Table cost if present, else the configured default estimate."""
    if default < 0:
        raise ValueError("default value must be >= 0")
    label = table.costs.get(molecule)
    return label.cost if label is not None else default


def export_labels(table: CostTable, path: str | Path) -> int:
    """Write one JSON record per labeled molecule, sorted by molecule id.

    Deterministic: re-exporting an unchanged table yields an identical file.
    Returns the number of records written.
    """
    records = []
    for mol in sorted(table.costs):
        label = table.costs[mol]
        records.append(
            json.dumps(
                {
                    "molecule": mol,
                    "cost": label.cost,
                    "steps": label.steps,
                    "price_estimate": label.price_estimate,
                },
                sort_keys=True,
            )
        )
    Path(path).write_text("".join(line + "\n" for line in records), encoding="utf-8")
    return len(records)


def load_labels(path: str | Path) -> CostTable:
    """Read a label export back into a cost table (witnesses are not stored)."""
    costs: dict[str, CostLabel] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        costs[rec["molecule"]] = CostLabel(
            cost=float(rec["cost"]),
            price_estimate=float(rec["price_estimate"]),
            steps=int(rec["steps"]),
            witness=None,
        )
    return CostTable(costs)

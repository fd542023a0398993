"""Request/response models for the planning service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class ReactionIn(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    product: str
    reactants: list[str] = Field(min_length=1)
    id: str | None = None
    reaction_class: str | None = Field(default=None, alias="class")


class StockItem(BaseModel):
    molecule: str
    price: float = Field(default=0.0, ge=0.0)


class SearchSettings(BaseModel):
    """Mirrors the planner's search-config keys."""

    k: int = Field(default=1, ge=1)
    max_expansions: int = Field(default=500, ge=1)
    wall_clock_limit_secs: float | None = None
    proposal_limit_per_expansion: int = Field(default=50, ge=1)
    default_leaf_value: float = Field(default=1.0, ge=0.0)
    reaction_cost: float = Field(default=1.0, gt=0.0)
    early_stop: bool = False
    match_rank: int = Field(default=1, ge=1)
    use_checker: bool = True
    checker_fail_open: bool = False
    suppress_similar: bool = False
    suppress_penalty_alpha: float = Field(default=0.1, ge=0.0)
    suppress_penalty_power: float = Field(default=2.0, ge=0.0)
    value_from_corpus: bool = False


class ReactionOut(BaseModel):
    product: str
    reactants: list[str]
    model: str


class RouteOut(BaseModel):
    cost: float
    length: int
    reactions: list[ReactionOut]


class PlanRequest(BaseModel):
    target: str
    corpus: list[ReactionIn] | None = None
    stock: list[StockItem] | None = None
    settings: SearchSettings = Field(default_factory=SearchSettings)


class PlanResponse(BaseModel):
    target: str
    succeeded: bool
    expansions_used: int
    routes: list[RouteOut]


class BatchRequest(BaseModel):
    targets: list[str] = Field(min_length=1)
    corpus: list[ReactionIn] | None = None
    stock: list[StockItem] | None = None
    settings: SearchSettings = Field(default_factory=SearchSettings)
    workers: int = Field(default=1, ge=1)
    include_routes: bool = False


class TargetReport(BaseModel):
    target: str
    succeeded: bool
    top_route_lengths: list[int]
    expansions: int
    routes: list[RouteOut] | None = None


class BatchResponse(BaseModel):
    per_target: list[TargetReport]
    success_rate: float
    avg_len_top1: float | None
    avg_len_topk: float | None
    repetition_rate_topk: float | None
    config_echo: dict

    def report_dict(self) -> dict:
        """The batch report document (route dumps excluded)."""
        return {
            "config_echo": self.config_echo,
            "success_rate": self.success_rate,
            "avg_len_top1": self.avg_len_top1,
            "avg_len_topk": self.avg_len_topk,
            "repetition_rate_topk": self.repetition_rate_topk,
            "per_target": [
                t.model_dump(exclude={"routes"}) for t in self.per_target
            ],
        }


class LabelCostsRequest(BaseModel):
    corpus: list[ReactionIn] | None = None
    stock: list[StockItem] | None = None


class LabelRecord(BaseModel):
    molecule: str
    cost: float
    steps: int
    price_estimate: float


class LabelCostsResponse(BaseModel):
    count: int
    labels: list[LabelRecord]


class GenNetworkRequest(BaseModel):
    seed: int
    molecules: int = Field(ge=2)
    stock_fraction: float = Field(gt=0.0, lt=1.0)
    max_arity: int = Field(default=2, ge=1)
    alt_routes_per_molecule: int = Field(default=2, ge=1)


class GenNetworkResponse(BaseModel):
    corpus: list[ReactionIn]
    stock: list[StockItem]

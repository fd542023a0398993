"""FastAPI application wrapping the planning handlers."""

from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException

from synroute import __version__
from synroute.search import ConfigurationError
from synroute.service import handlers, schemas
from synroute.service.handlers import ServiceContext

logger = logging.getLogger(__name__)


def create_app(context: ServiceContext | None = None) -> FastAPI:
    ctx = context or ServiceContext()
    app = FastAPI(title="synroute", version=__version__)
    app.state.context = ctx

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "corpus_loaded": ctx.corpus is not None,
            "stock_loaded": ctx.stock is not None,
        }

    @app.post("/plan", response_model=schemas.PlanResponse)
    def plan_endpoint(request: schemas.PlanRequest) -> schemas.PlanResponse:
        try:
            return handlers.handle_plan(request, ctx)
        except (ConfigurationError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/batch", response_model=schemas.BatchResponse)
    def batch_endpoint(request: schemas.BatchRequest) -> schemas.BatchResponse:
        try:
            return handlers.handle_batch(request, ctx)
        except (ConfigurationError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/label-costs", response_model=schemas.LabelCostsResponse)
    def label_costs_endpoint(
        request: schemas.LabelCostsRequest,
    ) -> schemas.LabelCostsResponse:
        try:
            return handlers.handle_label_costs(request, ctx)
        except (ConfigurationError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/gen-network", response_model=schemas.GenNetworkResponse)
    def gen_network_endpoint(
        request: schemas.GenNetworkRequest,
    ) -> schemas.GenNetworkResponse:
        try:
            return handlers.handle_gen_network(request)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    return app

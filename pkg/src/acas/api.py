"""HTTP service exposing the context-aware Restaurants Searching deployment."""

from __future__ import annotations

from datetime import datetime
from typing import Any, Literal

from fastapi import Body, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from acas.context import to_jsonable
from acas.documents import serialize_strategy
from acas.errors import (
    AdaptationFailure,
    DocumentParseError,
    ProviderError,
    TypeMismatch,
    UnknownOperation,
    UnknownPath,
    UnknownService,
    ValidationError,
)
from acas.mtourism.runtime import DemoRuntime


class GeoModel(BaseModel):
    latitude: float = Field(ge=-90, le=90)
    longitude: float = Field(ge=-180, le=180)


class RestaurantModel(BaseModel):
    id: str
    names: dict[str, str] = Field(min_length=1)
    descriptions: dict[str, str] = {}
    cuisine: str
    priceTier: int = Field(ge=1, le=4)
    location: GeoModel
    openHours: list[tuple[int, int]] = []
    photoRef: str | None = None


class ContextValue(BaseModel):
    value: Any


class ContextAck(BaseModel):
    path: str
    provider: str


class InvocationOut(BaseModel):
    response: Any
    trace: list[str]
    selected: list[str]
    cacheHit: bool
    mode: Literal["sync", "async"]


class SnapshotEntryOut(BaseModel):
    value: Any
    source: str
    timestamp: datetime


class SnapshotOut(BaseModel):
    serviceId: str
    capturedAt: datetime
    digest: str
    entries: dict[str, SnapshotEntryOut]


class StrategiesAck(BaseModel):
    service: str
    strategies: list[str]


class StatsOut(BaseModel):
    hits: int
    misses: int
    invalidations: int


class DatasetAck(BaseModel):
    count: int


def create_app(runtime: DemoRuntime | None = None) -> FastAPI:
    app = FastAPI(title="ACAS context-aware services")
    app.state.runtime = runtime or DemoRuntime.from_files()

    def rt() -> DemoRuntime:
        return app.state.runtime

    @app.exception_handler(UnknownService)
    @app.exception_handler(UnknownOperation)
    @app.exception_handler(UnknownPath)
    async def not_found(_: Request, exc: Exception):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    @app.exception_handler(TypeMismatch)
    @app.exception_handler(ProviderError)
    async def unprocessable(_: Request, exc: Exception):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(AdaptationFailure)
    async def adaptation_failed(_: Request, exc: AdaptationFailure):
        return JSONResponse(status_code=500, content={"detail": str(exc), "adaptation": exc.name})

    @app.get("/health")
    def health() -> dict[str, Any]:
        return {"status": "ok", "services": sorted(rt().a2w.services)}

    @app.post("/services/{service_id}/{operation}", response_model=InvocationOut)
    def invoke(service_id: str, operation: str, request: Any = Body(default=None),
               mode: Literal["sync", "async"] = "sync"):
        try:
            result = rt().call(operation, request or {}, mode, service_id=service_id)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return InvocationOut(response=result.response, trace=result.handle.trace.lines(),
                             selected=list(result.handle.selected), cacheHit=result.handle.cache_hit, mode=mode)

    @app.post("/context/reset")
    def reset_context() -> dict[str, str]:
        rt().reset_context()
        return {"status": "reset"}

    @app.put("/context/{path}", response_model=ContextAck)
    def set_context(path: str, body: ContextValue):
        return ContextAck(path=path, provider=rt().set_context(path, body.value))

    @app.delete("/context/{path}", response_model=ContextAck)
    def unset_context(path: str):
        return ContextAck(path=path, provider=rt().unset_context(path))

    @app.get("/services/{service_id}/snapshot", response_model=SnapshotOut)
    def snapshot(service_id: str):
        snap = rt().context.snapshot(service_id)
        return SnapshotOut(
            serviceId=snap.service_id, capturedAt=snap.captured_at, digest=snap.digest(),
            entries={p: SnapshotEntryOut(value=to_jsonable(e.value), source=e.source, timestamp=e.timestamp)
                     for p, e in snap.entries.items()},
        )

    @app.put("/strategies/{service_id}", response_model=StrategiesAck)
    async def put_strategies(service_id: str, request: Request):
        document = await request.body()
        try:
            cas = rt().load_strategies(document)
        except (DocumentParseError, ValidationError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if cas.service_id != service_id:
            raise HTTPException(status_code=400, detail=f"document is for {cas.service_id}, not {service_id}")
        return StrategiesAck(service=cas.service_id, strategies=[c.strategy.name for c in cas.cvs_strategies])

    @app.get("/strategies/{service_id}")
    def get_strategies(service_id: str):
        return Response(serialize_strategy(rt().a2w.cas.get(service_id)), media_type="application/xml")

    @app.put("/data/restaurants", response_model=DatasetAck)
    def put_restaurants(restaurants: list[RestaurantModel]):
        count = rt().load_restaurants([r.model_dump(exclude_none=True) for r in restaurants])
        return DatasetAck(count=count)

    @app.get("/stats", response_model=StatsOut)
    def stats():
        s = rt().a2w.stats
        return StatsOut(hits=s.hits, misses=s.misses, invalidations=s.invalidations)

    return app

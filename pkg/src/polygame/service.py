"""HTTP front end: every solver, certifier, and reproduction target behind a
JSON endpoint.  Request/response bodies mirror the CLI file formats
(docs/formats.md); the CLI runs the same handlers in-process.

Run with: uvicorn polygame.service:app
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import api
from .errors import FormatError, PolygameError

app = FastAPI(
    title="polygame",
    description="Atomic splittable congestion games on polymatroid strategy "
                "spaces: equilibria, exchange graphs, matroid certificates.",
    version="0.1.0",
)


class SolveRequest(BaseModel):
    game: dict
    starts: int = Field(default=1, ge=1, le=1000)
    damping: float | None = Field(default=None, gt=0.0, le=1.0)
    seed: int = 42
    jobs: int = Field(default=1, ge=1, le=64)


class VerifyRequest(BaseModel):
    game: dict
    profile: dict
    tol: float = Field(default=1e-9, gt=0.0)


class ProbeRequest(BaseModel):
    game: dict
    starts: int = Field(default=10, ge=1, le=1000)
    seed: int = 42
    jobs: int = Field(default=1, ge=1, le=64)


class MatroidCheckRequest(BaseModel):
    matroid: dict


class ExchangeRequest(BaseModel):
    oracle: dict
    x: dict
    y: dict | None = None
    dot: bool = False


class ReproduceRequest(BaseModel):
    target: str


class BidirPropertyRequest(BaseModel):
    oracle: dict
    samples: int = Field(default=200, ge=0, le=100_000)
    seed: int = 42


class GraphPropertyRequest(BaseModel):
    graph: dict


class VerdictResponse(BaseModel):
    """Common envelope; command-specific fields ride along."""

    model_config = {"extra": "allow"}

    schema_version: int
    command: str
    status: str


def _dispatch(handler, *args, **kwargs) -> VerdictResponse:
    try:
        payload, _code = handler(*args, **kwargs)
    except FormatError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except PolygameError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return VerdictResponse(**payload)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/solve", response_model=VerdictResponse)
def solve(req: SolveRequest) -> VerdictResponse:
    return _dispatch(api.run_solve, req.game, starts=req.starts,
                     damping=req.damping, seed=req.seed, jobs=req.jobs)


@app.post("/verify", response_model=VerdictResponse)
def verify(req: VerifyRequest) -> VerdictResponse:
    return _dispatch(api.run_verify, req.game, req.profile, tol=req.tol)


@app.post("/probe", response_model=VerdictResponse)
def probe(req: ProbeRequest) -> VerdictResponse:
    return _dispatch(api.run_probe, req.game, starts=req.starts,
                     seed=req.seed, jobs=req.jobs)


@app.post("/matroid/check", response_model=VerdictResponse)
def matroid_check(req: MatroidCheckRequest) -> VerdictResponse:
    return _dispatch(api.run_matroid_check, req.matroid)


@app.post("/exchange", response_model=VerdictResponse)
def exchange(req: ExchangeRequest) -> VerdictResponse:
    return _dispatch(api.run_exchange, req.oracle, req.x, req.y, want_dot=req.dot)


@app.post("/reproduce", response_model=VerdictResponse)
def reproduce(req: ReproduceRequest) -> VerdictResponse:
    return _dispatch(api.run_reproduce, req.target)


@app.post("/property/bidir", response_model=VerdictResponse)
def property_bidir(req: BidirPropertyRequest) -> VerdictResponse:
    return _dispatch(api.run_property_bidir, req.oracle,
                     samples=req.samples, seed=req.seed)


@app.post("/property/graph", response_model=VerdictResponse)
def property_graph(req: GraphPropertyRequest) -> VerdictResponse:
    return _dispatch(api.run_property_graph, req.graph)

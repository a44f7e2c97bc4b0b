"""HTTP front end: each batch job is exposed as a POST endpoint.

Request models mirror the job parameters; responses carry the job payload
plus an ``ok`` flag and the violation records, so a client can decide how to
persist or fail.  Domain precondition errors map to 400, solver
non-convergence and resource caps to 409.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import __version__, jobs
from .operators import CapExceeded
from .spectral import SolverError


class GraphSpec(BaseModel):
    kind: Literal["hypercube", "rates"]
    d: Optional[int] = None
    n: Optional[int] = None
    size: Optional[int] = None
    pairs: Optional[list[tuple[int, int, float]]] = None

    @model_validator(mode="after")
    def _complete(self):
        if self.kind == "hypercube" and (self.d is None or self.n is None):
            raise ValueError("hypercube graphs need d and n")
        if self.kind == "rates" and (self.size is None or self.pairs is None):
            raise ValueError("rate-function graphs need size and pairs")
        return self

    def as_dict(self) -> dict:
        return self.model_dump(exclude_none=True)


class GapRequest(BaseModel):
    graph: GraphSpec
    process: Literal["rw", "ip"] = "rw"
    tol: float = 1e-9
    ip_mode: Literal["auto", "dense", "matrix_free"] = "auto"
    method: Literal["auto", "dense", "lanczos"] = "auto"
    seed: int = 0


class SpectrumRequest(BaseModel):
    graph: GraphSpec
    process: Literal["rw", "ip"] = "rw"


class AldousCheckRequest(BaseModel):
    exhaustive_z2: bool = False
    max_vertices: int = Field(default=6, ge=2, le=6)
    graph: Optional[GraphSpec] = None
    tol: float = 1e-8
    ip_method: Literal["auto", "dense", "lanczos"] = "auto"
    seed: int = 0


class TraceFuzzRequest(BaseModel):
    trials_1d: int = Field(default=10000, ge=0)
    trials_nd: int = Field(default=1000, ge=0)
    d_max: int = Field(default=3, ge=1, le=3)
    n_max: int = Field(default=5, ge=1, le=6)
    seed: int = 0
    negative_control: bool = False


class SequenceRequest(BaseModel):
    d: int = Field(ge=1, le=4)
    n_max: int = Field(ge=2)


class RatioTableRequest(BaseModel):
    d: int = Field(ge=1, le=4)
    n_max: int = Field(ge=2)
    ip_cap: int = Field(default=8, ge=2, le=9)
    tol: float = 1e-9
    jobs: int = Field(default=1, ge=1, le=16)
    seed: int = 0


class ContainmentRequest(BaseModel):
    n_min: int = Field(default=3, ge=2, le=7)
    n_max: int = Field(default=6, ge=2, le=7)
    trials: int = Field(default=50, ge=1)
    tol: float = 1e-8
    seed: int = 0


class JobResponse(BaseModel):
    ok: bool
    violations: list[dict]
    result: dict


def _run(fn, *args, **kwargs) -> JobResponse:
    try:
        res = fn(*args, **kwargs)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except (CapExceeded, SolverError) as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    return JobResponse(ok=res.ok, violations=res.violations, result=res.payload)


def create_app() -> FastAPI:
    app = FastAPI(title="aldouslab", version=__version__)

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/v1/defaults")
    def defaults():
        return {"tolerances": jobs.DEFAULT_TOLERANCES}

    @app.post("/v1/gap", response_model=JobResponse)
    def gap(req: GapRequest):
        return _run(jobs.job_gap, req.graph.as_dict(), process=req.process,
                    tol=req.tol, ip_mode=req.ip_mode, method=req.method,
                    seed=req.seed)

    @app.post("/v1/spectrum", response_model=JobResponse)
    def spectrum(req: SpectrumRequest):
        return _run(jobs.job_spectrum, req.graph.as_dict(), process=req.process)

    @app.post("/v1/aldous-check", response_model=JobResponse)
    def aldous_check(req: AldousCheckRequest):
        graph = req.graph.as_dict() if req.graph is not None else None
        return _run(jobs.job_aldous_check, exhaustive_z2=req.exhaustive_z2,
                    max_vertices=req.max_vertices, graph=graph, tol=req.tol,
                    ip_method=req.ip_method, seed=req.seed)

    @app.post("/v1/trace-fuzz", response_model=JobResponse)
    def trace_fuzz(req: TraceFuzzRequest):
        return _run(jobs.job_trace_fuzz, trials_1d=req.trials_1d,
                    trials_nd=req.trials_nd, d_max=req.d_max, n_max=req.n_max,
                    seed=req.seed, negative_control=req.negative_control)

    @app.post("/v1/sequence", response_model=JobResponse)
    def sequence(req: SequenceRequest):
        return _run(jobs.job_sequence, d=req.d, n_max=req.n_max)

    @app.post("/v1/ratio-table", response_model=JobResponse)
    def ratio(req: RatioTableRequest):
        return _run(jobs.job_ratio_table, d=req.d, n_max=req.n_max,
                    ip_cap=req.ip_cap, tol=req.tol, jobs=req.jobs, seed=req.seed)

    @app.post("/v1/containment", response_model=JobResponse)
    def containment(req: ContainmentRequest):
        return _run(jobs.job_containment, n_min=req.n_min, n_max=req.n_max,
                    trials=req.trials, tol=req.tol, seed=req.seed)

    return app


app = create_app()

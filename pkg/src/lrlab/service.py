"""HTTP front end: one POST endpoint per check, wrapping the shared runner.

Run with:  uvicorn lrlab.service:app
"""

from __future__ import annotations

from fastapi import FastAPI

from . import __version__
from .models import (
    CheckRequest, DemoRequest, DistinguishRequest, EquivRequest, EvalRequest,
    FreeThmRequest, GenRequest, MemberRequest, RunResponse, SafeRequest,
    SnRequest, TraceRequest,
)
from . import runner

app = FastAPI(
    title="lrlab",
    version=__version__,
    description=(
        "Workbench for typed lambda calculi: typechecking, bounded evaluation, "
        "semantic-model membership, free theorems, and contextual-equivalence "
        "refutation. All checks are deterministic given the request's seed."),
)


@app.get("/")
def info() -> dict:
    return {
        "service": "lrlab",
        "version": __version__,
        "endpoints": sorted(f"/{name}" for name in runner.HANDLERS),
    }


@app.post("/check", response_model=RunResponse)
def check(req: CheckRequest) -> RunResponse:
    return runner.handle_check(req)


@app.post("/eval", response_model=RunResponse)
def eval_(req: EvalRequest) -> RunResponse:
    return runner.handle_eval(req)


@app.post("/trace", response_model=RunResponse)
def trace(req: TraceRequest) -> RunResponse:
    return runner.handle_trace(req)


@app.post("/sn", response_model=RunResponse)
def sn(req: SnRequest) -> RunResponse:
    return runner.handle_sn(req)


@app.post("/safe", response_model=RunResponse)
def safe(req: SafeRequest) -> RunResponse:
    return runner.handle_safe(req)


@app.post("/member", response_model=RunResponse)
def member(req: MemberRequest) -> RunResponse:
    return runner.handle_member(req)


@app.post("/equiv", response_model=RunResponse)
def equiv(req: EquivRequest) -> RunResponse:
    return runner.handle_equiv(req)


@app.post("/distinguish", response_model=RunResponse)
def distinguish(req: DistinguishRequest) -> RunResponse:
    return runner.handle_distinguish(req)


@app.post("/free-thm", response_model=RunResponse)
def free_thm(req: FreeThmRequest) -> RunResponse:
    return runner.handle_free_thm(req)


@app.post("/demo", response_model=RunResponse)
def demo(req: DemoRequest) -> RunResponse:
    return runner.handle_demo(req)


@app.post("/gen", response_model=RunResponse)
def gen(req: GenRequest) -> RunResponse:
    return runner.handle_gen(req)

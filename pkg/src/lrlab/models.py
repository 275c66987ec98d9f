"""Request/response models shared by the HTTP service and the CLI client.

Requests carry program *source text*; file handling stays in the client.
Every response carries the stable machine-readable ``lines`` (one record
per line, KEY=value style) next to an unstable ``human`` rendering, plus
the process exit code the CLI should propagate.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

DEFAULT_FUEL = 10_000
DEFAULT_K = 25
DEFAULT_CORPUS_DEPTH = 3
DEFAULT_CATALOG_SIZE = 16
DEFAULT_CTX_SIZE = 8


class RunResponse(BaseModel):
    ok: bool
    exit_code: int
    lines: list[str]
    human: str
    error: str | None = None
    data: dict[str, str] = Field(default_factory=dict)


class CheckRequest(BaseModel):
    source: str
    level: str | None = None


class EvalRequest(BaseModel):
    source: str
    level: str | None = None
    fuel: int = DEFAULT_FUEL
    alloc: str = "seq"
    seed: int = 0


class TraceRequest(BaseModel):
    source: str
    level: str | None = None
    fuel: int = DEFAULT_FUEL
    alloc: str = "seq"
    seed: int = 0
    limit: int = 50  # lines shown; the walk itself uses fuel


class SnRequest(BaseModel):
    source: str
    fuel: int = DEFAULT_FUEL
    corpus_depth: int = DEFAULT_CORPUS_DEPTH
    seed: int = 0


class SafeRequest(BaseModel):
    source: str
    fuel: int = DEFAULT_FUEL
    alloc: str = "seq"
    seed: int = 0


class MemberRequest(BaseModel):
    source: str
    type: str
    level: str | None = None
    world: str | None = None
    k: int = DEFAULT_K
    fuel: int = DEFAULT_FUEL
    corpus_depth: int = DEFAULT_CORPUS_DEPTH
    seed: int = 0


class EquivRequest(BaseModel):
    left: str
    right: str
    rel: str | None = None
    fuel: int = DEFAULT_FUEL
    corpus_depth: int = DEFAULT_CORPUS_DEPTH
    catalog_size: int = DEFAULT_CATALOG_SIZE
    seed: int = 0


class DistinguishRequest(BaseModel):
    left: str
    right: str
    ctx_size: int = DEFAULT_CTX_SIZE
    fuel: int = DEFAULT_FUEL
    result_type: str = "Bool"  # "Int" is accepted as an extension
    seed: int = 0


class FreeThmRequest(BaseModel):
    kind: str
    source: str
    count: int = 25
    fuel: int = DEFAULT_FUEL
    corpus_depth: int = DEFAULT_CORPUS_DEPTH
    seed: int = 0


class DemoRequest(BaseModel):
    name: str
    fuel: int = DEFAULT_FUEL
    rel: str | None = None
    corpus_depth: int = DEFAULT_CORPUS_DEPTH
    catalog_size: int = DEFAULT_CATALOG_SIZE
    seed: int = 0


class GenRequest(BaseModel):
    level: str = "full"
    type: str | None = None
    size: int = 20
    count: int = 1
    seed: int = 0

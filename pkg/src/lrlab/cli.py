"""Thin command-line client over the runner.

By default runs checks in-process; with ``--server URL`` (or ``LR_SERVER``)
the same request is POSTed to a running service instead.  Exit codes:
0 proven/success, 1 disproven, 2 bounds-limited outcome, 3 usage, parse,
or type errors.  ``LR_SEED`` is the seed fallback; identical arguments and
seed give byte-identical ``--output lines`` output.
"""

from __future__ import annotations

import argparse
import os
import sys

from .models import (
    DEFAULT_CATALOG_SIZE, DEFAULT_CORPUS_DEPTH, DEFAULT_CTX_SIZE,
    DEFAULT_FUEL, DEFAULT_K, CheckRequest, DemoRequest, DistinguishRequest,
    EquivRequest, EvalRequest, FreeThmRequest, GenRequest, MemberRequest,
    RunResponse, SafeRequest, SnRequest, TraceRequest,
)
from . import runner


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 3, not 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(3)


def _env_seed() -> int:
    raw = os.environ.get("LR_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        sys.stderr.write(f"error: cannot read {path}: {exc}\n")
        sys.exit(3)


def build_parser() -> _Parser:
    parser = _Parser(prog="lr", description="Typed lambda-calculus workbench.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def common(p: argparse.ArgumentParser, fuel: bool = True) -> None:
        p.add_argument("--seed", type=int, default=None,
                       help="64-bit seed (default: LR_SEED or 0)")
        p.add_argument("--output", choices=("human", "lines"), default="human")
        p.add_argument("--server", default=os.environ.get("LR_SERVER"),
                       help="POST the request to a running service instead")
        if fuel:
            p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)

    p = sub.add_parser("check", help="typecheck a .lam file")
    p.add_argument("file")
    p.add_argument("--level")
    common(p, fuel=False)

    p = sub.add_parser("eval", help="evaluate to a value")
    p.add_argument("file")
    p.add_argument("--level")
    p.add_argument("--alloc", choices=("seq", "rand"), default="seq")
    common(p)

    p = sub.add_parser("trace", help="print the small-step trace")
    p.add_argument("file")
    p.add_argument("--level")
    p.add_argument("--alloc", choices=("seq", "rand"), default="seq")
    p.add_argument("--limit", type=int, default=50)
    common(p)

    p = sub.add_parser("sn", help="termination-predicate membership")
    p.add_argument("file")
    p.add_argument("--corpus-depth", type=int, default=DEFAULT_CORPUS_DEPTH)
    common(p)

    p = sub.add_parser("safe", help="bounded safety walk")
    p.add_argument("file")
    p.add_argument("--alloc", choices=("seq", "rand"), default="seq")
    common(p)

    p = sub.add_parser("member", help="value-interpretation membership")
    p.add_argument("file")
    p.add_argument("--type", required=True, dest="type_")
    p.add_argument("--level")
    p.add_argument("--world", help='world literal, e.g. "W { #l0 : Bool }"')
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--corpus-depth", type=int, default=DEFAULT_CORPUS_DEPTH)
    common(p)

    p = sub.add_parser("equiv", help="binary logical-relation check")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--rel", help='relation literal, e.g. "{(1, true)}"')
    p.add_argument("--corpus-depth", type=int, default=DEFAULT_CORPUS_DEPTH)
    p.add_argument("--catalog-size", type=int, default=DEFAULT_CATALOG_SIZE)
    common(p)

    p = sub.add_parser("distinguish", help="search for a distinguishing context")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--ctx-size", type=int, default=DEFAULT_CTX_SIZE)
    p.add_argument("--result-type", choices=("Bool", "Int"), default="Bool")
    common(p)

    p = sub.add_parser("free-thm", help="run free-theorem instances")
    p.add_argument("file")
    p.add_argument("--kind", required=True,
                   choices=("identity", "constant", "constCrossType", "continuation"))
    p.add_argument("--count", type=int, default=25)
    p.add_argument("--corpus-depth", type=int, default=DEFAULT_CORPUS_DEPTH)
    common(p)

    p = sub.add_parser("demo", help="run a canonical demonstration")
    p.add_argument("name", choices=("omega", "landin", "packages"))
    p.add_argument("--rel", help="relation literal for the packages demo")
    p.add_argument("--corpus-depth", type=int, default=DEFAULT_CORPUS_DEPTH)
    p.add_argument("--catalog-size", type=int, default=DEFAULT_CATALOG_SIZE)
    common(p)

    p = sub.add_parser("gen", help="generate well-typed terms")
    p.add_argument("--level", default="full")
    p.add_argument("--type", dest="type_")
    p.add_argument("--size", type=int, default=20)
    p.add_argument("--count", type=int, default=1)
    common(p, fuel=False)

    return parser


def _build_request(args: argparse.Namespace):
    seed = args.seed if args.seed is not None else _env_seed()
    cmd = args.cmd
    if cmd == "check":
        return cmd, CheckRequest(source=_read(args.file), level=args.level)
    if cmd == "eval":
        return cmd, EvalRequest(source=_read(args.file), level=args.level,
                                fuel=args.fuel, alloc=args.alloc, seed=seed)
    if cmd == "trace":
        return cmd, TraceRequest(source=_read(args.file), level=args.level,
                                 fuel=args.fuel, alloc=args.alloc, seed=seed,
                                 limit=args.limit)
    if cmd == "sn":
        return cmd, SnRequest(source=_read(args.file), fuel=args.fuel,
                              corpus_depth=args.corpus_depth, seed=seed)
    if cmd == "safe":
        return cmd, SafeRequest(source=_read(args.file), fuel=args.fuel,
                                alloc=args.alloc, seed=seed)
    if cmd == "member":
        return cmd, MemberRequest(source=_read(args.file), type=args.type_,
                                  level=args.level, world=args.world, k=args.k,
                                  fuel=args.fuel, corpus_depth=args.corpus_depth,
                                  seed=seed)
    if cmd == "equiv":
        return cmd, EquivRequest(left=_read(args.left), right=_read(args.right),
                                 rel=args.rel, fuel=args.fuel,
                                 corpus_depth=args.corpus_depth,
                                 catalog_size=args.catalog_size, seed=seed)
    if cmd == "distinguish":
        return cmd, DistinguishRequest(left=_read(args.left), right=_read(args.right),
                                       ctx_size=args.ctx_size, fuel=args.fuel,
                                       result_type=args.result_type, seed=seed)
    if cmd == "free-thm":
        return cmd, FreeThmRequest(kind=args.kind, source=_read(args.file),
                                   count=args.count, fuel=args.fuel,
                                   corpus_depth=args.corpus_depth, seed=seed)
    if cmd == "demo":
        return cmd, DemoRequest(name=args.name, fuel=args.fuel, rel=args.rel,
                                corpus_depth=args.corpus_depth,
                                catalog_size=args.catalog_size, seed=seed)
    if cmd == "gen":
        return cmd, GenRequest(level=args.level, type=args.type_, size=args.size,
                               count=args.count, seed=seed)
    raise AssertionError(cmd)


def _dispatch(cmd: str, request, server: str | None) -> RunResponse:
    if server:
        import httpx

        try:
            resp = httpx.post(f"{server.rstrip('/')}/{cmd}",
                              json=request.model_dump(), timeout=600.0)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            sys.stderr.write(f"error: server request failed: {exc}\n")
            sys.exit(3)
        return RunResponse.model_validate(resp.json())
    _, handler = runner.HANDLERS[cmd]
    return handler(request)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cmd, request = _build_request(args)
    response = _dispatch(cmd, request, args.server)
    if args.output == "lines":
        for line in response.lines:
            print(line)
    else:
        print(response.human)
    return response.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Command handlers shared by the HTTP service and the CLI.

Each handler turns a request model into a ``RunResponse`` with stable
machine lines, a human rendering, and the exit code: 0 for proven or
successful runs, 1 for refutations, 2 for bounds-limited outcomes, and 3
for usage, parse, or type errors.
"""

from __future__ import annotations

import random
from typing import Callable

from . import demos
from .dynamics import (
    Config, FuelExhausted, StuckResult, Value, eval_star, format_trace,
    make_allocator, trace as run_trace,
)
from .equivalence import (
    ContextTyping, GenerationFailed, distinguish, gen_type, gen_well_typed,
)
from .kernel import (
    FULL_LEVEL, Level, TArrow, TBool, TForall, TInt, TVar, Term, Type,
    alpha_eq, implied_level, is_value, level_check, required_features,
    resolve_level,
)
from .logrel import ValueCorpus, e_member, safe_check, sn_check, v_member
from .models import (
    CheckRequest, DemoRequest, DistinguishRequest, EquivRequest, EvalRequest,
    FreeThmRequest, GenRequest, MemberRequest, RunResponse, SafeRequest,
    SnRequest, TraceRequest,
)
from .relational import (
    FiniteRel, RelCatalog, free_theorem_run, log_equiv_check,
)
from .statics import TypeCheckError, typecheck_closed
from .stepworld import e_member_k, heap_for_world, v_member_k
from .surface import (
    ParseError, parse_program, parse_relation, parse_type, parse_world,
    print_term, print_type,
)
from .verdict import DISPROVEN, PROVEN, UP_TO_BOUNDS, Verdict


class UsageError(Exception):
    pass


def _verdict_exit(verdict: Verdict) -> int:
    return {PROVEN: 0, DISPROVEN: 1, UP_TO_BOUNDS: 2}[verdict.status]


def _guard(fn: Callable[[], RunResponse]) -> RunResponse:
    try:
        return fn()
    except (ParseError, TypeCheckError, UsageError, ValueError) as exc:
        msg = str(exc)
        return RunResponse(ok=False, exit_code=3, lines=[f"ERROR {msg}"],
                           human=f"error: {msg}", error=msg)


def _load(source: str, level_name: str | None) -> tuple[Term, Level]:
    term, pragma = parse_program(source)
    level = resolve_level(level_name) if level_name else (pragma or FULL_LEVEL)
    if not level_check(term, level):
        needed = "+".join(sorted(required_features(term)))
        raise UsageError(f"term uses features [{needed}] outside level {level}")
    return term, level


def _header(cmd: str, **fields) -> str:
    parts = [f"RUN cmd={cmd}"]
    parts.extend(f"{k}={v}" for k, v in fields.items() if v is not None)
    return " ".join(parts)


def handle_check(req: CheckRequest) -> RunResponse:
    def go() -> RunResponse:
        term, level = _load(req.source, req.level)
        try:
            tau = typecheck_closed(term)
        except TypeCheckError as exc:
            return RunResponse(ok=False, exit_code=3, lines=[f"ERROR {exc}"],
                               human=f"type error: {exc}", error=str(exc))
        shown = print_type(tau)
        return RunResponse(
            ok=True, exit_code=0,
            lines=[_header("check", level=level), f"TYPE {shown}"],
            human=shown, data={"type": shown})

    return _guard(go)


def handle_eval(req: EvalRequest) -> RunResponse:
    def go() -> RunResponse:
        term, level = _load(req.source, req.level)
        typecheck_closed(term)
        alloc = make_allocator(req.alloc, req.seed)
        result = eval_star(Config({}, term), req.fuel, alloc, detect_cycles=True)
        header = _header("eval", seed=req.seed, fuel=req.fuel, alloc=req.alloc, level=level)
        if isinstance(result, Value):
            shown = print_term(result.value)
            return RunResponse(
                ok=True, exit_code=0,
                lines=[header, f"RESULT kind=value steps={result.steps_used} value={shown}"],
                human=f"{shown}  ({result.steps_used} steps)",
                data={"value": shown, "steps": str(result.steps_used)})
        if isinstance(result, StuckResult):
            shown = print_term(result.config.expr)
            return RunResponse(
                ok=True, exit_code=1,
                lines=[header,
                       f"RESULT kind=stuck steps={result.steps_used} reason={result.reason} expr={shown}"],
                human=f"stuck after {result.steps_used} steps ({result.reason}): {shown}",
                data={"stuck": shown, "reason": result.reason})
        assert isinstance(result, FuelExhausted)
        cycle = ""
        if result.cycle is not None:
            cycle = f" cycle first={result.cycle.first_step} second={result.cycle.second_step}"
        return RunResponse(
            ok=True, exit_code=2,
            lines=[header, f"RESULT kind=fuel-exhausted steps={result.steps_used}{cycle}"],
            human=f"no value within fuel {req.fuel}{cycle}",
            data={"steps": str(result.steps_used)})

    return _guard(go)


def handle_trace(req: TraceRequest) -> RunResponse:
    def go() -> RunResponse:
        term, level = _load(req.source, req.level)
        typecheck_closed(term)
        alloc = make_allocator(req.alloc, req.seed)
        steps = run_trace(Config({}, term), min(req.fuel, req.limit), alloc)
        lines = [_header("trace", seed=req.seed, fuel=req.fuel, alloc=req.alloc, level=level)]
        lines.extend(format_trace(steps))
        return RunResponse(ok=True, exit_code=0, lines=lines,
                           human="\n".join(lines[1:]) or "already a value",
                           data={"steps": str(len(steps))})

    return _guard(go)


def handle_sn(req: SnRequest) -> RunResponse:
    def go() -> RunResponse:
        term, _ = _load(req.source, None)
        tau = typecheck_closed(term)
        corpus = ValueCorpus(req.corpus_depth, req.seed)
        verdict = sn_check(term, tau, corpus, req.fuel)
        return _verdict_response("sn", verdict, req.seed,
                                 extra={"type": print_type(tau)})

    return _guard(go)


def handle_safe(req: SafeRequest) -> RunResponse:
    def go() -> RunResponse:
        term, _ = _load(req.source, None)
        verdict = safe_check(term, req.fuel, make_allocator(req.alloc, req.seed))
        return _verdict_response("safe", verdict, req.seed)

    return _guard(go)


def handle_member(req: MemberRequest) -> RunResponse:
    def go() -> RunResponse:
        term, pragma = parse_program(req.source)
        tau = parse_type(req.type)
        # the model is selected by the level: an explicit request or pragma
        # wins, otherwise the constructors imply it
        if req.level is not None:
            level = resolve_level(req.level)
        elif pragma is not None:
            level = pragma
        else:
            level = implied_level(term, tau)
        if not level_check(term, level) or not level_check(tau, level):
            needed = "+".join(sorted(required_features(term) | required_features(tau)))
            raise UsageError(f"input uses features [{needed}] outside level {level}")
        corpus = ValueCorpus(req.corpus_depth, req.seed)
        features = required_features(term) | required_features(tau)
        stepworld_mode = (level.enables("mu") or level.enables("ref")
                          or req.world is not None)
        if features & {"systemF", "existential"}:
            raise UsageError(
                "no unary interpretation for quantified types; use equiv for the binary relation")
        if stepworld_mode:
            world = parse_world(req.world) if req.world else {}
            if is_value(term):
                verdict = v_member_k(req.k, term, tau, world, corpus, req.fuel)
            else:
                heap = heap_for_world(world, corpus)
                verdict = e_member_k(req.k, term, tau, world, heap, corpus, req.fuel)
            return _verdict_response("member", verdict, req.seed,
                                     extra={"model": "step-indexed", "k": str(req.k)})
        if is_value(term):
            verdict = v_member(term, tau, corpus, req.fuel)
        else:
            verdict = e_member(term, tau, corpus, req.fuel)
        return _verdict_response("member", verdict, req.seed, extra={"model": "plain"})

    return _guard(go)


def handle_equiv(req: EquivRequest) -> RunResponse:
    def go() -> RunResponse:
        left, _ = _load(req.left, None)
        right, _ = _load(req.right, None)
        t1 = typecheck_closed(left)
        t2 = typecheck_closed(right)
        if not alpha_eq(t1, t2):
            raise UsageError(
                f"sides have different types: {print_type(t1)} vs {print_type(t2)}")
        corpus = ValueCorpus(req.corpus_depth, req.seed)
        catalog = RelCatalog(corpus, req.catalog_size)
        if req.rel:
            catalog = catalog.with_extra([_parse_finite_rel(req.rel)])
        verdict = log_equiv_check(frozenset(), {}, left, right, t1, catalog, corpus, req.fuel)
        return _verdict_response("equiv", verdict, req.seed,
                                 extra={"type": print_type(t1)})

    return _guard(go)


def handle_distinguish(req: DistinguishRequest) -> RunResponse:
    def go() -> RunResponse:
        left, _ = _load(req.left, None)
        right, _ = _load(req.right, None)
        t1 = typecheck_closed(left)
        t2 = typecheck_closed(right)
        if not alpha_eq(t1, t2):
            raise UsageError(
                f"sides have different types: {print_type(t1)} vs {print_type(t2)}")
        if req.result_type == "Bool":
            result_type: Type = TBool()
        elif req.result_type == "Int":
            result_type = TInt()
        else:
            raise UsageError("result_type must be Bool or Int")
        ct = ContextTyping(hole_type=t1, result_type=result_type)
        verdict, report = distinguish(left, right, ct, req.ctx_size, req.fuel)
        header = _header("distinguish", seed=req.seed, fuel=req.fuel, ctx=req.ctx_size)
        if report is not None:
            line = report.render()
            return RunResponse(ok=True, exit_code=1, lines=[header, line], human=line,
                               data={"context": print_term(report.context)})
        line = f"NO-CONTEXT bound={req.ctx_size} fuel={req.fuel}"
        return RunResponse(ok=True, exit_code=2, lines=[header, line], human=line)

    return _guard(go)


def handle_free_thm(req: FreeThmRequest) -> RunResponse:
    def go() -> RunResponse:
        term, _ = _load(req.source, None)
        tau = typecheck_closed(term)
        corpus = ValueCorpus(req.corpus_depth, req.seed)
        verdicts = _free_thm_instances(req.kind, term, tau, req.count, req.seed,
                                       corpus, req.fuel)
        lines = [_header("free-thm", kind=req.kind, seed=req.seed, fuel=req.fuel,
                         count=req.count)]
        lines.extend(v.render() for v in verdicts)
        proven = sum(1 for v in verdicts if v.is_proven)
        refuted = sum(1 for v in verdicts if v.is_disproven)
        bounded = len(verdicts) - proven - refuted
        lines.append(f"SUMMARY proven={proven} disproven={refuted} bounded={bounded}")
        code = 1 if refuted else (2 if bounded else 0)
        return RunResponse(
            ok=True, exit_code=code, lines=lines,
            human=f"{req.kind}: {proven} proven, {refuted} disproven, {bounded} bounded",
            data={"proven": str(proven), "disproven": str(refuted), "bounded": str(bounded)})

    return _guard(go)


def _free_thm_instances(
    kind: str, term: Term, tau: Type, count: int, seed: int,
    corpus: ValueCorpus, fuel: int,
) -> list[Verdict]:
    rng = random.Random(seed)
    type_pool: list[Type] = [TBool(), TInt(), TArrow(TBool(), TBool())]

    def sample_value(t: Type) -> Term:
        values = corpus.values(t)
        if not values:
            raise UsageError(f"no sample values at {print_type(t)}")
        return values[rng.randrange(len(values))]

    out: list[Verdict] = []
    for _ in range(count):
        if kind == "identity":
            _expect(tau, TForall("a", TArrow(TVar("a"), TVar("a"))),
                    "identity expects e : all a. a -> a")
            t = type_pool[rng.randrange(len(type_pool))]
            out.append(free_theorem_run("identity", term, fuel, tau=t, value=sample_value(t)))
        elif kind == "constant":
            _expect(tau, TForall("a", TArrow(TVar("a"), TBool())),
                    "constant expects e : all a. a -> Bool")
            t = type_pool[rng.randrange(len(type_pool))]
            out.append(free_theorem_run("constant", term, fuel, tau=t,
                                        v1=sample_value(t), v2=sample_value(t)))
        elif kind == "constCrossType":
            _expect(tau, TForall("a", TArrow(TVar("a"), TBool())),
                    "constCrossType expects e : all a. a -> Bool")
            t1 = type_pool[rng.randrange(len(type_pool))]
            t2 = type_pool[rng.randrange(len(type_pool))]
            out.append(free_theorem_run("constCrossType", term, fuel, tau1=t1, tau2=t2,
                                        v1=sample_value(t1), v2=sample_value(t2)))
        elif kind == "continuation":
            inner = _continuation_domain(tau)
            t_k = [TBool(), TInt()][rng.randrange(2)]
            k = sample_value(TArrow(inner, t_k))
            out.append(free_theorem_run("continuation", term, fuel, tau=inner,
                                        tau_k=t_k, k=k, corpus=corpus))
        else:
            raise UsageError(f"unknown free-theorem kind {kind!r}")
    return out


def _expect(got: Type, want: Type, msg: str) -> None:
    if not alpha_eq(got, want):
        raise UsageError(f"{msg}; term has type {print_type(got)}")


def _continuation_domain(tau: Type) -> Type:
    # e : all a. (t -> a) -> a  determines t
    if (isinstance(tau, TForall) and isinstance(tau.body, TArrow)
            and isinstance(tau.body.dom, TArrow)
            and isinstance(tau.body.dom.cod, TVar) and tau.body.dom.cod.name == tau.var
            and isinstance(tau.body.cod, TVar) and tau.body.cod.name == tau.var):
        return tau.body.dom.dom
    raise UsageError(f"continuation expects e : all a. (t -> a) -> a, got {print_type(tau)}")


def handle_demo(req: DemoRequest) -> RunResponse:
    def go() -> RunResponse:
        if req.name == "omega":
            term = demos.self_app()
            tau = typecheck_closed(term)
            verdict = safe_check(demos.self_app_diverging(), req.fuel)
            resp = _verdict_response("demo", verdict, req.seed,
                                     extra={"name": "omega", "type": print_type(tau)})
            resp.lines.insert(1, f"TYPE {print_type(tau)}")
            return resp
        if req.name == "landin":
            term = demos.knot()
            tau = typecheck_closed(term)
            steps = run_trace(Config({}, term), 8, make_allocator("seq"))
            verdict = safe_check(term, req.fuel)
            resp = _verdict_response("demo", verdict, req.seed,
                                     extra={"name": "landin", "type": print_type(tau)})
            for line in reversed(format_trace(steps)):
                resp.lines.insert(1, line)
            resp.lines.insert(1, f"TYPE {print_type(tau)}")
            return resp
        if req.name == "packages":
            left, right = demos.package_int(), demos.package_bool()
            tau = demos.package_type()
            corpus = ValueCorpus(req.corpus_depth, req.seed)
            catalog = RelCatalog(corpus, req.catalog_size)
            rel_src = req.rel or "{(1, true)}"
            catalog = catalog.with_extra([_parse_finite_rel(rel_src)])
            verdict = log_equiv_check(frozenset(), {}, left, right, tau,
                                      catalog, corpus, req.fuel)
            return _verdict_response("demo", verdict, req.seed,
                                     extra={"name": "packages", "type": print_type(tau)})
        raise UsageError(f"unknown demo {req.name!r}; expected omega, landin, or packages")

    return _guard(go)


def handle_gen(req: GenRequest) -> RunResponse:
    def go() -> RunResponse:
        level = resolve_level(req.level)
        rng = random.Random(req.seed)
        lines = [_header("gen", seed=req.seed, level=level, size=req.size, count=req.count)]
        shown = []
        for _ in range(req.count):
            if req.type is not None:
                tau = parse_type(req.type)
            else:
                tau = gen_type(level, max(2, req.size // 4), rng.randrange(1 << 30))
            try:
                term = gen_well_typed(level, frozenset(), {}, tau, req.size,
                                      rng.randrange(1 << 30))
            except GenerationFailed as exc:
                raise UsageError(str(exc)) from exc
            lines.append(f"GEN type={print_type(tau)} term={print_term(term)}")
            shown.append(print_term(term))
        return RunResponse(ok=True, exit_code=0, lines=lines, human="\n".join(shown))

    return _guard(go)


def _parse_finite_rel(src: str) -> FiniteRel:
    left_ty, right_ty, pairs = parse_relation(src)
    if not pairs and (left_ty is None or right_ty is None):
        raise UsageError("an untyped relation literal needs at least one pair")
    if left_ty is None:
        left_ty = typecheck_closed(pairs[0][0])
    if right_ty is None:
        right_ty = typecheck_closed(pairs[0][1])
    try:
        return FiniteRel(left_ty, right_ty, tuple(pairs))
    except ValueError as exc:
        raise UsageError(f"bad relation literal: {exc}") from exc


def _verdict_response(cmd: str, verdict: Verdict, seed: int,
                      extra: dict[str, str] | None = None) -> RunResponse:
    header = _header(cmd, seed=seed)
    line = verdict.render()
    data = {"status": verdict.status}
    if verdict.witness:
        data["witness"] = verdict.witness
    if extra:
        data.update(extra)
    human = verdict.status
    if verdict.note:
        human += f" ({verdict.note})"
    if verdict.witness:
        human += f"\n  witness: {verdict.witness}"
    return RunResponse(ok=True, exit_code=_verdict_exit(verdict),
                       lines=[header, line], human=human, data=data)


HANDLERS = {
    "check": (CheckRequest, handle_check),
    "eval": (EvalRequest, handle_eval),
    "trace": (TraceRequest, handle_trace),
    "sn": (SnRequest, handle_sn),
    "safe": (SafeRequest, handle_safe),
    "member": (MemberRequest, handle_member),
    "equiv": (EquivRequest, handle_equiv),
    "distinguish": (DistinguishRequest, handle_distinguish),
    "free-thm": (FreeThmRequest, handle_free_thm),
    "demo": (DemoRequest, handle_demo),
    "gen": (GenRequest, handle_gen),
}

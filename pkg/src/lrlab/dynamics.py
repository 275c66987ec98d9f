"""Small-step operational semantics over configurations <heap, term>.

A single step fires the leftmost redex found by recursive decomposition
(function position before argument, scrutinee first), which matches the
standard evaluation-context grammar without materializing context objects.
Heap-manipulating steps copy the heap, so configurations are value-like
and can be retained in traces.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from .kernel import (
    Alloc, App, Assign, Case, Deref, FalseLit, Fold, If, Inl, Inr, IntEq,
    IntLit, Lam, Loc, Not, Pack, Pair, Fst, Snd, Term, TrueLit, TyApp,
    TyLam, Unfold, Unpack, _map_term_children, alpha_key, is_value,
    subst_term, subst_type_in_term, term_children,
)
from .surface import print_term

Heap = Mapping[int, Term]


@dataclass(frozen=True, eq=False)
class Config:
    heap: Heap
    expr: Term


# Stuck reasons
DEREF_DANGLING = "DerefDangling"
ASSIGN_DANGLING = "AssignDangling"
ILL_FORMED = "IllFormedRedex"


@dataclass(frozen=True)
class Stepped:
    config: Config
    rule: str


@dataclass(frozen=True)
class IsValue:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str


StepOutcome = Stepped | IsValue | Stuck


class Allocator:
    """Chooses fresh locations; freshness is the only contract."""

    kind = "seq"

    def fresh(self, heap: Heap) -> int:
        raise NotImplementedError


class SequentialAllocator(Allocator):
    kind = "seq"

    def fresh(self, heap: Heap) -> int:
        return max(heap, default=-1) + 1


class RandomizedAllocator(Allocator):
    kind = "rand"

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def fresh(self, heap: Heap) -> int:
        while True:
            l = self.rng.randrange(1 << 20)
            if l not in heap:
                return l


def make_allocator(kind: str, seed: int = 0) -> Allocator:
    if kind == "seq":
        return SequentialAllocator()
    if kind == "rand":
        return RandomizedAllocator(seed)
    raise ValueError(f"unknown allocator {kind!r}")


class _StuckSignal(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def step(config: Config, alloc: Allocator | None = None) -> StepOutcome:
    """Fire exactly one redex, or report IsValue / Stuck."""
    alloc = alloc or SequentialAllocator()
    if is_value(config.expr):
        return IsValue()
    try:
        expr, heap, rule = _reduce(config.expr, config.heap, alloc)
    except _StuckSignal as sig:
        return Stuck(sig.reason)
    return Stepped(Config(heap, expr), rule)


def _reduce(e: Term, heap: Heap, alloc: Allocator) -> tuple[Term, Heap, str]:
    """Reduce the leftmost redex inside ``e``; raises _StuckSignal."""

    def sub(inner: Term):
        return _reduce(inner, heap, alloc)

    match e:
        case If(c, t, o):
            if not is_value(c):
                c2, h2, rule = sub(c)
                return If(c2, t, o), h2, rule
            if isinstance(c, TrueLit):
                return t, heap, "if-true"
            if isinstance(c, FalseLit):
                return o, heap, "if-false"
            raise _StuckSignal(ILL_FORMED)
        case App(fn, arg):
            if not is_value(fn):
                f2, h2, rule = sub(fn)
                return App(f2, arg), h2, rule
            if not is_value(arg):
                a2, h2, rule = sub(arg)
                return App(fn, a2), h2, rule
            if isinstance(fn, Lam):
                return subst_term(fn.body, arg, fn.var), heap, "beta"
            raise _StuckSignal(ILL_FORMED)
        case TyApp(fn, annot):
            if not is_value(fn):
                f2, h2, rule = sub(fn)
                return TyApp(f2, annot), h2, rule
            if isinstance(fn, TyLam):
                return subst_type_in_term(fn.body, annot, fn.var), heap, "type-beta"
            raise _StuckSignal(ILL_FORMED)
        case Pair(l, r):
            if not is_value(l):
                l2, h2, rule = sub(l)
                return Pair(l2, r), h2, rule
            r2, h2, rule = sub(r)
            return Pair(l, r2), h2, rule
        case Fst(a):
            if not is_value(a):
                a2, h2, rule = sub(a)
                return Fst(a2), h2, rule
            if isinstance(a, Pair):
                return a.left, heap, "fst"
            raise _StuckSignal(ILL_FORMED)
        case Snd(a):
            if not is_value(a):
                a2, h2, rule = sub(a)
                return Snd(a2), h2, rule
            if isinstance(a, Pair):
                return a.right, heap, "snd"
            raise _StuckSignal(ILL_FORMED)
        case Inl(a, annot):
            a2, h2, rule = sub(a)
            return Inl(a2, annot), h2, rule
        case Inr(a, annot):
            a2, h2, rule = sub(a)
            return Inr(a2, annot), h2, rule
        case Case(sc, x1, t1, x2, t2):
            if not is_value(sc):
                s2, h2, rule = sub(sc)
                return Case(s2, x1, t1, x2, t2), h2, rule
            if isinstance(sc, Inl):
                return subst_term(t1, sc.arg, x1), heap, "case-inl"
            if isinstance(sc, Inr):
                return subst_term(t2, sc.arg, x2), heap, "case-inr"
            raise _StuckSignal(ILL_FORMED)
        case Pack(w, payload, annot):
            p2, h2, rule = sub(payload)
            return Pack(w, p2, annot), h2, rule
        case Unpack(a, x, packed, body):
            if not is_value(packed):
                p2, h2, rule = sub(packed)
                return Unpack(a, x, p2, body), h2, rule
            if isinstance(packed, Pack):
                opened = subst_type_in_term(body, packed.witness, a)
                return subst_term(opened, packed.payload, x), heap, "unpack"
            raise _StuckSignal(ILL_FORMED)
        case Fold(a, annot):
            a2, h2, rule = sub(a)
            return Fold(a2, annot), h2, rule
        case Unfold(a):
            if not is_value(a):
                a2, h2, rule = sub(a)
                return Unfold(a2), h2, rule
            if isinstance(a, Fold):
                return a.arg, heap, "unfold"
            raise _StuckSignal(ILL_FORMED)
        case Alloc(a):
            if not is_value(a):
                a2, h2, rule = sub(a)
                return Alloc(a2), h2, rule
            l = alloc.fresh(heap)
            assert l not in heap
            return Loc(l), {**heap, l: a}, "alloc"
        case Assign(t, v):
            if not is_value(t):
                t2, h2, rule = sub(t)
                return Assign(t2, v), h2, rule
            if not is_value(v):
                v2, h2, rule = sub(v)
                return Assign(t, v2), h2, rule
            if isinstance(t, Loc):
                if t.loc not in heap:
                    raise _StuckSignal(ASSIGN_DANGLING)
                return v, {**heap, t.loc: v}, "assign"
            raise _StuckSignal(ILL_FORMED)
        case Deref(a):
            if not is_value(a):
                a2, h2, rule = sub(a)
                return Deref(a2), h2, rule
            if isinstance(a, Loc):
                if a.loc not in heap:
                    raise _StuckSignal(DEREF_DANGLING)
                return heap[a.loc], heap, "deref"
            raise _StuckSignal(ILL_FORMED)
        case IntEq(l, r):
            if not is_value(l):
                l2, h2, rule = sub(l)
                return IntEq(l2, r), h2, rule
            if not is_value(r):
                r2, h2, rule = sub(r)
                return IntEq(l, r2), h2, rule
            if isinstance(l, IntLit) and isinstance(r, IntLit):
                out: Term = TrueLit() if l.value == r.value else FalseLit()
                return out, heap, "int-eq"
            raise _StuckSignal(ILL_FORMED)
        case Not(a):
            if not is_value(a):
                a2, h2, rule = sub(a)
                return Not(a2), h2, rule
            if isinstance(a, TrueLit):
                return FalseLit(), heap, "not"
            if isinstance(a, FalseLit):
                return TrueLit(), heap, "not"
            raise _StuckSignal(ILL_FORMED)
        case _:
            # open variables, bare holes, and other non-redexes
            raise _StuckSignal(ILL_FORMED)


# ---------------------------------------------------------------------------
# Multi-step evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CycleReport:
    first: Config
    second: Config
    first_step: int
    second_step: int

    @property
    def period(self) -> int:
        return self.second_step - self.first_step


@dataclass(frozen=True)
class Value:
    value: Term
    heap: Heap
    steps_used: int


@dataclass(frozen=True)
class StuckResult:
    config: Config
    reason: str
    steps_used: int


@dataclass(frozen=True)
class FuelExhausted:
    last: Config
    steps_used: int
    cycle: CycleReport | None = None


EvalResult = Value | StuckResult | FuelExhausted


def config_key(config: Config) -> str:
    """Alpha-invariant fingerprint with locations renamed canonically."""
    order = canonical_locations(config)
    renamed_expr = _rename_locs(config.expr, order)
    parts = [alpha_key(renamed_expr), "|"]
    for l in sorted(config.heap, key=lambda l: order[l]):
        parts.append(f"{order[l]}=>")
        parts.append(alpha_key(_rename_locs(config.heap[l], order)))
        parts.append(";")
    return "".join(parts)


def canonical_locations(config: Config) -> dict[int, int]:
    """Locations numbered by first occurrence (expression first, then heap)."""
    order: dict[int, int] = {}

    def visit(e: Term) -> None:
        if isinstance(e, Loc) and e.loc not in order:
            order[e.loc] = len(order)
        for c in term_children(e):
            visit(c)

    visit(config.expr)
    for l in sorted(config.heap):
        if l not in order:
            order[l] = len(order)
    for l in sorted(config.heap):
        visit(config.heap[l])
    return order


def _rename_locs(e: Term, order: Mapping[int, int]) -> Term:
    if isinstance(e, Loc):
        return Loc(order.get(e.loc, e.loc))
    return _map_term_children(e, lambda c: _rename_locs(c, order))


def eval_star(
    config: Config,
    fuel: int,
    alloc: Allocator | None = None,
    detect_cycles: bool = False,
) -> EvalResult:
    """Iterate ``step`` for at most ``fuel`` steps."""
    alloc = alloc or SequentialAllocator()
    seen: dict[str, tuple[int, Config]] = {}
    cycle: CycleReport | None = None
    current = config
    steps = 0
    if detect_cycles:
        seen[config_key(current)] = (0, current)
    while True:
        if is_value(current.expr):
            return Value(current.expr, current.heap, steps)
        if steps >= fuel:
            return FuelExhausted(current, steps, cycle)
        outcome = step(current, alloc)
        if isinstance(outcome, Stuck):
            return StuckResult(current, outcome.reason, steps)
        assert isinstance(outcome, Stepped)
        current = outcome.config
        steps += 1
        if detect_cycles and cycle is None:
            key = config_key(current)
            if key in seen:
                at, earlier = seen[key]
                cycle = CycleReport(earlier, current, at, steps)
            else:
                seen[key] = (steps, current)


def trace(config: Config, fuel: int, alloc: Allocator | None = None) -> list[tuple[Config, str]]:
    """The first ``fuel`` steps as (configuration-after, rule) pairs."""
    alloc = alloc or SequentialAllocator()
    out: list[tuple[Config, str]] = []
    current = config
    for _ in range(fuel):
        outcome = step(current, alloc)
        if not isinstance(outcome, Stepped):
            break
        current = outcome.config
        out.append((current, outcome.rule))
    return out


def format_trace(steps: Iterable[tuple[Config, str]]) -> list[str]:
    """One line per step: STEP <n> RULE <name> EXPR <term> HEAP {...}.

    Locations print as ``#l<k>`` numbered in allocation order across the
    whole trace, so sequential and randomized runs read alike.
    """
    steps = list(steps)
    order: dict[int, int] = {}
    for config, _ in steps:
        for l in sorted(config.heap):
            if l not in order:
                order[l] = len(order)
    lines = []
    for n, (config, rule) in enumerate(steps, start=1):
        heap_part = ", ".join(
            f"#l{order[l]}:{print_term(config.heap[l], 0, order)}"
            for l in sorted(config.heap, key=lambda l: order[l])
        )
        lines.append(
            f"STEP {n} RULE {rule} EXPR {print_term(config.expr, 0, order)} HEAP {{{heap_part}}}"
        )
    return lines

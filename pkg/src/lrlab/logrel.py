"""Executable unary logical predicates: the termination predicate for the
simply typed fragment and the safety value/expression interpretations.

Both are bounded: the universal quantifier in the arrow clause ranges over
a finite value corpus, and verdicts say so.  Refutations are sound;
acceptances are corpus-relative except where the quantifier's domain is
provably finite (booleans, and products/sums built from them).
"""

from __future__ import annotations

from typing import Mapping

from .dynamics import (
    Allocator, Config, FuelExhausted, StuckResult, Value, eval_star,
    make_allocator,
)
from .equivalence import gen_value_corpus
from .kernel import (
    App, FalseLit, Inl, Inr, IntLit, Lam, Pair, Fst, Snd, TArrow, TBool,
    TInt, TProd, TSum, Term, TrueLit, Type, alpha_key, is_value,
    required_features, subst_term,
)
from .statics import TermCtx, typechecks_at
from .surface import print_term, print_type
from .verdict import Bounds, Verdict, all_of, disproven, proven, up_to_bounds


class ValueCorpus:
    """Finite stand-in for "all closed values of a type", cached per type."""

    def __init__(self, depth: int = 3, seed: int = 0):
        self.depth = depth
        self.seed = seed
        self._cache: dict[str, tuple[list[Term], bool]] = {}

    def _entry(self, tau: Type) -> tuple[list[Term], bool]:
        key = alpha_key(tau)
        if key not in self._cache:
            self._cache[key] = gen_value_corpus(tau, self.depth, self.seed)
        return self._cache[key]

    def values(self, tau: Type) -> list[Term]:
        return self._entry(tau)[0]

    def exhaustive(self, tau: Type) -> bool:
        """True when the corpus provably enumerates the whole value space."""
        return self._entry(tau)[1]


def _eval(e: Term, fuel: int, alloc: Allocator | None = None):
    return eval_star(Config({}, e), fuel, alloc or make_allocator("seq"))


_FRAGMENT = frozenset({"pairs", "sums", "int"})


def _require_simply_typed(tau: Type, what: str) -> None:
    from .surface import print_type
    if not required_features(tau) <= _FRAGMENT:
        raise ValueError(f"{what} is defined on the simply typed fragment, "
                         f"not {print_type(tau)}")


def sn_check(e: Term, tau: Type, corpus: ValueCorpus, fuel: int) -> Verdict:
    """Termination predicate of the simply typed fragment.

    Checks well-typedness, evaluation to a value, and at arrow types that
    every corpus argument leads to a terminating application.  Arrow
    verdicts stay bounds-qualified: the real quantifier ranges over all
    terminating argument expressions, not just corpus values.
    """
    _require_simply_typed(tau, "the termination predicate")
    bounds = Bounds(fuel=fuel, corpus=corpus.depth)
    if not typechecks_at(e, tau):
        return disproven(bounds, print_term(e), note=f"not closed and well-typed at {print_type(tau)}")
    result = _eval(e, fuel)
    if isinstance(result, StuckResult):
        return disproven(bounds, print_term(result.config.expr), note="stuck")
    if isinstance(result, FuelExhausted):
        return up_to_bounds(bounds, note="fuel exhausted before a value")
    assert isinstance(result, Value)

    match tau:
        case TBool() | TInt():
            return proven(bounds)
        case TArrow(dom, cod):
            parts = []
            for arg in corpus.values(dom):
                if sn_check(arg, dom, corpus, fuel).is_disproven:
                    continue  # quantifier only ranges over terminating arguments
                parts.append(sn_check(App(e, arg), cod, corpus, fuel))
            return all_of(parts, bounds, exhaustive=False)
        case TProd(left, right):
            return all_of(
                [sn_check(Fst(e), left, corpus, fuel), sn_check(Snd(e), right, corpus, fuel)],
                bounds)
        case TSum(left, right):
            v = result.value
            if isinstance(v, Inl):
                return sn_check(v.arg, left, corpus, fuel)
            if isinstance(v, Inr):
                return sn_check(v.arg, right, corpus, fuel)
            return disproven(bounds, print_term(v), note="sum-typed result is not an injection")
    raise ValueError(f"termination predicate is defined on the simply typed fragment, not {print_type(tau)}")


def v_member(v: Term, tau: Type, corpus: ValueCorpus, fuel: int) -> Verdict:
    """Structural value-interpretation membership; no well-typedness demanded."""
    _require_simply_typed(tau, "the value interpretation")
    if not is_value(v):
        raise ValueError(f"not a value: {print_term(v)}")
    bounds = Bounds(fuel=fuel, corpus=corpus.depth)
    match tau:
        case TBool():
            if isinstance(v, (TrueLit, FalseLit)):
                return proven(bounds)
            return disproven(bounds, print_term(v), note="not a boolean")
        case TInt():
            if isinstance(v, IntLit):
                return proven(bounds)
            return disproven(bounds, print_term(v), note="not an integer literal")
        case TProd(left, right):
            if not isinstance(v, Pair):
                return disproven(bounds, print_term(v), note="not a pair")
            return all_of([v_member(v.left, left, corpus, fuel),
                           v_member(v.right, right, corpus, fuel)], bounds)
        case TSum(left, right):
            if isinstance(v, Inl):
                return v_member(v.arg, left, corpus, fuel)
            if isinstance(v, Inr):
                return v_member(v.arg, right, corpus, fuel)
            return disproven(bounds, print_term(v), note="not an injection")
        case TArrow(dom, cod):
            if not isinstance(v, Lam):
                return disproven(bounds, print_term(v), note="not a lambda abstraction")
            parts = []
            skipped = False
            for arg in corpus.values(dom):
                arg_v = v_member(arg, dom, corpus, fuel)
                if not arg_v.is_proven:
                    skipped = True  # only provably-related inputs instantiate the clause
                    continue
                parts.append(e_member(subst_term(v.body, arg, v.var), cod, corpus, fuel))
            exhaustive = corpus.exhaustive(dom) and not skipped
            return all_of(parts, bounds, exhaustive=exhaustive)
    raise ValueError(f"value interpretation is defined on the simply typed fragment, not {print_type(tau)}")


def e_member(e: Term, tau: Type, corpus: ValueCorpus, fuel: int) -> Verdict:
    """Run to an irreducible expression, then require value membership."""
    _require_simply_typed(tau, "the expression interpretation")
    bounds = Bounds(fuel=fuel, corpus=corpus.depth)
    result = _eval(e, fuel)
    if isinstance(result, StuckResult):
        return disproven(bounds, print_term(result.config.expr),
                         note=f"stuck: {result.reason}")
    if isinstance(result, FuelExhausted):
        return up_to_bounds(bounds, note="fuel exhausted before irreducibility")
    return v_member(result.value, tau, corpus, fuel)


def safe_check(e: Term, fuel: int, alloc: Allocator | None = None) -> Verdict:
    """Walk the trace from an empty heap; every prefix must be a value or
    able to step."""
    bounds = Bounds(fuel=fuel, corpus=0)
    result = eval_star(Config({}, e), fuel, alloc or make_allocator("seq"), detect_cycles=True)
    if isinstance(result, Value):
        return proven(bounds)
    if isinstance(result, StuckResult):
        return disproven(bounds, print_term(result.config.expr),
                         note=f"stuck after {result.steps_used} steps: {result.reason}")
    assert isinstance(result, FuelExhausted)
    if result.cycle is not None:
        note = (f"divergent: cycle of period {result.cycle.period} first seen at "
                f"step {result.cycle.first_step}")
    else:
        note = "fuel exhausted without stuckness"
    return up_to_bounds(bounds, note=note)


def gamma_satisfies(
    gamma: Mapping[str, Term],
    ctx: TermCtx,
    corpus: ValueCorpus,
    fuel: int,
    mode: str = "sn",
) -> Verdict:
    """Does the substitution satisfy the environment, binding by binding?

    ``mode="sn"`` uses the termination predicate (well-typedness included);
    ``mode="safety"`` uses the value interpretation.  The two notions are
    kept separate on purpose: the termination predicate demands typing, the
    safety one deliberately does not.
    """
    bounds = Bounds(fuel=fuel, corpus=corpus.depth)
    if set(gamma) != set(ctx):
        missing = sorted(set(gamma) ^ set(ctx))
        return disproven(bounds, ",".join(missing), note="substitution domain mismatch")
    parts = []
    for x in sorted(ctx):
        if mode == "sn":
            sub = sn_check(gamma[x], ctx[x], corpus, fuel)
        elif mode == "safety":
            sub = v_member(gamma[x], ctx[x], corpus, fuel)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        if sub.is_disproven:
            return disproven(bounds, f"{x} -> {print_term(gamma[x])}",
                             note=f"binding fails at {print_type(ctx[x])}")
        parts.append(sub)
    return all_of(parts, bounds)

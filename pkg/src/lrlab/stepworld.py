"""Step-indexed unary interpretations: recursive types and references.

Worlds are realized syntactically as finite maps from locations to closed
types; "the stored predicate k-equals the value interpretation" becomes
alpha-equality of the stored type.  Membership at index k only constrains
executions shorter than k steps, so a check that runs out of index before
reaching an irreducible state holds vacuously.

Bounded instantiation: the recursive-type clause checks its strict-index
quantifier at k-1 only, and the arrow clause fixes the inner index at k and
samples future worlds; both are backed by the separately tested downward
closure and world monotonicity laws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .dynamics import Allocator, Config, Stepped, Stuck, make_allocator, step
from .kernel import (
    Fold, Inl, Inr, IntLit, Lam, Loc, Pair, TArrow, TBool, TInt, TMu, TProd,
    TRef, TSum, Term, TrueLit, FalseLit, Type, alpha_eq, alpha_key,
    free_type_vars, is_value, subst_term, subst_type_in_type,
)
from .logrel import ValueCorpus
from .statics import typecheck
from .surface import print_term, print_type
from .verdict import Bounds, Verdict, all_of, disproven, proven, up_to_bounds

World = Mapping[int, Type]


def future_world(newer: World, older: World) -> bool:
    """Domain extension that preserves every old assignment exactly."""
    if not set(newer) >= set(older):
        return False
    return all(alpha_eq(newer[l], older[l]) for l in older)


def sample_future_worlds(w: World, count: int = 3) -> list[World]:
    """The world itself plus deterministic one-cell extensions."""
    pool: list[Type] = [TBool(), TInt(), TArrow(TBool(), TBool())]
    out: list[World] = [dict(w)]
    next_loc = max(w, default=-1) + 1
    for i in range(count):
        ext = dict(w)
        ext[next_loc + i] = pool[i % len(pool)]
        out.append(ext)
    return out


def heap_for_world(w: World, corpus: ValueCorpus) -> dict[int, Term]:
    """A canonical heap satisfying the world: first corpus value per cell;
    reference-typed cells point at a matching cell of the same world."""
    heap: dict[int, Term] = {}
    deferred: list[tuple[int, Type]] = []
    for l in sorted(w):
        t = w[l]
        if isinstance(t, TRef):
            deferred.append((l, t.inner))
            continue
        values = corpus.values(t)
        if not values:
            raise ValueError(f"no canonical value for world entry {print_type(t)}")
        heap[l] = values[0]
    for l, inner in deferred:
        target = next((l2 for l2 in sorted(w) if l2 != l and alpha_eq(w[l2], inner)), None)
        if target is None:
            raise ValueError(f"world has a Ref {print_type(inner)} cell with no target cell")
        heap[l] = Loc(target)
    return heap


# ---------------------------------------------------------------------------
# Finite indexed predicates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IndexedPredicate:
    """A finite step-indexed, downward-closed predicate over values."""

    pairs: tuple[tuple[int, Term], ...]

    def __post_init__(self) -> None:
        keys = self.key_set()
        for n, v in self.pairs:
            if n < 0:
                raise ValueError("step indices are natural numbers")
            vk = alpha_key(v)
            for m in range(n):
                if (m, vk) not in keys:
                    raise ValueError(
                        f"not downward closed: ({n}, {print_term(v)}) without index {m}")

    @classmethod
    def close(cls, pairs: Iterable[tuple[int, Term]]) -> "IndexedPredicate":
        """Build the downward closure of arbitrary (index, value) pairs."""
        best: dict[str, tuple[int, Term]] = {}
        for n, v in pairs:
            vk = alpha_key(v)
            if vk not in best or best[vk][0] < n:
                best[vk] = (n, v)
        out = []
        for n, v in best.values():
            out.extend((m, v) for m in range(n + 1))
        return cls(tuple(sorted(out, key=lambda p: (p[0], alpha_key(p[1])))))

    def key_set(self) -> frozenset[tuple[int, str]]:
        return frozenset((n, alpha_key(v)) for n, v in self.pairs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IndexedPredicate) and self.key_set() == other.key_set()

    def __hash__(self) -> int:
        return hash(self.key_set())

    def union(self, other: "IndexedPredicate") -> "IndexedPredicate":
        return IndexedPredicate.close(self.pairs + other.pairs)

    def intersection(self, other: "IndexedPredicate") -> "IndexedPredicate":
        keys = other.key_set()
        return IndexedPredicate(tuple(p for p in self.pairs
                                      if (p[0], alpha_key(p[1])) in keys))


def k_cut(k: int, pred: IndexedPredicate) -> IndexedPredicate:
    return IndexedPredicate(tuple(p for p in pred.pairs if p[0] < k))


def k_equal(k: int, p: IndexedPredicate, q: IndexedPredicate) -> bool:
    return k_cut(k, p) == k_cut(k, q)


# ---------------------------------------------------------------------------
# Step-indexed membership
# ---------------------------------------------------------------------------

_SUPPORTED = "the step-indexed model covers Bool/Int, pairs, sums, arrows, mu, and Ref"


def v_member_k(
    k: int,
    v: Term,
    tau: Type,
    world: World,
    corpus: ValueCorpus,
    fuel: int,
    world_samples: int = 3,
    _depth: int = 0,
) -> Verdict:
    """Value membership at step index k under a world.

    Future-world extensions are sampled at the outermost arrow clause only
    (``_depth`` tracks nesting); together with the index spent by running
    function bodies this keeps the world/heap recursion well founded, which
    is this realization's stand-in for the solution of the recursive domain
    equation.
    """
    if free_type_vars(tau):
        raise ValueError(f"step-indexed membership needs a closed type, got {print_type(tau)}")
    if not is_value(v):
        raise ValueError(f"not a value: {print_term(v)}")
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, k=k)
    match tau:
        case TBool():
            if isinstance(v, (TrueLit, FalseLit)):
                return proven(bounds)
            return disproven(bounds, print_term(v), note="not a boolean")
        case TInt():
            if isinstance(v, IntLit):
                return proven(bounds)
            return disproven(bounds, print_term(v), note="not an integer literal")
        case TProd(l, r):
            if not isinstance(v, Pair):
                return disproven(bounds, print_term(v), note="not a pair")
            return all_of([v_member_k(k, v.left, l, world, corpus, fuel, world_samples, _depth),
                           v_member_k(k, v.right, r, world, corpus, fuel, world_samples, _depth)],
                          bounds)
        case TSum(l, r):
            # the index is used as-is: case analysis spends a step in the
            # dynamics, not in the index discipline
            if isinstance(v, Inl):
                return v_member_k(k, v.arg, l, world, corpus, fuel, world_samples, _depth)
            if isinstance(v, Inr):
                return v_member_k(k, v.arg, r, world, corpus, fuel, world_samples, _depth)
            return disproven(bounds, print_term(v), note="not an injection")
        case TMu(a, body):
            if not isinstance(v, Fold):
                return disproven(bounds, print_term(v), note="not a folded value")
            if k == 0:
                return proven(bounds)  # strict-index quantifier is vacuous
            unrolled = subst_type_in_type(body, tau, a)
            return v_member_k(k - 1, v.arg, unrolled, world, corpus, fuel,
                              world_samples, _depth)
        case TRef(inner):
            if not isinstance(v, Loc):
                return disproven(bounds, print_term(v), note="not a location")
            if v.loc not in world:
                return disproven(bounds, print_term(v), note="location not in the world")
            if alpha_eq(world[v.loc], inner):
                return proven(bounds)
            return disproven(
                bounds, print_term(v),
                note=f"world allows {print_type(world[v.loc])}, needed {print_type(inner)}")
        case TArrow(dom, cod):
            if not isinstance(v, Lam):
                return disproven(bounds, print_term(v), note="not a lambda abstraction")
            parts = []
            samples = world_samples if _depth == 0 else 0
            for w2 in sample_future_worlds(world, samples):
                heap = heap_for_world(w2, corpus)
                for arg in corpus.values(dom):
                    arg_fit = v_member_k(k, arg, dom, w2, corpus, fuel,
                                         world_samples, _depth + 1)
                    if not arg_fit.is_proven:
                        continue
                    parts.append(e_member_k(
                        k, subst_term(v.body, arg, v.var), cod, w2, heap, corpus, fuel,
                        world_samples, _depth + 1))
            return all_of(parts, bounds, exhaustive=False)
    raise ValueError(_SUPPORTED + f"; got {print_type(tau)}")


def e_member_k(
    k: int,
    e: Term,
    tau: Type,
    world: World,
    heap: Mapping[int, Term],
    corpus: ValueCorpus,
    fuel: int,
    world_samples: int = 3,
    _depth: int = 0,
    alloc: "Allocator | None" = None,
) -> Verdict:
    """Expression membership at index k, starting from a heap assumed to
    satisfy the world.

    Runs at most min(k-1, fuel) steps.  Newly allocated cells enter the
    extended world at the type inferred when the allocation fired, which is
    exactly the statically known cell type.  When the expression is already
    irreducible the final heap obligation *is* the precondition, so it is
    not re-derived.
    """
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, k=k)
    budget = min(k - 1, fuel)
    sigma: dict[int, Type] = dict(world)
    current = Config(dict(heap), e)
    alloc = alloc or make_allocator("seq")
    j = 0
    while j <= budget:
        if is_value(current.expr):
            checks = [v_member_k(k - j, current.expr, tau, sigma, corpus, fuel,
                                 world_samples, _depth)]
            if j > 0:
                checks.append(heap_sat(k - j, current.heap, sigma, corpus, fuel,
                                       world_samples, _depth))
            return all_of(checks, bounds)
        outcome = step(current, alloc)
        if isinstance(outcome, Stuck):
            return disproven(bounds, print_term(current.expr),
                             note=f"stuck after {j} steps: {outcome.reason}")
        assert isinstance(outcome, Stepped)
        if j == budget:
            break  # may not take a step beyond the budget
        next_config = outcome.config
        if outcome.rule == "alloc":
            new = set(next_config.heap) - set(sigma)
            for l in sorted(new):
                sigma[l] = typecheck(sigma, frozenset(), {}, next_config.heap[l])
        current = next_config
        j += 1
    if budget == k - 1:
        return proven(bounds, note="no irreducible state within the index")
    return up_to_bounds(bounds, note="fuel below the step index")


def heap_sat(
    k: int,
    heap: Mapping[int, Term],
    world: World,
    corpus: ValueCorpus,
    fuel: int,
    world_samples: int = 3,
    _depth: int = 0,
) -> Verdict:
    """Heap satisfaction: equal domains and every cell's value is allowed."""
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, k=k)
    if set(heap) != set(world):
        missing = sorted(set(heap) ^ set(world))
        return disproven(bounds, f"#l{missing[0]}", note="heap/world domains differ")
    parts = []
    for l in sorted(world):
        sub = v_member_k(k, heap[l], world[l], world, corpus, fuel,
                         world_samples, _depth + 1)
        if sub.is_disproven:
            return disproven(bounds, f"#l{l} -> {print_term(heap[l])}", note=sub.note)
        parts.append(sub)
    return all_of(parts, bounds)


def sem_safe_k(
    gamma_ctx: Mapping[str, Type],
    e: Term,
    tau: Type,
    k: int,
    world: World,
    corpus: ValueCorpus,
    fuel: int,
    world_samples: int = 3,
    alloc: "Allocator | None" = None,
) -> Verdict:
    """Semantic safety at one index: close off with corpus substitutions
    compatible with the world and check expression membership."""
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, k=k)
    heap = heap_for_world(world, corpus)
    assignments: list[dict[str, Term]] = [{}]
    exhaustive = True
    for x in sorted(gamma_ctx):
        t = gamma_ctx[x]
        options = []
        skipped = False
        for v in corpus.values(t):
            sub = v_member_k(k, v, t, world, corpus, fuel, world_samples)
            if sub.is_disproven:
                skipped = True
                continue
            if not sub.is_proven:
                exhaustive = False
            options.append(v)
        if not options:
            return up_to_bounds(bounds, note=f"no corpus candidate for {x} at {print_type(t)}")
        exhaustive = exhaustive and corpus.exhaustive(t) and not skipped
        assignments = [{**g, x: v} for g in assignments for v in options][:64]
    parts = []
    for gamma in assignments:
        closed = e
        for x, v in gamma.items():
            closed = subst_term(closed, v, x)
        sub = e_member_k(k, closed, tau, world, heap, corpus, fuel, world_samples,
                         alloc=alloc)
        if sub.is_disproven:
            witness = ", ".join(f"{x} -> {print_term(v)}" for x, v in gamma.items()) or "empty"
            return disproven(bounds, witness, note=sub.note)
        parts.append(sub)
    return all_of(parts, bounds, exhaustive=exhaustive)

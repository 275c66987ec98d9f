"""Program contexts, bounded distinguishing-context search, and the
type-directed term/value generators behind every property harness.

A program context is a term with exactly one ``Hole``; plugging is literal,
so a context may capture free variables of the plugged term.  Context
enumeration is goal-type-directed over a finite ingredient universe: leaf
terms true/false/0/1, the variables in scope, the hole, and annotation
types drawn from the subterm closure of the hole/result types.  The naive
grammar-unrolling oracle in the test suite pins the same universe down.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .dynamics import Config, FuelExhausted, Value, eval_star, make_allocator
from .kernel import (
    Alloc, App, Assign, Case, Deref, FalseLit, Fold, Hole, If, Inl, Inr,
    IntEq, IntLit, Lam, Level, Not, Pack, Pair, Fst, Snd, TArrow, TBool,
    TExists, TForall, TInt, TMu, TProd, TRef, TSum, TVar, Term, TrueLit,
    TyApp, TyLam, Type, Unfold, Unpack, Var, _map_term_children, alpha_eq,
    alpha_key, fresh_name, free_type_vars, implied_level, iter_nodes,
    level_check, subst_type_in_type, term_size,
)
from .statics import TypeCheckError, typecheck, wf_type
from .surface import print_term, print_type
from .verdict import Bounds, Verdict, disproven, up_to_bounds


@dataclass(frozen=True)
class ContextTyping:
    """C : (holeDelta; holeGamma |- holeType) => (empty |- resultType)."""

    hole_type: Type
    hole_delta: frozenset[str] = frozenset()
    hole_gamma: dict[str, Type] = dc_field(default_factory=dict)
    result_type: Type = dc_field(default_factory=TBool)


def hole_count(e: Term) -> int:
    return sum(1 for n in iter_nodes(e) if isinstance(n, Hole))


def plug(context: Term, e: Term) -> Term:
    """Replace the hole verbatim; no freshening, capture is intended."""
    if isinstance(context, Hole):
        return e
    return _map_term_children(context, lambda c: plug(c, e))


def context_typecheck(context: Term, ct: ContextTyping) -> bool:
    """Typecheck with the hole as an axiom of ``ct.hole_type``.

    The hole's assumed bindings must be supplied by the ambient scope at
    its occurrence; then every conforming plug typechecks by weakening.
    """

    def on_hole(delta, gamma, node):
        if not (ct.hole_delta <= delta):
            raise TypeCheckError("hole type variables not in scope", "hole", node.span)
        for x, t in ct.hole_gamma.items():
            if x not in gamma or not alpha_eq(gamma[x], t):
                raise TypeCheckError(f"hole assumption {x} not in scope", "hole", node.span)
        return ct.hole_type

    try:
        got = typecheck({}, frozenset(), {}, context, on_hole=on_hole)
    except TypeCheckError:
        return False
    return alpha_eq(got, ct.result_type)


# ---------------------------------------------------------------------------
# Context enumeration
# ---------------------------------------------------------------------------


def type_pool(ct: ContextTyping, level: Level) -> list[Type]:
    """Annotation/argument types for enumeration: the subterm closure of
    Bool, Int, the hole/result types, and the hole's assumed bindings."""
    seeds: list[Type] = [TBool(), TInt(), ct.hole_type, ct.result_type]
    seeds.extend(ct.hole_gamma.values())
    seen: dict[str, Type] = {}

    def add(t: Type) -> None:
        key = alpha_key(t)
        if key not in seen and level_check(t, level):
            seen[key] = t
            match t:
                case TArrow(d, c):
                    add(d)
                    add(c)
                case TProd(l, r) | TSum(l, r):
                    add(l)
                    add(r)
                case TForall(_, b) | TExists(_, b) | TMu(_, b):
                    add(b)
                case TRef(inner):
                    add(inner)

    for t in seeds:
        add(t)
    return sorted(seen.values(), key=alpha_key)


class _Env:
    """Scope snapshot with precomputed lookup index and memo key."""

    __slots__ = ("delta", "gamma", "index", "memo_key")

    def __init__(self, delta: frozenset[str], gamma: tuple[tuple[str, Type, str], ...]):
        self.delta = delta
        self.gamma = gamma  # (name, type, type-key) triples
        self.index: dict[str, list[str]] = {}
        for x, _, tk in gamma:
            self.index.setdefault(tk, []).append(x)
        self.memo_key = ",".join(sorted(delta)) + "|" + ";".join(
            f"{x}:{tk}" for x, _, tk in gamma)

    def bind(self, x: str, t: Type, tkey: str) -> "_Env":
        kept = tuple(e for e in self.gamma if e[0] != x)
        return _Env(self.delta, kept + ((x, t, tkey),))

    def tbind(self, a: str) -> "_Env":
        return _Env(self.delta | {a}, self.gamma)


def enumerate_contexts(ct: ContextTyping, max_size: int, level: Level | None = None):
    """Yield well-typed single-hole contexts of size <= max_size, in a
    deterministic (size, then alpha-key) order."""
    if level is None:
        level = implied_level(ct.hole_type, ct.result_type, *ct.hole_gamma.values())
    enum = _Enumerator(ct, type_pool(ct, level), level)
    env = _Env(frozenset(), ())
    goal_key = alpha_key(ct.result_type)
    for size in range(1, max_size + 1):
        batch = [t for t, used in enum.terms(ct.result_type, goal_key, size, env) if used]
        batch.sort(key=alpha_key)
        yield from batch


class _Enumerator:
    def __init__(self, ct: ContextTyping, pool: list[Type], level: Level):
        self.ct = ct
        self.pool = [(t, alpha_key(t)) for t in pool]
        self.level = level
        self.hole_key = alpha_key(ct.hole_type)
        self.hole_gamma_keys = [(x, alpha_key(t)) for x, t in ct.hole_gamma.items()]
        self.memo: dict[tuple[str, int, str], list[tuple[Term, bool]]] = {}
        # pins the keyed object so the id stays valid
        self.tkeys: dict[int, tuple[Type, str]] = {}

    def on(self, feature: str) -> bool:
        return self.level.enables(feature)

    def key_of(self, t: Type) -> str:
        hit = self.tkeys.get(id(t))
        if hit is None:
            hit = (t, alpha_key(t))
            self.tkeys[id(t)] = hit
        return hit[1]

    def terms(self, goal: Type, gkey: str, size: int, env: _Env) -> list[tuple[Term, bool]]:
        if size <= 0:
            return []
        key = (gkey, size, env.memo_key)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        out: list[tuple[Term, bool]] = []
        self.memo[key] = out  # no recursion back into the same key: sizes shrink
        if size == 1:
            self._leaves(goal, gkey, env, out)
        else:
            self._composites(goal, gkey, size, env, out)
        return out

    def _hole_fits(self, gkey: str, env: _Env) -> bool:
        if gkey != self.hole_key or not (self.ct.hole_delta <= env.delta):
            return False
        return all(x in env.index.get(tk, ()) for x, tk in self.hole_gamma_keys)

    def _leaves(self, goal: Type, gkey: str, env: _Env, out: list[tuple[Term, bool]]) -> None:
        for x in env.index.get(gkey, ()):
            out.append((Var(x), False))
        if isinstance(goal, TBool):
            out.append((TrueLit(), False))
            out.append((FalseLit(), False))
        if isinstance(goal, TInt) and self.on("int"):
            out.append((IntLit(0), False))
            out.append((IntLit(1), False))
        if self._hole_fits(gkey, env):
            out.append((Hole(), True))

    def _splits(self, budget: int, parts: int):
        if parts == 1:
            yield (budget,)
            return
        for first in range(1, budget - parts + 2):
            for rest in self._splits(budget - first, parts - 1):
                yield (first,) + rest

    def _combine(self, ctor, child_lists, out: list[tuple[Term, bool]]) -> None:
        def go(i, picked, used):
            if i == len(child_lists):
                out.append((ctor(*picked), used))
                return
            for term, u in child_lists[i]:
                if used and u:
                    continue  # single hole overall
                go(i + 1, picked + [term], used or u)

        go(0, [], False)

    def _composites(self, goal: Type, gkey: str, size: int, env: _Env, out) -> None:
        inner = size - 1
        terms = self.terms
        wf_pool = [(t, tk) for t, tk in self.pool if wf_type(env.delta, t)]
        bool_t, bool_k = TBool(), "B;"
        int_t, int_k = TInt(), "I;"

        # introductions directed by the goal's own shape
        if isinstance(goal, TArrow):
            x = f"x{len(env.gamma)}"
            dk, ck = self.key_of(goal.dom), self.key_of(goal.cod)
            for body, used in terms(goal.cod, ck, inner, env.bind(x, goal.dom, dk)):
                out.append((Lam(x, goal.dom, body), used))
        if isinstance(goal, TProd) and self.on("pairs"):
            lk, rk = self.key_of(goal.left), self.key_of(goal.right)
            for s1, s2 in self._splits(inner, 2):
                self._combine(Pair, [terms(goal.left, lk, s1, env),
                                     terms(goal.right, rk, s2, env)], out)
        if isinstance(goal, TSum) and self.on("sums"):
            for arg, used in terms(goal.left, self.key_of(goal.left), inner, env):
                out.append((Inl(arg, goal), used))
            for arg, used in terms(goal.right, self.key_of(goal.right), inner, env):
                out.append((Inr(arg, goal), used))
        if isinstance(goal, TForall) and self.on("systemF"):
            a = fresh_name(goal.var, env.delta)
            body_goal = subst_type_in_type(goal.body, TVar(a), goal.var)
            for body, used in terms(body_goal, alpha_key(body_goal), inner, env.tbind(a)):
                out.append((TyLam(a, body), used))
        if isinstance(goal, TExists) and self.on("existential"):
            for w, _ in wf_pool:
                payload_goal = subst_type_in_type(goal.body, w, goal.var)
                for payload, used in terms(payload_goal, alpha_key(payload_goal), inner, env):
                    out.append((Pack(w, payload, goal), used))
        if isinstance(goal, TMu) and self.on("mu"):
            unfolded = subst_type_in_type(goal.body, goal, goal.var)
            for arg, used in terms(unfolded, alpha_key(unfolded), inner, env):
                out.append((Fold(arg, goal), used))
        if isinstance(goal, TRef) and self.on("ref"):
            ik = self.key_of(goal.inner)
            for arg, used in terms(goal.inner, ik, inner, env):
                out.append((Alloc(arg), used))

        # goal-preserving and eliminating forms
        for s1, s2, s3 in self._splits(inner, 3):
            self._combine(If, [terms(bool_t, bool_k, s1, env),
                               terms(goal, gkey, s2, env),
                               terms(goal, gkey, s3, env)], out)
        for sigma, sk in wf_pool:
            fn_goal = TArrow(sigma, goal)
            fn_key = f"ar({sk}{gkey})"
            for s1, s2 in self._splits(inner, 2):
                self._combine(App, [terms(fn_goal, fn_key, s1, env),
                                    terms(sigma, sk, s2, env)], out)
        if self.on("pairs"):
            for sigma, sk in wf_pool:
                for arg, used in terms(TProd(goal, sigma), f"pr({gkey}{sk})", inner, env):
                    out.append((Fst(arg), used))
                for arg, used in terms(TProd(sigma, goal), f"pr({sk}{gkey})", inner, env):
                    out.append((Snd(arg), used))
        if self.on("sums"):
            for scrut_ty, sk in wf_pool:
                if not isinstance(scrut_ty, TSum):
                    continue
                x1 = f"x{len(env.gamma)}"
                left_env = env.bind(x1, scrut_ty.left, self.key_of(scrut_ty.left))
                right_env = env.bind(x1, scrut_ty.right, self.key_of(scrut_ty.right))
                for s1, s2, s3 in self._splits(inner, 3):
                    self._combine(
                        lambda s, t1, t2: Case(s, x1, t1, x1, t2),
                        [terms(scrut_ty, sk, s1, env),
                         terms(goal, gkey, s2, left_env),
                         terms(goal, gkey, s3, right_env)], out)
        if isinstance(goal, TBool):
            for arg, used in terms(bool_t, bool_k, inner, env):
                out.append((Not(arg), used))
            if self.on("int"):
                for s1, s2 in self._splits(inner, 2):
                    self._combine(IntEq, [terms(int_t, int_k, s1, env),
                                          terms(int_t, int_k, s2, env)], out)
        if self.on("systemF"):
            for forall_ty, fk in wf_pool:
                if not isinstance(forall_ty, TForall):
                    continue
                for sigma, _ in wf_pool:
                    inst = subst_type_in_type(forall_ty.body, sigma, forall_ty.var)
                    if alpha_key(inst) == gkey:
                        for fn, used in terms(forall_ty, fk, inner, env):
                            out.append((TyApp(fn, sigma), used))
        if self.on("existential"):
            goal_ftv = free_type_vars(goal)
            for ex_ty, ek in wf_pool:
                if not isinstance(ex_ty, TExists):
                    continue
                a = fresh_name(ex_ty.var, env.delta | goal_ftv)
                x = f"x{len(env.gamma)}"
                opened = subst_type_in_type(ex_ty.body, TVar(a), ex_ty.var)
                inner_env = env.tbind(a).bind(x, opened, alpha_key(opened))
                for s1, s2 in self._splits(inner, 2):
                    packs = terms(ex_ty, ek, s1, env)
                    bodies = terms(goal, gkey, s2, inner_env)
                    self._combine(lambda p, b: Unpack(a, x, p, b), [packs, bodies], out)
        if self.on("mu"):
            for mu_ty, mk in wf_pool:
                if not isinstance(mu_ty, TMu):
                    continue
                unrolled = subst_type_in_type(mu_ty.body, mu_ty, mu_ty.var)
                if alpha_key(unrolled) == gkey:
                    for arg, used in terms(mu_ty, mk, inner, env):
                        out.append((Unfold(arg), used))
        if self.on("ref"):
            ref_goal = TRef(goal)
            ref_key = f"rf({gkey})"
            for arg, used in terms(ref_goal, ref_key, inner, env):
                out.append((Deref(arg), used))
            for s1, s2 in self._splits(inner, 2):
                self._combine(Assign, [terms(ref_goal, ref_key, s1, env),
                                       terms(goal, gkey, s2, env)], out)


# ---------------------------------------------------------------------------
# Distinguishing-context search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distinction:
    context: Term
    size: int
    lhs: Term
    rhs: Term

    def render(self) -> str:
        return (f"DISTINGUISHED size={self.size} ctx={print_term(self.context)} "
                f"lhs={print_term(self.lhs)} rhs={print_term(self.rhs)}")


def distinguish(
    e1: Term,
    e2: Term,
    ct: ContextTyping,
    size_bound: int,
    fuel: int,
    level: Level | None = None,
) -> tuple[Verdict, Distinction | None]:
    """Search for a context making the two plugs evaluate to different
    observable results.  Refutations are sound; absence is bounds-relative.
    """
    if level is None:
        level = implied_level(e1, e2, ct.hole_type, ct.result_type, *ct.hole_gamma.values())
    bounds = Bounds(fuel=fuel, ctx_size=size_bound)
    watch_divergence = level.enables("mu") or level.enables("ref")
    for context in enumerate_contexts(ct, size_bound, level):
        r1 = eval_star(Config({}, plug(context, e1)), fuel, make_allocator("seq"),
                       detect_cycles=watch_divergence)
        r2 = eval_star(Config({}, plug(context, e2)), fuel, make_allocator("seq"),
                       detect_cycles=watch_divergence)
        if isinstance(r1, Value) and isinstance(r2, Value):
            if not alpha_eq(r1.value, r2.value):
                d = Distinction(context, term_size(context), r1.value, r2.value)
                return disproven(bounds, print_term(context), note="observable difference"), d
        elif watch_divergence:
            # a value on one side against a certified cycle on the other is
            # a termination-behavior distinction; fuel exhaustion alone is not
            diverged1 = isinstance(r1, FuelExhausted) and r1.cycle is not None
            diverged2 = isinstance(r2, FuelExhausted) and r2.cycle is not None
            if (isinstance(r1, Value) and diverged2) or (isinstance(r2, Value) and diverged1):
                lhs = r1.value if isinstance(r1, Value) else r1.last.expr
                rhs = r2.value if isinstance(r2, Value) else r2.last.expr
                d = Distinction(context, term_size(context), lhs, rhs)
                return disproven(bounds, print_term(context), note="termination difference"), d
    return up_to_bounds(bounds, note=f"NO-CONTEXT bound={size_bound} fuel={fuel}"), None


# ---------------------------------------------------------------------------
# Type-directed generation
# ---------------------------------------------------------------------------


class GenerationFailed(Exception):
    pass


_INT_POOL = (0, 1, 2, -1)


def gen_type(level: Level, size: int, seed: int) -> Type:
    """A random closed type at the given level, biased toward base types."""
    rng = random.Random(seed)

    def go(budget: int) -> Type:
        opts: list = [lambda: TBool()]
        if level.enables("int"):
            opts.append(lambda: TInt())
        if budget > 1:
            opts.append(lambda: TArrow(go(budget // 2), go(budget // 2)))
            if level.enables("pairs"):
                opts.append(lambda: TProd(go(budget // 2), go(budget // 2)))
            if level.enables("sums"):
                opts.append(lambda: TSum(go(budget // 2), go(budget // 2)))
            if level.enables("ref"):
                opts.append(lambda: TRef(go(budget - 1)))
            if level.enables("systemF"):
                opts.append(lambda: TForall("a", TArrow(TVar("a"), TVar("a"))))
                opts.append(lambda: TForall("a", TArrow(TVar("a"), TBool())))
            if level.enables("existential"):
                opts.append(lambda: TExists("a", TProd(TVar("a"), TArrow(TVar("a"), go(budget // 2)))))
            if level.enables("mu"):
                opts.append(lambda: TMu("a", TSum(TBool(), TVar("a"))))
                opts.append(lambda: TMu("a", TSum(go(budget // 2), TProd(TBool(), TVar("a")))))
        return rng.choice(opts)()

    return go(max(size, 1))


def gen_well_typed(
    level: Level,
    delta: frozenset[str],
    gamma: dict[str, Type],
    tau: Type,
    size: int,
    seed: int,
) -> Term:
    """A term with  delta; gamma |- e : tau  and at most ``size``
    constructors, deterministic per seed.

    Raises GenerationFailed when no inhabitant is found within the size
    bound (e.g. a bare type variable with nothing of that type in scope).
    """
    rng = random.Random(seed)
    counter = [0]

    def fresh(prefix: str) -> str:
        counter[0] += 1
        return f"{prefix}{counter[0]}"

    def canonical(delta, gamma, tau: Type, mu_depth: int) -> Term:
        match tau:
            case TBool():
                return TrueLit()
            case TInt():
                if not level.enables("int"):
                    raise GenerationFailed("Int outside level")
                return IntLit(0)
            case TArrow(d, c):
                x = fresh("x")
                return Lam(x, d, canonical(delta, {**gamma, x: d}, c, mu_depth))
            case TProd(l, r):
                return Pair(canonical(delta, gamma, l, mu_depth),
                            canonical(delta, gamma, r, mu_depth))
            case TSum(l, r):
                try:
                    return Inl(canonical(delta, gamma, l, mu_depth), tau)
                except GenerationFailed:
                    return Inr(canonical(delta, gamma, r, mu_depth), tau)
            case TForall(a, b):
                a2 = fresh_name(a, delta)
                body_ty = subst_type_in_type(b, TVar(a2), a)
                return TyLam(a2, canonical(delta | {a2}, gamma, body_ty, mu_depth))
            case TExists(a, b):
                w: Type = TBool()
                return Pack(w, canonical(delta, gamma, subst_type_in_type(b, w, a), mu_depth), tau)
            case TMu(a, b):
                if mu_depth > 2:
                    raise GenerationFailed("recursive type too deep")
                unfolded = subst_type_in_type(b, tau, a)
                return Fold(canonical(delta, gamma, unfolded, mu_depth + 1), tau)
            case TRef(t):
                return Alloc(canonical(delta, gamma, t, mu_depth))
            case TVar(a):
                for x, t in gamma.items():
                    if isinstance(t, TVar) and t.name == a:
                        return Var(x)
                raise GenerationFailed(f"no candidate for type variable {a}")
        raise GenerationFailed(f"cannot inhabit {tau!r}")

    def arg_types(gamma) -> list[Type]:
        pool: list[Type] = [TBool()]
        if level.enables("int"):
            pool.append(TInt())
        for t in gamma.values():
            pool.append(t)
        return pool

    def go(delta, gamma, tau: Type, budget: int) -> Term:
        if budget <= 1:
            choices = [x for x, t in gamma.items() if alpha_eq(t, tau)]
            if choices and rng.random() < 0.7:
                return Var(rng.choice(choices))
            return canonical(delta, gamma, tau, 0)

        producers = []

        def add(weight: int, thunk) -> None:
            producers.extend([thunk] * weight)

        candidates = [x for x, t in gamma.items() if alpha_eq(t, tau)]
        if candidates:
            add(2, lambda: Var(rng.choice(candidates)))
        add(3, lambda: intro(delta, gamma, tau, budget))
        add(1, lambda: If(go(delta, gamma, TBool(), budget // 3),
                          go(delta, gamma, tau, budget // 3),
                          go(delta, gamma, tau, budget // 3)))

        def beta_redex():
            d = rng.choice(arg_types(gamma))
            x = fresh("x")
            return App(Lam(x, d, go(delta, {**gamma, x: d}, tau, budget // 2)),
                       go(delta, gamma, d, budget // 2))

        add(2, beta_redex)

        def app_elim():
            d = rng.choice(arg_types(gamma))
            return App(go(delta, gamma, TArrow(d, tau), budget // 2),
                       go(delta, gamma, d, budget // 2))

        add(1, app_elim)
        if level.enables("pairs"):
            def fst_elim():
                other = rng.choice(arg_types(gamma))
                return Fst(go(delta, gamma, TProd(tau, other), budget - 1))
            add(1, fst_elim)
        if level.enables("sums"):
            def case_elim():
                l = rng.choice(arg_types(gamma))
                r = rng.choice(arg_types(gamma))
                x = fresh("x")
                y = fresh("x")
                return Case(go(delta, gamma, TSum(l, r), budget // 3),
                            x, go(delta, {**gamma, x: l}, tau, budget // 3),
                            y, go(delta, {**gamma, y: r}, tau, budget // 3))
            add(1, case_elim)
        if level.enables("systemF"):
            def tybeta_redex():
                a = fresh_name("b", delta | free_type_vars(tau))
                body = go(delta | {a}, gamma, tau, budget - 1)
                return TyApp(TyLam(a, body), rng.choice([TBool(), TInt()]))
            add(1, tybeta_redex)
        if level.enables("ref"):
            add(1, lambda: Deref(go(delta, gamma, TRef(tau), budget - 1)))

            def assign_elim():
                return Assign(go(delta, gamma, TRef(tau), budget // 2),
                              go(delta, gamma, tau, budget // 2))
            add(1, assign_elim)
        if level.enables("existential"):
            def unpack_elim():
                a = fresh_name("a", delta | free_type_vars(tau))
                x = fresh("x")
                inner: Type = TBool()
                packed = go(delta, gamma, TExists(a, inner), budget // 2)
                body = go(delta | {a}, {**gamma, x: inner}, tau, budget // 2)
                return Unpack(a, x, packed, body)
            add(1, unpack_elim)
        if isinstance(tau, TBool):
            add(1, lambda: Not(go(delta, gamma, TBool(), budget - 1)))
            if level.enables("int"):
                add(1, lambda: IntEq(go(delta, gamma, TInt(), budget // 2),
                                     go(delta, gamma, TInt(), budget // 2)))

        rng.shuffle(producers)
        for produce in producers:
            try:
                return produce()
            except GenerationFailed:
                continue
        return canonical(delta, gamma, tau, 0)

    def intro(delta, gamma, tau: Type, budget: int) -> Term:
        match tau:
            case TBool():
                return rng.choice([TrueLit(), FalseLit()])
            case TInt():
                if not level.enables("int"):
                    raise GenerationFailed("Int outside level")
                return IntLit(rng.choice(_INT_POOL))
            case TArrow(d, c):
                x = fresh("x")
                return Lam(x, d, go(delta, {**gamma, x: d}, c, budget - 1))
            case TProd(l, r):
                if not level.enables("pairs"):
                    raise GenerationFailed("pairs outside level")
                return Pair(go(delta, gamma, l, budget // 2), go(delta, gamma, r, budget // 2))
            case TSum(l, r):
                if not level.enables("sums"):
                    raise GenerationFailed("sums outside level")
                side = rng.random() < 0.5
                try:
                    if side:
                        return Inl(go(delta, gamma, l, budget - 1), tau)
                    return Inr(go(delta, gamma, r, budget - 1), tau)
                except GenerationFailed:
                    if side:
                        return Inr(go(delta, gamma, r, budget - 1), tau)
                    return Inl(go(delta, gamma, l, budget - 1), tau)
            case TForall(a, b):
                if not level.enables("systemF"):
                    raise GenerationFailed("systemF outside level")
                a2 = fresh_name(a, delta)
                return TyLam(a2, go(delta | {a2}, gamma,
                                    subst_type_in_type(b, TVar(a2), a), budget - 1))
            case TExists(a, b):
                if not level.enables("existential"):
                    raise GenerationFailed("existential outside level")
                witness = rng.choice([TBool(), TInt()] if level.enables("int") else [TBool()])
                return Pack(witness, go(delta, gamma,
                                        subst_type_in_type(b, witness, a), budget - 1), tau)
            case TMu(a, b):
                if not level.enables("mu"):
                    raise GenerationFailed("mu outside level")
                return Fold(canonical(delta, gamma, subst_type_in_type(b, tau, a), 1), tau)
            case TRef(t):
                if not level.enables("ref"):
                    raise GenerationFailed("ref outside level")
                return Alloc(go(delta, gamma, t, budget - 1))
            case TVar(_):
                return canonical(delta, gamma, tau, 0)
        raise GenerationFailed(f"cannot introduce {tau!r}")

    delta = frozenset(delta)
    gamma = dict(gamma)
    bound = max(size, 1)
    for _ in range(20):
        out = go(delta, gamma, tau, bound)
        if term_size(out) <= bound:
            return out
    out = canonical(delta, gamma, tau, 0)
    if term_size(out) <= bound:
        return out
    raise GenerationFailed(f"no inhabitant of {print_type(tau)} within size {bound}")


def gen_closed_term(level: Level, size: int, seed: int) -> tuple[Term, Type]:
    """Sample a closed well-typed term together with its type."""
    rng = random.Random(seed)
    for attempt in range(50):
        tau = gen_type(level, max(2, size // 4), rng.randrange(1 << 30))
        try:
            term = gen_well_typed(level, frozenset(), {}, tau, size, rng.randrange(1 << 30))
        except GenerationFailed:
            continue
        return term, tau
    raise GenerationFailed(f"no term found for level {level} after 50 attempts")


# ---------------------------------------------------------------------------
# Value corpora
# ---------------------------------------------------------------------------

_CORPUS_CAP = 24


def gen_value_corpus(tau: Type, depth: int, seed: int) -> tuple[list[Term], bool]:
    """Closed values of type ``tau`` plus an exhaustiveness flag.

    Bool is exhaustive; products and sums of exhaustive components stay
    exhaustive while they fit the cap.  Int gets small literals plus the
    64-bit boundary sentinels.  Function and quantified types get a seeded
    sample, never exhaustive.
    """
    values, exhaustive = _corpus(tau, depth, seed)
    seen: dict[str, Term] = {}
    for v in values:
        seen.setdefault(alpha_key(v), v)
    out = list(seen.values())[:_CORPUS_CAP]
    if len(out) < len(seen):
        exhaustive = False
    return out, exhaustive


def _corpus(tau: Type, depth: int, seed: int) -> tuple[list[Term], bool]:
    match tau:
        case TBool():
            return [TrueLit(), FalseLit()], True
        case TInt():
            ints = [-2, -1, 0, 1, 2, -(2 ** 63), 2 ** 63 - 1]
            return [IntLit(n) for n in ints], False
        case TProd(l, r):
            lv, lex = _corpus(l, depth, seed)
            rv, rex = _corpus(r, depth, seed + 1)
            pairs = [Pair(a, b) for a in lv for b in rv]
            return pairs, lex and rex
        case TSum(l, r):
            lv, lex = _corpus(l, depth, seed)
            rv, rex = _corpus(r, depth, seed + 1)
            return ([Inl(a, tau) for a in lv] + [Inr(b, tau) for b in rv], lex and rex)
        case TArrow(d, c):
            return _arrow_corpus(tau, d, c, depth, seed), False
        case TForall(_, _) | TExists(_, _) | TMu(_, _):
            out = []
            level = implied_level(tau)
            for i in range(max(depth, 1) * 2):
                try:
                    v = gen_well_typed(level, frozenset(), {}, tau, depth + 2, seed + 17 * i)
                except GenerationFailed:
                    continue
                result = eval_star(Config({}, v), 500)
                if isinstance(result, Value):
                    out.append(result.value)
            return out, False
        case TRef(_) | TVar(_):
            return [], False  # no closed surface values of these types
    raise ValueError(f"no corpus for {tau!r}")


def _arrow_corpus(tau: TArrow, d: Type, c: Type, depth: int, seed: int) -> list[Term]:
    x = "x"
    out: list[Term] = []
    cod_vals, _ = _corpus(c, max(depth - 1, 0), seed + 2)
    cod_vals = cod_vals[:4]
    for v in cod_vals:
        out.append(Lam(x, d, v))  # constants
    if alpha_eq(d, c):
        out.append(Lam(x, d, Var(x)))  # identity
    if isinstance(d, TBool):
        for v1 in cod_vals:
            for v2 in cod_vals:
                if not alpha_eq(v1, v2):
                    out.append(Lam(x, d, If(Var(x), v1, v2)))
    if isinstance(d, TInt):
        for i, v1 in enumerate(cod_vals):
            for v2 in cod_vals[i + 1:]:
                out.append(Lam(x, d, If(IntEq(Var(x), IntLit(0)), v1, v2)))
    if depth >= 2:
        level = implied_level(tau)
        for i in range(3):
            try:
                body = gen_well_typed(level, frozenset(), {x: d}, c, depth + 1, seed + 31 * i)
            except GenerationFailed:
                continue
            out.append(Lam(x, d, body))
    return out

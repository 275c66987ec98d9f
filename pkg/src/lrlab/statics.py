"""Algorithmic typechecking for the judgment  Sigma; Delta; Gamma |- e : tau.

The checker is syntax-directed: annotations on inl/inr, fold, and pack
determine the introduced type, and type equality at rule boundaries is
alpha-equivalence.  A store typing Sigma assigns closed types to heap
locations so that configurations reached by evaluation stay checkable.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .kernel import (
    Alloc, App, Assign, Case, Deref, FalseLit, Fold, Hole, If, Inl, Inr,
    IntEq, IntLit, Lam, Loc, Not, Pack, Pair, Fst, Snd, Span, TArrow, TBool,
    TExists, TForall, TInt, TMu, TProd, TRef, TSum, TVar, Term, TrueLit,
    TyApp, TyLam, Type, Unfold, Unpack, Var, alpha_eq, fresh_name,
    free_type_vars, subst_type_in_term, subst_type_in_type,
)

TypeCtx = frozenset[str]
TermCtx = Mapping[str, Type]
StoreTyping = Mapping[int, Type]

EMPTY_STORE: StoreTyping = {}
EMPTY_TYPES: TypeCtx = frozenset()
EMPTY_TERMS: TermCtx = {}


class TypeCheckError(Exception):
    def __init__(self, message: str, rule: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.rule = rule
        self.span = span

    def __str__(self) -> str:
        where = f" at {self.span.line}:{self.span.col}" if self.span else ""
        return f"[{self.rule}]{where} {self.message}"


def wf_type(delta: TypeCtx, t: Type) -> bool:
    """Well-formedness amounts to the free type variables lying in Delta."""
    return free_type_vars(t) <= delta


def wf_ctx(delta: TypeCtx, gamma: TermCtx) -> bool:
    return all(wf_type(delta, t) for t in gamma.values())


def typecheck(
    sigma: StoreTyping,
    delta: TypeCtx,
    gamma: TermCtx,
    e: Term,
    on_hole: Callable[[TypeCtx, TermCtx, Term], Type] | None = None,
) -> Type:
    """Compute the unique type of ``e`` or raise ``TypeCheckError``.

    ``on_hole`` lets context typing treat ``Hole`` as an axiom; plain
    programs must not contain holes.
    """
    from .surface import print_type  # late import, avoids a module cycle

    def fail(msg: str, rule: str, at: Term) -> TypeCheckError:
        return TypeCheckError(msg, rule, at.span)

    def check_wf(delta: TypeCtx, t: Type, rule: str, at: Term) -> None:
        if not wf_type(delta, t):
            bad = sorted(free_type_vars(t) - delta)
            raise fail(f"type {print_type(t)} has unbound type variables {bad}", rule, at)

    def go(delta: TypeCtx, gamma: TermCtx, e: Term) -> Type:
        match e:
            case TrueLit() | FalseLit():
                return TBool()
            case IntLit(_):
                return TInt()
            case Var(x):
                if x not in gamma:
                    raise fail(f"unbound variable {x}", "var", e)
                return gamma[x]
            case If(c, t, o):
                tc = go(delta, gamma, c)
                if not isinstance(tc, TBool):
                    raise fail(f"if-condition has type {print_type(tc)}, expected Bool", "if", c)
                tt = go(delta, gamma, t)
                to = go(delta, gamma, o)
                if not alpha_eq(tt, to):
                    raise fail(
                        f"branches disagree: {print_type(tt)} vs {print_type(to)}", "if", e)
                return tt
            case Lam(x, annot, body):
                check_wf(delta, annot, "abs", e)
                return TArrow(annot, go(delta, {**gamma, x: annot}, body))
            case App(fn, arg):
                tf = go(delta, gamma, fn)
                if not isinstance(tf, TArrow):
                    raise fail(f"applied a non-function of type {print_type(tf)}", "app", fn)
                ta = go(delta, gamma, arg)
                if not alpha_eq(tf.dom, ta):
                    raise fail(
                        f"argument has type {print_type(ta)}, expected {print_type(tf.dom)}",
                        "app", arg)
                return tf.cod
            case Pair(l, r):
                return TProd(go(delta, gamma, l), go(delta, gamma, r))
            case Fst(a):
                tp = go(delta, gamma, a)
                if not isinstance(tp, TProd):
                    raise fail(f"fst of non-product {print_type(tp)}", "fst", a)
                return tp.left
            case Snd(a):
                tp = go(delta, gamma, a)
                if not isinstance(tp, TProd):
                    raise fail(f"snd of non-product {print_type(tp)}", "snd", a)
                return tp.right
            case Inl(a, annot):
                check_wf(delta, annot, "inl", e)
                if not isinstance(annot, TSum):
                    raise fail(f"inl annotation {print_type(annot)} is not a sum", "inl", e)
                ta = go(delta, gamma, a)
                if not alpha_eq(ta, annot.left):
                    raise fail(
                        f"inl payload has type {print_type(ta)}, expected {print_type(annot.left)}",
                        "inl", a)
                return annot
            case Inr(a, annot):
                check_wf(delta, annot, "inr", e)
                if not isinstance(annot, TSum):
                    raise fail(f"inr annotation {print_type(annot)} is not a sum", "inr", e)
                ta = go(delta, gamma, a)
                if not alpha_eq(ta, annot.right):
                    raise fail(
                        f"inr payload has type {print_type(ta)}, expected {print_type(annot.right)}",
                        "inr", a)
                return annot
            case Case(sc, x1, t1, x2, t2):
                ts = go(delta, gamma, sc)
                if not isinstance(ts, TSum):
                    raise fail(f"case scrutinee has type {print_type(ts)}, expected a sum", "case", sc)
                tl = go(delta, {**gamma, x1: ts.left}, t1)
                tr = go(delta, {**gamma, x2: ts.right}, t2)
                if not alpha_eq(tl, tr):
                    raise fail(
                        f"case branches disagree: {print_type(tl)} vs {print_type(tr)}", "case", e)
                return tl
            case TyLam(a, body):
                if a in delta:
                    # keep Delta's names distinct by renaming the binder
                    a2 = fresh_name(a, delta | free_type_vars(body))
                    body = subst_type_in_term(body, TVar(a2), a)
                    a = a2
                return TForall(a, go(delta | {a}, gamma, body))
            case TyApp(fn, annot):
                check_wf(delta, annot, "tyapp", e)
                tf = go(delta, gamma, fn)
                if not isinstance(tf, TForall):
                    raise fail(f"type application of non-universal {print_type(tf)}", "tyapp", fn)
                return subst_type_in_type(tf.body, annot, tf.var)
            case Pack(witness, payload, annot):
                check_wf(delta, witness, "pack", e)
                check_wf(delta, annot, "pack", e)
                if not isinstance(annot, TExists):
                    raise fail(f"pack annotation {print_type(annot)} is not existential", "pack", e)
                want = subst_type_in_type(annot.body, witness, annot.var)
                tp = go(delta, gamma, payload)
                if not alpha_eq(tp, want):
                    raise fail(
                        f"package payload has type {print_type(tp)}, expected {print_type(want)}",
                        "pack", payload)
                return annot
            case Unpack(a, x, packed, body):
                tp = go(delta, gamma, packed)
                if not isinstance(tp, TExists):
                    raise fail(f"unpacked a non-package of type {print_type(tp)}", "unpack", packed)
                if a in delta:
                    a2 = fresh_name(a, delta | free_type_vars(body))
                    body = subst_type_in_term(body, TVar(a2), a)
                    a = a2
                opened = subst_type_in_type(tp.body, TVar(a), tp.var)
                tb = go(delta | {a}, {**gamma, x: opened}, body)
                if a in free_type_vars(tb):
                    raise fail(
                        f"witness type variable {a} escapes the unpack scope in {print_type(tb)}",
                        "unpack-escape", e)
                return tb
            case Fold(a, annot):
                check_wf(delta, annot, "fold", e)
                if not isinstance(annot, TMu):
                    raise fail(f"fold annotation {print_type(annot)} is not recursive", "fold", e)
                want = subst_type_in_type(annot.body, annot, annot.var)
                ta = go(delta, gamma, a)
                if not alpha_eq(ta, want):
                    raise fail(
                        f"fold payload has type {print_type(ta)}, expected {print_type(want)}",
                        "fold", a)
                return annot
            case Unfold(a):
                ta = go(delta, gamma, a)
                if not isinstance(ta, TMu):
                    raise fail(f"unfold of non-recursive type {print_type(ta)}", "unfold", a)
                return subst_type_in_type(ta.body, ta, ta.var)
            case Alloc(a):
                return TRef(go(delta, gamma, a))
            case Assign(t, v):
                tt = go(delta, gamma, t)
                if not isinstance(tt, TRef):
                    raise fail(f"assignment target has type {print_type(tt)}, expected a Ref", "assign", t)
                tv = go(delta, gamma, v)
                if not alpha_eq(tv, tt.inner):
                    raise fail(
                        f"assigned {print_type(tv)} into a cell of {print_type(tt.inner)}",
                        "assign", v)
                return tv
            case Deref(a):
                ta = go(delta, gamma, a)
                if not isinstance(ta, TRef):
                    raise fail(f"dereferenced a non-reference of type {print_type(ta)}", "deref", a)
                return ta.inner
            case Loc(l):
                if l not in sigma:
                    raise fail(f"location #l{l} not covered by the store typing", "loc", e)
                return TRef(sigma[l])
            case IntEq(l, r):
                for side in (l, r):
                    ts = go(delta, gamma, side)
                    if not isinstance(ts, TInt):
                        raise fail(f"= compares {print_type(ts)}, expected Int", "eq", side)
                return TBool()
            case Not(a):
                ta = go(delta, gamma, a)
                if not isinstance(ta, TBool):
                    raise fail(f"not of {print_type(ta)}, expected Bool", "not", a)
                return TBool()
            case Hole():
                if on_hole is None:
                    raise fail("hole outside of a program context", "hole", e)
                return on_hole(delta, gamma, e)
            case _:
                raise fail(f"unhandled term {e!r}", "internal", e)

    return go(frozenset(delta), dict(gamma), e)


def typecheck_closed(e: Term, sigma: StoreTyping = EMPTY_STORE) -> Type:
    return typecheck(sigma, EMPTY_TYPES, EMPTY_TERMS, e)


def typechecks_at(e: Term, t: Type, sigma: StoreTyping = EMPTY_STORE) -> bool:
    try:
        return alpha_eq(typecheck_closed(e, sigma), t)
    except TypeCheckError:
        return False


def heap_well_typed(heap: Mapping[int, Term], sigma: StoreTyping) -> bool:
    """dom(h) = dom(Sigma) and every stored value checks at its assigned type."""
    if set(heap) != set(sigma):
        return False
    for l, v in heap.items():
        try:
            if not alpha_eq(typecheck(sigma, EMPTY_TYPES, EMPTY_TERMS, v), sigma[l]):
                return False
        except TypeCheckError:
            return False
    return True


def extend_store_typing(sigma: StoreTyping, heap: Mapping[int, Term]) -> StoreTyping:
    """Assign types to locations allocated since ``sigma`` was computed.

    A freshly stored value can only mention locations that already exist,
    so typechecking it under the extended-so-far store is well defined.
    """
    out = dict(sigma)
    for l in sorted(set(heap) - set(sigma)):
        out[l] = typecheck(out, EMPTY_TYPES, EMPTY_TERMS, heap[l])
    return out

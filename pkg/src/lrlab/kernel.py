"""Abstract syntax shared by every language level, plus the binding toolkit.

Terms and types are immutable trees of frozen dataclasses.  Structural
equality (``==``) is purely syntactic; the semantic notion of equality is
``alpha_eq``.  Binders are named; ``subst_term``/``subst_type`` rename a
binder on demand when it would capture a free name of the payload.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union


@dataclass(frozen=True)
class Span:
    """Byte offsets into the source plus a 1-based line/column."""

    start: int
    end: int
    line: int
    col: int

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError("span start must not exceed end")


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Type:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class TBool(Type):
    pass


@dataclass(frozen=True)
class TInt(Type):
    pass


@dataclass(frozen=True)
class TArrow(Type):
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TProd(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TSum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TForall(Type):
    var: str
    body: Type


@dataclass(frozen=True)
class TExists(Type):
    var: str
    body: Type


@dataclass(frozen=True)
class TMu(Type):
    var: str
    body: Type


@dataclass(frozen=True)
class TRef(Type):
    inner: Type


@dataclass(frozen=True)
class TVar(Type):
    name: str


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class TrueLit(Term):
    pass


@dataclass(frozen=True)
class FalseLit(Term):
    pass


@dataclass(frozen=True)
class IntLit(Term):
    value: int


@dataclass(frozen=True)
class If(Term):
    cond: Term
    then: Term
    other: Term


@dataclass(frozen=True)
class Lam(Term):
    var: str
    annot: Type
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Fst(Term):
    arg: Term


@dataclass(frozen=True)
class Snd(Term):
    arg: Term


@dataclass(frozen=True)
class Inl(Term):
    arg: Term
    annot: Type  # the full sum type, keeps checking syntax-directed


@dataclass(frozen=True)
class Inr(Term):
    arg: Term
    annot: Type


@dataclass(frozen=True)
class Case(Term):
    scrutinee: Term
    left_var: str
    left_body: Term
    right_var: str
    right_body: Term


@dataclass(frozen=True)
class TyLam(Term):
    var: str
    body: Term


@dataclass(frozen=True)
class TyApp(Term):
    fn: Term
    annot: Type


@dataclass(frozen=True)
class Pack(Term):
    witness: Type
    payload: Term
    annot: Type  # the existential type being introduced


@dataclass(frozen=True)
class Unpack(Term):
    ty_var: str
    var: str
    packed: Term
    body: Term


@dataclass(frozen=True)
class Fold(Term):
    arg: Term
    annot: Type  # the recursive type being introduced


@dataclass(frozen=True)
class Unfold(Term):
    arg: Term


@dataclass(frozen=True)
class Alloc(Term):
    arg: Term


@dataclass(frozen=True)
class Assign(Term):
    target: Term
    value: Term


@dataclass(frozen=True)
class Deref(Term):
    arg: Term


@dataclass(frozen=True)
class Loc(Term):
    """A heap location.  Never produced by the parser; evaluation only."""

    loc: int


@dataclass(frozen=True)
class IntEq(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Term):
    arg: Term


@dataclass(frozen=True)
class Hole(Term):
    """The unique hole of a program context.  Not part of any level."""


Node = Union[Term, Type]


# ---------------------------------------------------------------------------
# Values and sizes
# ---------------------------------------------------------------------------


def is_value(e: Term) -> bool:
    match e:
        case TrueLit() | FalseLit() | IntLit() | Lam() | TyLam() | Loc():
            return True
        case Pair(left, right):
            return is_value(left) and is_value(right)
        case Inl(arg, _) | Inr(arg, _) | Fold(arg, _):
            return is_value(arg)
        case Pack(_, payload, _):
            return is_value(payload)
        case _:
            return False


def term_size(e: Term) -> int:
    """Number of term constructors; type annotations do not count."""
    return 1 + sum(term_size(c) for c in term_children(e))


def term_children(e: Term) -> tuple[Term, ...]:
    match e:
        case If(c, t, o):
            return (c, t, o)
        case Lam(_, _, b) | TyLam(_, b):
            return (b,)
        case App(f, a) | Assign(f, a) | IntEq(f, a) | Pair(f, a):
            return (f, a)
        case Fst(a) | Snd(a) | Inl(a, _) | Inr(a, _) | Fold(a, _) | Unfold(a):
            return (a,)
        case Alloc(a) | Deref(a) | Not(a) | TyApp(a, _):
            return (a,)
        case Case(s, _, l, _, r):
            return (s, l, r)
        case Pack(_, p, _):
            return (p,)
        case Unpack(_, _, p, b):
            return (p, b)
        case _:
            return ()


# ---------------------------------------------------------------------------
# Free names
# ---------------------------------------------------------------------------


def free_vars(e: Term) -> frozenset[str]:
    match e:
        case Var(x):
            return frozenset({x})
        case Lam(x, _, body):
            return free_vars(body) - {x}
        case Case(s, x1, t1, x2, t2):
            return free_vars(s) | (free_vars(t1) - {x1}) | (free_vars(t2) - {x2})
        case Unpack(_, x, packed, body):
            return free_vars(packed) | (free_vars(body) - {x})
        case _:
            out: frozenset[str] = frozenset()
            for c in term_children(e):
                out |= free_vars(c)
            return out


def free_type_vars(node: Node) -> frozenset[str]:
    if isinstance(node, Type):
        match node:
            case TVar(a):
                return frozenset({a})
            case TArrow(d, c):
                return free_type_vars(d) | free_type_vars(c)
            case TProd(l, r) | TSum(l, r):
                return free_type_vars(l) | free_type_vars(r)
            case TForall(a, b) | TExists(a, b) | TMu(a, b):
                return free_type_vars(b) - {a}
            case TRef(t):
                return free_type_vars(t)
            case _:
                return frozenset()
    match node:
        case Lam(_, annot, body):
            return free_type_vars(annot) | free_type_vars(body)
        case Inl(arg, annot) | Inr(arg, annot) | Fold(arg, annot):
            return free_type_vars(arg) | free_type_vars(annot)
        case TyLam(a, body):
            return free_type_vars(body) - {a}
        case TyApp(fn, annot):
            return free_type_vars(fn) | free_type_vars(annot)
        case Pack(witness, payload, annot):
            return free_type_vars(witness) | free_type_vars(payload) | free_type_vars(annot)
        case Unpack(a, _, packed, body):
            return free_type_vars(packed) | (free_type_vars(body) - {a})
        case _:
            out: frozenset[str] = frozenset()
            for c in term_children(node):
                out |= free_type_vars(c)
            return out


def is_closed(e: Term) -> bool:
    return not free_vars(e) and not free_type_vars(e)


def fresh_name(base: str, avoid: frozenset[str] | set[str]) -> str:
    """Smallest decorated variant of ``base`` not in ``avoid``."""
    if base not in avoid:
        return base
    root = base.rstrip("0123456789") or base
    n = 1
    while f"{root}{n}" in avoid:
        n += 1
    return f"{root}{n}"


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------


def subst_term(e: Term, v: Term, x: str) -> Term:
    """Capture-avoiding replacement of free occurrences of ``x`` by ``v``."""
    fv = free_vars(v)

    def go(e: Term) -> Term:
        match e:
            case Var(y):
                return v if y == x else e
            case Lam(y, annot, body):
                if y == x:
                    return e
                if y in fv:
                    y2 = fresh_name(y, fv | free_vars(body))
                    body = subst_term(body, Var(y2), y)
                    return Lam(y2, annot, go(body))
                return Lam(y, annot, go(body))
            case Case(s, x1, t1, x2, t2):
                s2 = go(s)
                x1, t1 = _go_branch(x1, t1)
                x2, t2 = _go_branch(x2, t2)
                return Case(s2, x1, t1, x2, t2)
            case Unpack(a, y, packed, body):
                packed2 = go(packed)
                y, body = _go_branch(y, body)
                return Unpack(a, y, packed2, body)
            case _:
                return _map_term_children(e, go)

    def _go_branch(y: str, body: Term) -> tuple[str, Term]:
        if y == x:
            return y, body
        if y in fv:
            y2 = fresh_name(y, fv | free_vars(body))
            body = subst_term(body, Var(y2), y)
            return y2, go(body)
        return y, go(body)

    return go(e)


def subst_type_in_type(t: Type, repl: Type, a: str) -> Type:
    match t:
        case TVar(b):
            return repl if b == a else t
        case TArrow(d, c):
            return TArrow(subst_type_in_type(d, repl, a), subst_type_in_type(c, repl, a))
        case TProd(l, r):
            return TProd(subst_type_in_type(l, repl, a), subst_type_in_type(r, repl, a))
        case TSum(l, r):
            return TSum(subst_type_in_type(l, repl, a), subst_type_in_type(r, repl, a))
        case TRef(inner):
            return TRef(subst_type_in_type(inner, repl, a))
        case TForall(b, body) | TExists(b, body) | TMu(b, body):
            ctor = type(t)
            if b == a:
                return t
            if b in free_type_vars(repl):
                b2 = fresh_name(b, free_type_vars(repl) | free_type_vars(body))
                body = subst_type_in_type(body, TVar(b2), b)
                return ctor(b2, subst_type_in_type(body, repl, a))
            return ctor(b, subst_type_in_type(body, repl, a))
        case _:
            return t


def subst_type_in_term(e: Term, repl: Type, a: str) -> Term:
    def goty(t: Type) -> Type:
        return subst_type_in_type(t, repl, a)

    def go(e: Term) -> Term:
        match e:
            case Lam(x, annot, body):
                return Lam(x, goty(annot), go(body))
            case Inl(arg, annot):
                return Inl(go(arg), goty(annot))
            case Inr(arg, annot):
                return Inr(go(arg), goty(annot))
            case Fold(arg, annot):
                return Fold(go(arg), goty(annot))
            case TyApp(fn, annot):
                return TyApp(go(fn), goty(annot))
            case TyLam(b, body):
                if b == a:
                    return e
                if b in free_type_vars(repl):
                    b2 = fresh_name(b, free_type_vars(repl) | free_type_vars(body))
                    body = subst_type_in_term(body, TVar(b2), b)
                    return TyLam(b2, go(body))
                return TyLam(b, go(body))
            case Pack(witness, payload, annot):
                return Pack(goty(witness), go(payload), goty(annot))
            case Unpack(b, x, packed, body):
                packed2 = go(packed)
                if b == a:
                    return Unpack(b, x, packed2, body)
                if b in free_type_vars(repl):
                    b2 = fresh_name(b, free_type_vars(repl) | free_type_vars(body))
                    body = subst_type_in_term(body, TVar(b2), b)
                    return Unpack(b2, x, packed2, go(body))
                return Unpack(b, x, packed2, go(body))
            case _:
                return _map_term_children(e, go)

    return go(e)


def subst_type(node: Node, repl: Type, a: str) -> Node:
    """Capture-avoiding type substitution on a term or a type."""
    if isinstance(node, Type):
        return subst_type_in_type(node, repl, a)
    return subst_type_in_term(node, repl, a)


def apply_subst(e: Term, gamma: Mapping[str, Term]) -> Term:
    """Close ``e`` with a map of closed values, one binding at a time."""
    out = e
    for x, v in gamma.items():
        out = subst_term(out, v, x)
    return out


def _map_term_children(e: Term, f) -> Term:
    match e:
        case If(c, t, o):
            return If(f(c), f(t), f(o))
        case App(fn, a):
            return App(f(fn), f(a))
        case Pair(l, r):
            return Pair(f(l), f(r))
        case Fst(a):
            return Fst(f(a))
        case Snd(a):
            return Snd(f(a))
        case Inl(a, annot):
            return Inl(f(a), annot)
        case Inr(a, annot):
            return Inr(f(a), annot)
        case TyApp(fn, annot):
            return TyApp(f(fn), annot)
        case Fold(a, annot):
            return Fold(f(a), annot)
        case Unfold(a):
            return Unfold(f(a))
        case Alloc(a):
            return Alloc(f(a))
        case Assign(t, v):
            return Assign(f(t), f(v))
        case Deref(a):
            return Deref(f(a))
        case IntEq(l, r):
            return IntEq(f(l), f(r))
        case Not(a):
            return Not(f(a))
        case Pack(w, p, annot):
            return Pack(w, f(p), annot)
        case Lam(x, annot, b):
            return Lam(x, annot, f(b))
        case TyLam(a, b):
            return TyLam(a, f(b))
        case Case(s, x1, t1, x2, t2):
            return Case(f(s), x1, f(t1), x2, f(t2))
        case Unpack(a, x, p, b):
            return Unpack(a, x, f(p), f(b))
        case _:
            return e


# ---------------------------------------------------------------------------
# Alpha-equivalence
# ---------------------------------------------------------------------------


def alpha_eq(a: Node, b: Node) -> bool:
    """Equality up to consistent renaming of bound term and type names."""
    return _alpha_key_node(a) == _alpha_key_node(b)


def alpha_key(node: Node) -> str:
    """Canonical string, identical exactly for alpha-equivalent trees."""
    return _alpha_key_node(node)


def _alpha_key_node(node: Node) -> str:
    parts: list[str] = []
    _emit(node, {}, {}, parts)
    return "".join(parts)


def _emit(node: Node, tenv: dict[str, int], venv: dict[str, int], out: list[str]) -> None:
    # Bound names become binding depths; free names stay literal.
    if isinstance(node, Type):
        match node:
            case TBool():
                out.append("B;")
            case TInt():
                out.append("I;")
            case TVar(a):
                out.append(f"tv{tenv[a]};" if a in tenv else f"tf:{a};")
            case TArrow(d, c):
                out.append("ar(")
                _emit(d, tenv, venv, out)
                _emit(c, tenv, venv, out)
                out.append(")")
            case TProd(l, r):
                out.append("pr(")
                _emit(l, tenv, venv, out)
                _emit(r, tenv, venv, out)
                out.append(")")
            case TSum(l, r):
                out.append("su(")
                _emit(l, tenv, venv, out)
                _emit(r, tenv, venv, out)
                out.append(")")
            case TRef(t):
                out.append("rf(")
                _emit(t, tenv, venv, out)
                out.append(")")
            case TForall(a, b) | TExists(a, b) | TMu(a, b):
                tag = {"TForall": "all", "TExists": "ex", "TMu": "mu"}[type(node).__name__]
                out.append(f"{tag}(")
                _emit(b, {**tenv, a: len(tenv)}, venv, out)
                out.append(")")
        return

    def bind(x: str) -> dict[str, int]:
        return {**venv, x: len(venv)}

    def tbind(a: str) -> dict[str, int]:
        return {**tenv, a: len(tenv)}

    match node:
        case Var(x):
            out.append(f"v{venv[x]};" if x in venv else f"fv:{x};")
        case TrueLit():
            out.append("T;")
        case FalseLit():
            out.append("F;")
        case IntLit(n):
            out.append(f"i{n};")
        case Loc(l):
            out.append(f"l{l};")
        case Hole():
            out.append("H;")
        case If(c, t, o):
            out.append("if(")
            _emit(c, tenv, venv, out)
            _emit(t, tenv, venv, out)
            _emit(o, tenv, venv, out)
            out.append(")")
        case Lam(x, annot, body):
            out.append("lam(")
            _emit(annot, tenv, venv, out)
            _emit(body, tenv, bind(x), out)
            out.append(")")
        case App(f, a):
            out.append("ap(")
            _emit(f, tenv, venv, out)
            _emit(a, tenv, venv, out)
            out.append(")")
        case Pair(l, r):
            out.append("pa(")
            _emit(l, tenv, venv, out)
            _emit(r, tenv, venv, out)
            out.append(")")
        case Fst(a):
            out.append("f1(")
            _emit(a, tenv, venv, out)
            out.append(")")
        case Snd(a):
            out.append("f2(")
            _emit(a, tenv, venv, out)
            out.append(")")
        case Inl(a, annot):
            out.append("il(")
            _emit(a, tenv, venv, out)
            _emit(annot, tenv, venv, out)
            out.append(")")
        case Inr(a, annot):
            out.append("ir(")
            _emit(a, tenv, venv, out)
            _emit(annot, tenv, venv, out)
            out.append(")")
        case Case(s, x1, t1, x2, t2):
            out.append("ca(")
            _emit(s, tenv, venv, out)
            _emit(t1, tenv, bind(x1), out)
            _emit(t2, tenv, bind(x2), out)
            out.append(")")
        case TyLam(a, body):
            out.append("tl(")
            _emit(body, tbind(a), venv, out)
            out.append(")")
        case TyApp(f, annot):
            out.append("ta(")
            _emit(f, tenv, venv, out)
            _emit(annot, tenv, venv, out)
            out.append(")")
        case Pack(w, p, annot):
            out.append("pk(")
            _emit(w, tenv, venv, out)
            _emit(p, tenv, venv, out)
            _emit(annot, tenv, venv, out)
            out.append(")")
        case Unpack(a, x, p, body):
            out.append("up(")
            _emit(p, tenv, venv, out)
            _emit(body, tbind(a), {**venv, x: len(venv)}, out)
            out.append(")")
        case Fold(a, annot):
            out.append("fo(")
            _emit(a, tenv, venv, out)
            _emit(annot, tenv, venv, out)
            out.append(")")
        case Unfold(a):
            out.append("uf(")
            _emit(a, tenv, venv, out)
            out.append(")")
        case Alloc(a):
            out.append("al(")
            _emit(a, tenv, venv, out)
            out.append(")")
        case Assign(t, v):
            out.append("as(")
            _emit(t, tenv, venv, out)
            _emit(v, tenv, venv, out)
            out.append(")")
        case Deref(a):
            out.append("de(")
            _emit(a, tenv, venv, out)
            out.append(")")
        case IntEq(l, r):
            out.append("eq(")
            _emit(l, tenv, venv, out)
            _emit(r, tenv, venv, out)
            out.append(")")
        case Not(a):
            out.append("no(")
            _emit(a, tenv, venv, out)
            out.append(")")
        case _:
            raise AssertionError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Language levels
# ---------------------------------------------------------------------------

FEATURES = ("base", "pairs", "sums", "int", "systemF", "existential", "mu", "ref")


@dataclass(frozen=True)
class Level:
    features: frozenset[str]

    def __post_init__(self) -> None:
        unknown = self.features - set(FEATURES)
        if unknown:
            raise ValueError(f"unknown level features: {sorted(unknown)}")

    def enables(self, feature: str) -> bool:
        return feature == "base" or feature in self.features

    def __str__(self) -> str:
        return "+".join(f for f in FEATURES if f in self.features)


def level_of(*features: str) -> Level:
    return Level(frozenset(features) | {"base"})


LEVEL_PRESETS: dict[str, Level] = {
    "base": level_of(),
    "stlc": level_of("pairs", "sums", "int"),
    "sysf": level_of("pairs", "sums", "int", "systemF"),
    "exists": level_of("pairs", "sums", "int", "systemF", "existential"),
    "mu": level_of("pairs", "sums", "int", "mu"),
    "ref": level_of("pairs", "sums", "int", "ref"),
    "full": level_of(*FEATURES),
}

FULL_LEVEL = LEVEL_PRESETS["full"]


def resolve_level(name: str) -> Level:
    """A preset name or a '+'-joined feature list, e.g. ``base+pairs``."""
    name = name.strip()
    if name in LEVEL_PRESETS:
        return LEVEL_PRESETS[name]
    return level_of(*[p.strip() for p in name.split("+") if p.strip() and p.strip() != "base"])


_TERM_FEATURE: dict[type, str] = {
    Var: "base", TrueLit: "base", FalseLit: "base", If: "base", Lam: "base",
    App: "base", Not: "base",
    Pair: "pairs", Fst: "pairs", Snd: "pairs",
    Inl: "sums", Inr: "sums", Case: "sums",
    IntLit: "int", IntEq: "int",
    TyLam: "systemF", TyApp: "systemF",
    Pack: "existential", Unpack: "existential",
    Fold: "mu", Unfold: "mu",
    Alloc: "ref", Assign: "ref", Deref: "ref", Loc: "ref",
}

_TYPE_FEATURE: dict[type, str] = {
    TBool: "base", TArrow: "base",
    TProd: "pairs", TSum: "sums", TInt: "int",
    TForall: "systemF", TExists: "existential", TMu: "mu", TRef: "ref",
}


def required_features(node: Node) -> frozenset[str]:
    out: set[str] = set()
    for sub in iter_nodes(node):
        if isinstance(sub, Type):
            if isinstance(sub, TVar):
                continue  # legal under any binder-introducing feature
            out.add(_TYPE_FEATURE[type(sub)])
        elif not isinstance(sub, Hole):
            out.add(_TERM_FEATURE[type(sub)])
    return frozenset(out) - {"base"}


def level_check(e: Node, level: Level) -> bool:
    return all(level.enables(f) for f in required_features(e))


def implied_level(*nodes: Node) -> Level:
    feats: set[str] = set()
    for n in nodes:
        feats |= required_features(n)
    return level_of(*feats)


def iter_nodes(node: Node) -> Iterator[Node]:
    """All term and type nodes of a tree, annotations included."""
    yield node
    if isinstance(node, Type):
        match node:
            case TArrow(d, c):
                yield from iter_nodes(d)
                yield from iter_nodes(c)
            case TProd(l, r) | TSum(l, r):
                yield from iter_nodes(l)
                yield from iter_nodes(r)
            case TForall(_, b) | TExists(_, b) | TMu(_, b):
                yield from iter_nodes(b)
            case TRef(t):
                yield from iter_nodes(t)
        return
    match node:
        case Lam(_, annot, _) | Inl(_, annot) | Inr(_, annot) | Fold(_, annot) | TyApp(_, annot):
            yield from iter_nodes(annot)
        case Pack(witness, _, annot):
            yield from iter_nodes(witness)
            yield from iter_nodes(annot)
    for c in term_children(node):
        yield from iter_nodes(c)

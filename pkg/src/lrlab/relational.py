"""The binary logical relation for the polymorphic and existential fragment.

Universal clauses (arrows, type abstraction) instantiate only candidates
that are *provably* related, so a refutation is always genuine; the
existential clause can never refute, only succeed or report its catalog
exhausted.  Relational substitutions map each free type variable to two
closed types plus a finite relation between their values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .dynamics import Config, FuelExhausted, StuckResult, Value, eval_star, make_allocator
from .kernel import (
    App, FalseLit, Inl, Inr, IntLit, Lam, Pack, Pair, TArrow, TBool,
    TExists, TForall, TInt, TProd, TSum, TVar, Term, TrueLit, TyApp, TyLam,
    Type, Var, alpha_eq, alpha_key, free_type_vars, is_value, subst_term,
    subst_type_in_term, subst_type_in_type,
)
from .logrel import ValueCorpus
from .statics import TypeCheckError, typecheck_closed, typechecks_at
from .surface import print_term, print_type
from .verdict import (
    Bounds, Verdict, all_of, disproven, exists_of, proven, up_to_bounds,
)


@dataclass(frozen=True)
class FiniteRel:
    """A finite admissible relation: well-typed closed values on both sides."""

    left_type: Type
    right_type: Type
    pairs: tuple[tuple[Term, Term], ...]

    def __post_init__(self) -> None:
        for t in (self.left_type, self.right_type):
            if free_type_vars(t):
                raise ValueError(f"relation endpoint {print_type(t)} is not closed")
        for v1, v2 in self.pairs:
            if not (is_value(v1) and is_value(v2)):
                raise ValueError("relations may only contain values")
            if not typechecks_at(v1, self.left_type) or not typechecks_at(v2, self.right_type):
                raise ValueError(
                    f"pair ({print_term(v1)}, {print_term(v2)}) is not well typed at "
                    f"{print_type(self.left_type)} ~ {print_type(self.right_type)}")

    def contains(self, v1: Term, v2: Term) -> bool:
        key = (alpha_key(v1), alpha_key(v2))
        return any((alpha_key(a), alpha_key(b)) == key for a, b in self.pairs)

    def render(self) -> str:
        inside = "; ".join(f"({print_term(a)}, {print_term(b)})" for a, b in self.pairs)
        return (f"R : {print_type(self.left_type)} ~ {print_type(self.right_type)} "
                f"{{{inside}}}")


class RelSubst:
    """Maps type variables to (left type, right type, relation) triples."""

    def __init__(self, entries: Mapping[str, tuple[Type, Type, FiniteRel]] | None = None):
        self.entries: dict[str, tuple[Type, Type, FiniteRel]] = dict(entries or {})

    def extend(self, a: str, t1: Type, t2: Type, rel: FiniteRel) -> "RelSubst":
        return RelSubst({**self.entries, a: (t1, t2, rel)})

    def covers(self, tau: Type) -> bool:
        return free_type_vars(tau) <= set(self.entries)

    def rel(self, a: str) -> FiniteRel:
        return self.entries[a][2]

    def left(self, tau: Type) -> Type:
        out = tau
        for a, (t1, _, _) in self.entries.items():
            out = subst_type_in_type(out, t1, a)
        return out

    def right(self, tau: Type) -> Type:
        out = tau
        for a, (_, t2, _) in self.entries.items():
            out = subst_type_in_type(out, t2, a)
        return out

    def left_term(self, e: Term) -> Term:
        out = e
        for a, (t1, _, _) in self.entries.items():
            out = subst_type_in_term(out, t1, a)
        return out

    def right_term(self, e: Term) -> Term:
        out = e
        for a, (_, t2, _) in self.entries.items():
            out = subst_type_in_term(out, t2, a)
        return out


EMPTY_RHO = RelSubst()


# ---------------------------------------------------------------------------
# Relation catalogs
# ---------------------------------------------------------------------------

_MAX_GRAPH_FUNCTIONS = 8


@dataclass
class RelCatalog:
    """Finite stand-in for "all relations": identity on a corpus, singleton
    relations, graphs of corpus functions, and the empty relation."""

    corpus: ValueCorpus
    size: int = 16
    type_pool: Sequence[Type] = field(default_factory=lambda: (TBool(), TInt()))
    extra: list[FiniteRel] = field(default_factory=list)
    _cache: dict[tuple[str, str], list[FiniteRel]] = field(default_factory=dict)

    def with_extra(self, rels: Iterable[FiniteRel]) -> "RelCatalog":
        return RelCatalog(self.corpus, self.size, self.type_pool,
                          extra=list(self.extra) + list(rels))

    def relations_for(self, t1: Type, t2: Type) -> list[FiniteRel]:
        """Candidate relations between two closed types, supplied ones first."""
        key = (alpha_key(t1), alpha_key(t2))
        if key not in self._cache:
            self._cache[key] = self._build(t1, t2)
        supplied = [r for r in self.extra
                    if alpha_eq(r.left_type, t1) and alpha_eq(r.right_type, t2)]
        return supplied + self._cache[key]

    def _build(self, t1: Type, t2: Type) -> list[FiniteRel]:
        lv = self.corpus.values(t1)
        rv = self.corpus.values(t2)
        rels: list[FiniteRel] = []
        if alpha_eq(t1, t2):
            diag = tuple((v, v) for v in lv)
            rels.append(FiniteRel(t1, t2, diag))
        for v1 in lv[:4]:
            for v2 in rv[:4]:
                rels.append(FiniteRel(t1, t2, ((v1, v2),)))
        graphs = 0
        for f in self.corpus.values(TArrow(t1, t2)):
            if graphs >= _MAX_GRAPH_FUNCTIONS:
                break
            pairs = []
            for v in lv:
                out = eval_star(Config({}, App(f, v)), 500)
                if isinstance(out, Value):
                    pairs.append((v, out.value))
            try:
                rels.append(FiniteRel(t1, t2, tuple(pairs)))
                graphs += 1
            except ValueError:
                continue
        rels.append(FiniteRel(t1, t2, ()))  # stresses vacuous universal clauses
        return rels[: self.size]

    def triples(self) -> list[tuple[Type, Type, FiniteRel]]:
        """Type-pair/relation triples for instantiating universal clauses."""
        out: list[tuple[Type, Type, FiniteRel]] = []
        for r in self.extra:
            out.append((r.left_type, r.right_type, r))
        for t1 in self.type_pool:
            for t2 in self.type_pool:
                for r in self.relations_for(t1, t2):
                    out.append((t1, t2, r))
                    if len(out) >= self.size:
                        return out
        return out


# ---------------------------------------------------------------------------
# Membership checks
# ---------------------------------------------------------------------------


def related_value_pairs(
    tau: Type, rho: RelSubst, catalog: RelCatalog, corpus: ValueCorpus, fuel: int,
) -> tuple[list[tuple[Term, Term]], bool]:
    """Candidate pairs for the quantifier "for all related values at tau",
    plus a flag saying whether the candidates exhaust the relation."""
    match tau:
        case TVar(a):
            return list(rho.rel(a).pairs), True
        case TBool():
            return [(TrueLit(), TrueLit()), (FalseLit(), FalseLit())], True
        case TInt():
            return [(v, v) for v in corpus.values(TInt())], False
        case TProd(l, r):
            lp, lex = related_value_pairs(l, rho, catalog, corpus, fuel)
            rp, rex = related_value_pairs(r, rho, catalog, corpus, fuel)
            pairs = [(Pair(a1, b1), Pair(a2, b2)) for a1, a2 in lp for b1, b2 in rp]
            return pairs, lex and rex
        case TSum(l, r):
            lt1, lt2 = rho.left(tau), rho.right(tau)
            lp, lex = related_value_pairs(l, rho, catalog, corpus, fuel)
            rp, rex = related_value_pairs(r, rho, catalog, corpus, fuel)
            pairs = [(Inl(a1, lt1), Inl(a2, lt2)) for a1, a2 in lp]
            pairs += [(Inr(b1, lt1), Inr(b2, lt2)) for b1, b2 in rp]
            return pairs, lex and rex
        case TArrow(_, _) | TForall(_, _) | TExists(_, _):
            lv = corpus.values(rho.left(tau))[:4]
            rv = corpus.values(rho.right(tau))[:4]
            pairs = []
            for v1 in lv:
                for v2 in rv:
                    if v_rel_member((v1, v2), tau, rho, catalog, corpus, fuel).is_proven:
                        pairs.append((v1, v2))
            return pairs, False
    raise ValueError(f"no relational interpretation for {print_type(tau)}")


def v_rel_member(
    pair: tuple[Term, Term],
    tau: Type,
    rho: RelSubst,
    catalog: RelCatalog,
    corpus: ValueCorpus,
    fuel: int,
) -> Verdict:
    """Are two closed values related at ``tau`` under ``rho``?"""
    v1, v2 = pair
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, catalog=catalog.size)
    if not rho.covers(tau):
        raise ValueError(f"relational substitution does not cover {print_type(tau)}")
    # eager well-typedness side conditions
    for v, want in ((v1, rho.left(tau)), (v2, rho.right(tau))):
        if not is_value(v):
            return disproven(bounds, print_term(v), note="not a value")
        try:
            got = typecheck_closed(v)
        except TypeCheckError as exc:
            return disproven(bounds, print_term(v), note=f"ill-typed: {exc}")
        if not alpha_eq(got, want):
            return disproven(
                bounds, print_term(v),
                note=f"has type {print_type(got)}, expected {print_type(want)}")

    match tau:
        case TBool():
            same = (isinstance(v1, TrueLit) and isinstance(v2, TrueLit)) or (
                isinstance(v1, FalseLit) and isinstance(v2, FalseLit))
            if same:
                return proven(bounds)
            return disproven(bounds, f"({print_term(v1)}, {print_term(v2)})",
                             note="booleans differ")
        case TInt():
            if isinstance(v1, IntLit) and isinstance(v2, IntLit) and v1.value == v2.value:
                return proven(bounds)
            return disproven(bounds, f"({print_term(v1)}, {print_term(v2)})",
                             note="integers differ")
        case TVar(a):
            if rho.rel(a).contains(v1, v2):
                return proven(bounds)
            return disproven(bounds, f"({print_term(v1)}, {print_term(v2)})",
                             note=f"pair not in the relation chosen for {a}")
        case TProd(l, r):
            assert isinstance(v1, Pair) and isinstance(v2, Pair)
            return all_of(
                [v_rel_member((v1.left, v2.left), l, rho, catalog, corpus, fuel),
                 v_rel_member((v1.right, v2.right), r, rho, catalog, corpus, fuel)],
                bounds)
        case TSum(l, r):
            if isinstance(v1, Inl) and isinstance(v2, Inl):
                return v_rel_member((v1.arg, v2.arg), l, rho, catalog, corpus, fuel)
            if isinstance(v1, Inr) and isinstance(v2, Inr):
                return v_rel_member((v1.arg, v2.arg), r, rho, catalog, corpus, fuel)
            return disproven(bounds, f"({print_term(v1)}, {print_term(v2)})",
                             note="injections take different branches")
        case TArrow(dom, cod):
            assert isinstance(v1, Lam) and isinstance(v2, Lam)
            args, exhaustive = related_value_pairs(dom, rho, catalog, corpus, fuel)
            parts = []
            for a1, a2 in args:
                parts.append(e_rel_member(
                    (subst_term(v1.body, a1, v1.var), subst_term(v2.body, a2, v2.var)),
                    cod, rho, catalog, corpus, fuel))
            return all_of(parts, bounds, exhaustive=exhaustive)
        case TForall(a, body):
            assert isinstance(v1, TyLam) and isinstance(v2, TyLam)
            parts = []
            for t1, t2, rel in catalog.triples():
                rho2 = rho.extend(a, t1, t2, rel)
                parts.append(e_rel_member(
                    (subst_type_in_term(v1.body, t1, v1.var),
                     subst_type_in_term(v2.body, t2, v2.var)),
                    body, rho2, catalog, corpus, fuel))
            # the real quantifier spans all of Rel; a catalog never does
            return all_of(parts, bounds, exhaustive=False)
        case TExists(a, body):
            assert isinstance(v1, Pack) and isinstance(v2, Pack)
            w1, w2 = v1.witness, v2.witness
            attempts = []
            for rel in catalog.relations_for(w1, w2):
                rho2 = rho.extend(a, w1, w2, rel)
                attempts.append(v_rel_member(
                    (v1.payload, v2.payload), body, rho2, catalog, corpus, fuel))
            # an existential over all relations can be witnessed, never refuted
            return exists_of(attempts, bounds, exhausted_note="CatalogExhausted")
    raise ValueError(f"no relational interpretation for {print_type(tau)}")


def e_rel_member(
    pair: tuple[Term, Term],
    tau: Type,
    rho: RelSubst,
    catalog: RelCatalog,
    corpus: ValueCorpus,
    fuel: int,
) -> Verdict:
    """Both sides must converge to related values (a terminating fragment)."""
    e1, e2 = pair
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, catalog=catalog.size)
    for e, want in ((e1, rho.left(tau)), (e2, rho.right(tau))):
        try:
            got = typecheck_closed(e)
        except TypeCheckError as exc:
            return disproven(bounds, print_term(e), note=f"ill-typed: {exc}")
        if not alpha_eq(got, want):
            return disproven(bounds, print_term(e),
                             note=f"has type {print_type(got)}, expected {print_type(want)}")
    results = []
    for e in (e1, e2):
        r = eval_star(Config({}, e), fuel, make_allocator("seq"))
        if isinstance(r, StuckResult):
            return disproven(bounds, print_term(r.config.expr), note=f"stuck: {r.reason}")
        if isinstance(r, FuelExhausted):
            return up_to_bounds(bounds, note="fuel exhausted")
        results.append(r.value)
    return v_rel_member((results[0], results[1]), tau, rho, catalog, corpus, fuel)


_COMBO_CAP = 64


def log_equiv_check(
    delta: frozenset[str],
    gamma_ctx: Mapping[str, Type],
    e1: Term,
    e2: Term,
    tau: Type,
    catalog: RelCatalog,
    corpus: ValueCorpus,
    fuel: int,
) -> Verdict:
    """Logical equivalence of two open terms: close them off with every
    catalog-built relational substitution and corpus-built value pairs."""
    from .statics import typecheck

    bounds = Bounds(fuel=fuel, corpus=corpus.depth, catalog=catalog.size)
    for e in (e1, e2):
        try:
            got = typecheck({}, delta, dict(gamma_ctx), e)
        except TypeCheckError as exc:
            return disproven(bounds, print_term(e), note=f"ill-typed: {exc}")
        if not alpha_eq(got, tau):
            return disproven(bounds, print_term(e),
                             note=f"has type {print_type(got)}, expected {print_type(tau)}")

    rhos: list[RelSubst] = [EMPTY_RHO]
    for a in sorted(delta):
        rhos = [rho.extend(a, t1, t2, rel)
                for rho in rhos for t1, t2, rel in catalog.triples()]
        rhos = rhos[:_COMBO_CAP]

    parts = []
    exhaustive = not delta
    for rho in rhos:
        gammas: list[dict[str, tuple[Term, Term]]] = [{}]
        for x in sorted(gamma_ctx):
            pairs, ex = related_value_pairs(gamma_ctx[x], rho, catalog, corpus, fuel)
            exhaustive = exhaustive and ex
            gammas = [{**g, x: p} for g in gammas for p in pairs]
            gammas = gammas[:_COMBO_CAP]
        for gamma in gammas:
            lhs = rho.left_term(apply_pair_subst(e1, gamma, 0))
            rhs = rho.right_term(apply_pair_subst(e2, gamma, 1))
            sub = e_rel_member((lhs, rhs), tau, rho, catalog, corpus, fuel)
            if sub.is_disproven:
                return disproven(bounds, _closing_witness(rho, gamma, sub),
                                 note=sub.note)
            parts.append(sub)
    return all_of(parts, bounds, exhaustive=exhaustive)


def _closing_witness(rho: RelSubst, gamma: Mapping[str, tuple[Term, Term]], sub: Verdict) -> str:
    """Report which (rho, gamma) choice exposed the difference."""
    pieces = []
    for a, (t1, t2, rel) in rho.entries.items():
        pieces.append(f"{a} := ({print_type(t1)}, {print_type(t2)}, {rel.render()})")
    for x, (v1, v2) in gamma.items():
        pieces.append(f"{x} := ({print_term(v1)}, {print_term(v2)})")
    closing = "; ".join(pieces) if pieces else "empty substitutions"
    return f"[{closing}] {sub.witness or ''}".rstrip()


def apply_pair_subst(e: Term, gamma: Mapping[str, tuple[Term, Term]], side: int) -> Term:
    out = e
    for x, pair in gamma.items():
        out = subst_term(out, pair[side], x)
    return out


# ---------------------------------------------------------------------------
# Compositionality oracle
# ---------------------------------------------------------------------------


def graph_relation(
    tau: Type, rho: RelSubst, catalog: RelCatalog, corpus: ValueCorpus, fuel: int,
) -> FiniteRel:
    """The corpus approximation of the value relation at ``tau`` as a
    concrete finite relation between the two projected types."""
    pairs, _ = related_value_pairs(tau, rho, catalog, corpus, fuel)
    return FiniteRel(rho.left(tau), rho.right(tau), tuple(pairs))


def compositionality_oracle(
    tau: Type,
    tau_prime: Type,
    a: str,
    rho: RelSubst,
    sample_pairs: Sequence[tuple[Term, Term]],
    catalog: RelCatalog,
    corpus: ValueCorpus,
    fuel: int,
) -> Verdict:
    """Syntactic substitution into the type must agree with extending the
    relational substitution semantically.  Disagreement indicates an
    implementation bug, not a refutation of the theory."""
    bounds = Bounds(fuel=fuel, corpus=corpus.depth, catalog=catalog.size)
    rel = graph_relation(tau_prime, rho, catalog, corpus, fuel)
    rho_ext = rho.extend(a, rho.left(tau_prime), rho.right(tau_prime), rel)
    syntactic = subst_type_in_type(tau, tau_prime, a)
    for pair in sample_pairs:
        lhs = v_rel_member(pair, syntactic, rho, catalog, corpus, fuel)
        rhs = v_rel_member(pair, tau, rho_ext, catalog, corpus, fuel)
        if lhs.refuted != rhs.refuted:
            return disproven(
                bounds, f"({print_term(pair[0])}, {print_term(pair[1])})",
                note=f"sides disagree: {lhs.status} vs {rhs.status}")
    return proven(bounds, note=f"agreed on {len(sample_pairs)} pairs")


# ---------------------------------------------------------------------------
# Free-theorem runners
# ---------------------------------------------------------------------------

FREE_THEOREM_KINDS = ("identity", "constant", "constCrossType", "continuation")


def free_theorem_run(kind: str, e: Term, fuel: int = 10_000, **inst) -> Verdict:
    """Execute one free-theorem instance and compare results by evaluation.

    identity:        e : all a. a -> a,        e[tau] v  evaluates to v
    constant:        e : all a. a -> Bool,     e[tau] v1 and e[tau] v2 agree
    constCrossType:  e : all a. a -> Bool,     e[tau1] v1 and e[tau2] v2 agree
    continuation:    e : all a. (t -> a) -> a, e[tau_k] k  matches  k (e[tau] id)
    """
    bounds = Bounds(fuel=fuel, corpus=0)

    def run(term: Term) -> Term | Verdict:
        r = eval_star(Config({}, term), fuel, make_allocator("seq"))
        if isinstance(r, StuckResult):
            return disproven(bounds, print_term(r.config.expr), note=f"stuck: {r.reason}")
        if isinstance(r, FuelExhausted):
            return up_to_bounds(bounds, note="fuel exhausted")
        return r.value

    if kind == "identity":
        tau, v = inst["tau"], inst["value"]
        out = run(App(TyApp(e, tau), v))
        if isinstance(out, Verdict):
            return out
        if alpha_eq(out, v):
            return proven(bounds)
        return disproven(bounds, print_term(out), note="identity theorem violated")
    if kind == "constant":
        tau, v1, v2 = inst["tau"], inst["v1"], inst["v2"]
        outs = [run(App(TyApp(e, tau), v)) for v in (v1, v2)]
        return _compare_outputs(outs, bounds, "constant-function theorem violated")
    if kind == "constCrossType":
        outs = [run(App(TyApp(e, inst["tau1"]), inst["v1"])),
                run(App(TyApp(e, inst["tau2"]), inst["v2"]))]
        return _compare_outputs(outs, bounds, "cross-type constant theorem violated")
    if kind == "continuation":
        tau, tau_k, k = inst["tau"], inst["tau_k"], inst["k"]
        ident = Lam("x", tau, Var("x"))
        lhs = App(TyApp(e, tau_k), k)
        rhs = App(k, App(TyApp(e, tau), ident))
        if isinstance(tau_k, (TBool, TInt)):
            return _compare_outputs([run(lhs), run(rhs)], bounds,
                                    "continuation theorem violated")
        catalog = RelCatalog(inst.get("corpus") or ValueCorpus())
        return log_equiv_check(frozenset(), {}, lhs, rhs, tau_k,
                               catalog, catalog.corpus, fuel)
    raise ValueError(f"unknown free-theorem kind {kind!r}; expected one of {FREE_THEOREM_KINDS}")


def _compare_outputs(outs, bounds: Bounds, note: str) -> Verdict:
    for out in outs:
        if isinstance(out, Verdict):
            return out
    if alpha_eq(outs[0], outs[1]):
        return proven(bounds)
    return disproven(bounds, f"({print_term(outs[0])}, {print_term(outs[1])})", note=note)

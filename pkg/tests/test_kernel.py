"""Binding toolkit: substitution, alpha-equivalence, free names, levels."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrlab.kernel import (
    Case, Inl, Inr, Lam, LEVEL_PRESETS, TBool, TyLam, Unpack, Var,
    alpha_eq, alpha_key, free_type_vars, free_vars, implied_level, is_value,
    level_check, resolve_level, subst_term, subst_type, term_size,
)
from lrlab.equivalence import gen_well_typed
from lrlab.surface import parse_term, parse_type


def T(src):
    return parse_term(src)


def Ty(src):
    return parse_type(src)


# -- substitution ------------------------------------------------------------


def test_subst_variable_hit():
    assert subst_term(T("x"), T("true"), "x") == T("true")


def test_subst_under_unrelated_binder():
    got = subst_term(T("\\y:Bool. x"), T("true"), "x")
    assert alpha_eq(got, T("\\y:Bool. true"))


def test_subst_stops_at_shadowing_binder():
    got = subst_term(T("\\x:Bool. x"), T("true"), "x")
    assert alpha_eq(got, T("\\x:Bool. x"))


def test_subst_stops_at_shadowing_case_and_unpack_binders():
    e = T("case x of inl x => x | inr y => x")
    got = subst_term(e, T("true"), "x")
    # scrutinee and the non-shadowing branch substituted, shadowed branch kept
    assert alpha_eq(got, T("case true of inl x => x | inr y => true"))
    e2 = T("unpack <a, x> = x in x")
    got2 = subst_term(e2, T("true"), "x")
    assert alpha_eq(got2, T("unpack <a, x> = true in x"))


def test_subst_no_op_when_var_not_free():
    e = T("\\y:Bool. y")
    assert subst_term(e, T("false"), "zz") == e


def test_subst_type_arrow():
    assert alpha_eq(subst_type(Ty("a -> a"), Ty("Bool"), "a"), Ty("Bool -> Bool"))


def test_subst_type_shadowed_binder():
    assert alpha_eq(subst_type(Ty("all a. a"), Ty("Bool"), "a"), Ty("all a. a"))


def test_subst_type_mu_unfolding():
    mu = Ty("mu a. Bool + (Int * a)")
    body = Ty("Bool + (Int * a)")
    got = subst_type(body, mu, "a")
    assert alpha_eq(got, Ty("Bool + (Int * (mu a. Bool + (Int * a)))"))


def _simultaneous_subst(e, mapping):
    """Independent oracle: freshen every binder, then replace free names."""
    counter = itertools.count()

    def go(e, ren):
        match e:
            case Var(x):
                if x in ren:
                    return Var(ren[x])
                return mapping.get(x, e)
            case Lam(x, annot, body):
                x2 = f"_s{next(counter)}"
                return Lam(x2, annot, go(body, {**ren, x: x2}))
            case Case(s, x1, t1, x2, t2):
                f1, f2 = f"_s{next(counter)}", f"_s{next(counter)}"
                return Case(go(s, ren), f1, go(t1, {**ren, x1: f1}),
                            f2, go(t2, {**ren, x2: f2}))
            case Unpack(a, x, packed, body):
                x2 = f"_s{next(counter)}"
                return Unpack(a, x2, go(packed, ren), go(body, {**ren, x: x2}))
            case TyLam(a, body):
                return TyLam(a, go(body, ren))
            case _:
                from lrlab.kernel import _map_term_children
                return _map_term_children(e, lambda c: go(c, ren))

    return go(e, {})


@pytest.mark.parametrize("seed", range(40))
def test_sequential_matches_simultaneous_oracle(seed, corpus):
    # gamma[x -> v](e) must equal gamma(e[v/x]) for closed values
    tau = [Ty("Bool"), Ty("Int"), Ty("Bool -> Bool")][seed % 3]
    level = LEVEL_PRESETS["stlc"]
    e = gen_well_typed(level, frozenset(), {"x": Ty("Bool"), "y": tau}, Ty("Bool"),
                       14, seed)
    v = corpus.values(Ty("Bool"))[seed % 2]
    v2 = corpus.values(tau)[seed % len(corpus.values(tau))]
    oracle = _simultaneous_subst(e, {"x": v, "y": v2})
    seq_xy = subst_term(subst_term(e, v, "x"), v2, "y")
    seq_yx = subst_term(subst_term(e, v2, "y"), v, "x")
    assert alpha_eq(seq_xy, oracle)
    assert alpha_eq(seq_yx, oracle)


# -- alpha equivalence -------------------------------------------------------


def test_alpha_eq_forall():
    assert alpha_eq(Ty("all a. a -> a"), Ty("all b. b -> b"))
    assert not alpha_eq(Ty("all a. a -> a"), Ty("all a. a -> Bool"))


def test_alpha_eq_lambda():
    assert alpha_eq(T("\\x:Bool. x"), T("\\y:Bool. y"))
    assert not alpha_eq(T("\\x:Bool. x"), T("\\y:Bool. true"))


def test_alpha_eq_free_vars_stay_distinct():
    assert not alpha_eq(T("x"), T("y"))
    assert alpha_eq(T("x"), T("x"))


names = st.sampled_from(["x", "y", "z"])


@st.composite
def small_terms(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from([T("true"), T("false"), Var(draw(names))]))
    kind = draw(st.integers(0, 2))
    if kind == 0:
        return Lam(draw(names), TBool(), draw(small_terms(depth - 1)))
    if kind == 1:
        from lrlab.kernel import App
        return App(draw(small_terms(depth - 1)), draw(small_terms(depth - 1)))
    from lrlab.kernel import If
    return If(draw(small_terms(depth - 1)), draw(small_terms(depth - 1)),
              draw(small_terms(depth - 1)))


@settings(max_examples=120, deadline=None)
@given(small_terms(), small_terms(), small_terms())
def test_alpha_eq_is_an_equivalence(a, b, c):
    assert alpha_eq(a, a)
    assert alpha_eq(a, b) == alpha_eq(b, a)
    if alpha_eq(a, b) and alpha_eq(b, c):
        assert alpha_eq(a, c)


@settings(max_examples=80, deadline=None)
@given(small_terms())
def test_subst_respects_alpha_and_noop(e):
    if "x" not in free_vars(e):
        assert alpha_eq(subst_term(e, T("true"), "x"), e)
    renamed = subst_term(Lam("x", TBool(), e), T("true"), "q")
    assert alpha_eq(renamed, Lam("x", TBool(), subst_term(e, T("true"), "q")))


# -- free names --------------------------------------------------------------


def test_free_type_vars():
    assert free_type_vars(Ty("mu a. Bool + (Int * a)")) == frozenset()
    assert free_type_vars(Ty("a -> b")) == {"a", "b"}


def test_free_vars_unpack_binder_removed():
    e = T("unpack <a, p> = q in (snd p) (fst p)")
    assert free_vars(e) == {"q"}
    inner = T("unpack <a, p> = q in (snd p) (fst w)")
    assert free_vars(inner) == {"q", "w"}


def test_free_vars_case_branches():
    e = T("case s of inl x => x | inr y => z")
    assert free_vars(e) == {"s", "z"}


# -- values, sizes, levels ---------------------------------------------------


def test_is_value():
    assert is_value(T("\\x:Bool. x"))
    assert is_value(T("<true, 3>"))
    assert is_value(T("fold true as mu a. Bool"))
    assert is_value(T("pack <Int, 1> as ex a. a"))
    assert not is_value(T("fst <true, false>"))
    assert not is_value(T("(\\x:Bool. x) true"))


def test_term_size_counts_constructors():
    assert term_size(T("true")) == 1
    assert term_size(T("f x y")) == 5
    assert term_size(T("\\x:Bool. x")) == 2  # annotations do not count


def test_level_check():
    stlc = LEVEL_PRESETS["stlc"]
    assert level_check(T("<1, true>"), stlc)
    assert not level_check(T("ref true"), stlc)
    assert not level_check(T("/\\a. \\x:a. x"), stlc)
    assert level_check(T("/\\a. \\x:a. x"), LEVEL_PRESETS["sysf"])


def test_implied_level_and_resolve():
    lvl = implied_level(T("fold true as mu a. Bool"))
    assert lvl.enables("mu") and not lvl.enables("ref")
    assert resolve_level("base+pairs").enables("pairs")
    assert resolve_level("full").enables("existential")
    with pytest.raises(ValueError):
        resolve_level("base+warp")


def test_alpha_key_distinguishes_annotations():
    assert alpha_key(Inl(T("true"), Ty("Bool + Int"))) != alpha_key(
        Inr(T("true"), Ty("Bool + Int")))
    assert alpha_key(T("\\x:Bool. x")) == alpha_key(T("\\y:Bool. y"))

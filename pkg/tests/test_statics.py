"""Typechecker: golden judgments, weakening, heap typing, store extension."""

import pytest

from lrlab import demos
from lrlab.dynamics import Config, Stepped, step
from lrlab.kernel import Loc, TBool, TInt, TRef, alpha_eq
from lrlab.statics import (
    TypeCheckError, extend_store_typing, heap_well_typed, typecheck,
    typecheck_closed, wf_ctx, wf_type,
)
from lrlab.surface import parse_term, parse_type


def T(src):
    return parse_term(src)


def Ty(src):
    return parse_type(src)


def test_wf_type():
    assert wf_type(frozenset(), Ty("all a. a -> a"))
    assert not wf_type(frozenset(), Ty("a"))
    assert wf_type(frozenset({"a"}), Ty("a * (a -> Bool)"))


def test_wf_ctx():
    assert wf_ctx(frozenset({"a"}), {"x": Ty("a")})
    assert not wf_ctx(frozenset(), {"x": Ty("a")})
    assert wf_ctx(frozenset(), {})


def test_golden_package_typings():
    want = Ty("ex a. a * (a -> Bool)")
    assert alpha_eq(typecheck_closed(demos.package_int()), want)
    assert alpha_eq(typecheck_closed(demos.package_bool()), want)
    assert alpha_eq(typecheck_closed(demos.package_int_variant()), want)


def test_golden_omega_typing():
    assert alpha_eq(typecheck_closed(demos.self_app()),
                    Ty("(mu a. a -> a) -> (mu a. a -> a)"))
    assert alpha_eq(typecheck_closed(demos.self_app_diverging()), Ty("mu a. a -> a"))


def test_golden_knot_typing():
    assert isinstance(typecheck_closed(demos.knot()), TInt)


def test_leaking_unpack_rejected():
    bad = T("unpack <a, p> = pack <Int, <1, \\x:Int. x = 0>> as ex a. a * (a -> Bool)"
            " in (snd p) 5")
    with pytest.raises(TypeCheckError) as info:
        typecheck_closed(bad)
    assert info.value.rule == "app"


def test_unpack_escape_flagged_specifically():
    bad = T("unpack <a, p> = pack <Int, <1, \\x:Int. x = 0>> as ex a. a * (a -> Bool)"
            " in fst p")
    with pytest.raises(TypeCheckError) as info:
        typecheck_closed(bad)
    assert info.value.rule == "unpack-escape"


def test_error_carries_span_and_rule():
    with pytest.raises(TypeCheckError) as info:
        typecheck_closed(T("if 1 then true else false"))
    assert info.value.rule == "if"
    assert info.value.span is not None


def test_branch_mismatch():
    with pytest.raises(TypeCheckError):
        typecheck_closed(T("if true then 1 else false"))


def test_annotation_must_be_well_formed():
    with pytest.raises(TypeCheckError):
        typecheck_closed(T("\\x:a. x"))


def test_location_rule():
    sigma = {0: TBool()}
    assert alpha_eq(typecheck(sigma, frozenset(), {}, Loc(0)), TRef(TBool()))
    with pytest.raises(TypeCheckError):
        typecheck({}, frozenset(), {}, Loc(0))


def test_assignment_result_is_assigned_value():
    t = typecheck_closed(T("(\\r:Ref Int. r := 7) (ref 0)"))
    assert isinstance(t, TInt)


def test_shadowing_type_binders():
    # typeable even with a reused type-variable name
    t = typecheck_closed(T("/\\a. /\\a. \\x:a. x"))
    from lrlab.kernel import TForall
    assert isinstance(t, TForall) and isinstance(t.body, TForall)


@pytest.mark.parametrize("seed", range(30))
def test_weakening(seed, stlc_terms):
    term, tau = stlc_terms[seed]
    extra = {"weak_extra": Ty("Bool"), "weak_extra2": Ty("Int -> Int")}
    got = typecheck({}, frozenset(), extra, term)
    assert alpha_eq(got, tau)


def test_heap_well_typed():
    assert heap_well_typed({}, {})
    assert heap_well_typed({0: T("true")}, {0: TBool()})
    assert not heap_well_typed({0: T("true")}, {0: TInt()})
    assert not heap_well_typed({0: T("true")}, {0: TBool(), 1: TBool()})


def _preservation_walk(term, tau, fuel=300):
    """Per-step preservation with store-typing extension at allocations."""
    config = Config({}, term)
    sigma = {}
    for _ in range(fuel):
        outcome = step(config)
        if not isinstance(outcome, Stepped):
            return
        config = outcome.config
        sigma = extend_store_typing(sigma, config.heap)
        assert heap_well_typed(config.heap, sigma)
        got = typecheck(sigma, frozenset(), {}, config.expr)
        assert alpha_eq(got, tau)


@pytest.mark.parametrize("seed", range(25))
def test_preservation_with_store_extension(seed, full_terms):
    term, tau = full_terms[seed]
    _preservation_walk(term, tau)


def test_preservation_on_knot_prefix():
    # self-referential heap values still admit the alloc-time store typing
    config = Config({}, demos.knot())
    sigma = {}
    tau = typecheck_closed(demos.knot())
    for _ in range(20):
        outcome = step(config)
        assert isinstance(outcome, Stepped)
        config = outcome.config
        sigma = extend_store_typing(sigma, config.heap)
        assert alpha_eq(typecheck(sigma, frozenset(), {}, config.expr), tau)
        assert heap_well_typed(config.heap, sigma)

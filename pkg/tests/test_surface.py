"""Parser and printer: golden parses, precedence, round-trips, errors."""

import pytest

from lrlab import demos
from lrlab.equivalence import gen_closed_term
from lrlab.kernel import (
    App, Fold, If, IntLit, LEVEL_PRESETS, Loc, Pack, TArrow, TBool, Unfold,
    Var, alpha_eq,
)
from lrlab.surface import (
    ParseError, parse_program, parse_relation, parse_term, parse_type,
    parse_world, print_term, print_type,
)


def test_if_golden():
    assert parse_term("if true then false else true") == If(
        parse_term("true"), parse_term("false"), parse_term("true"))


def test_package_golden():
    e = parse_term("pack <Int, <1, \\x:Int. x = 0>> as ex a. a * (a -> Bool)")
    assert isinstance(e, Pack)
    assert alpha_eq(e, demos.package_int())


def test_omega_golden():
    e = parse_term("(\\x: mu a. a -> a. (unfold x) x)")
    assert alpha_eq(e, demos.self_app())
    body = e.body
    assert isinstance(body, App) and isinstance(body.fn, Unfold)


def test_application_left_assoc():
    assert parse_term("f a b") == App(App(Var("f"), Var("a")), Var("b"))
    assert print_term(App(App(Var("f"), Var("a")), Var("b"))) == "f a b"


def test_arrow_right_assoc():
    t = TArrow(TBool(), TArrow(TBool(), TBool()))
    assert print_type(t) == "Bool -> Bool -> Bool"
    assert alpha_eq(parse_type("Bool -> Bool -> Bool"), t)


def test_type_precedence():
    assert alpha_eq(parse_type("Ref Bool * Int"), parse_type("(Ref Bool) * Int"))
    assert alpha_eq(parse_type("Bool * Int + Bool"), parse_type("(Bool * Int) + Bool"))
    assert alpha_eq(parse_type("Bool + Int -> Bool"), parse_type("(Bool + Int) -> Bool"))


def test_deref_binds_tighter_than_application():
    e = parse_term("!x 0")
    assert isinstance(e, App) and e.arg == IntLit(0)


def test_assignment_looser_than_equality():
    e = parse_term("x := y = z")
    from lrlab.kernel import Assign, IntEq
    assert isinstance(e, Assign) and isinstance(e.value, IntEq)


def test_fold_requires_annotation():
    e = parse_term("fold true as mu a. Bool")
    assert isinstance(e, Fold)
    with pytest.raises(ParseError):
        parse_term("fold true")


def test_negative_literals_and_range():
    assert parse_term("-3") == IntLit(-3)
    parse_term(str(2 ** 63 - 1))
    with pytest.raises(ParseError):
        parse_term(str(2 ** 63))


def test_locations_are_not_surface_syntax():
    with pytest.raises(ParseError):
        parse_term("#l0")
    with pytest.raises(ParseError):
        parse_term("!#l0")
    # but they print, for trace output
    assert print_term(Loc(3)) == "#l3"


def test_parse_error_carries_span_and_expected():
    with pytest.raises(ParseError) as info:
        parse_term("if true then false")
    assert info.value.span is not None
    assert "else" in info.value.expected


def test_trailing_input_rejected():
    with pytest.raises(ParseError):
        parse_term("true false extra )")


def test_comments_and_pragma():
    term, level = parse_program("-- level: mu\n-- a comment\nfold true as mu a. Bool\n")
    assert isinstance(term, Fold)
    assert level is not None and level.enables("mu")
    term2, level2 = parse_program("true -- trailing comment\n")
    assert level2 is None


def test_pragma_rejects_unknown_feature():
    with pytest.raises(ParseError):
        parse_program("-- level: warpdrive\ntrue")


@pytest.mark.parametrize("src", [
    "true", "\\x:Bool. if x then false else true",
    "(\\x:Int. x = 0) 1",
    "pack <Int, <1, \\x:Int. x = 0>> as ex a. a * (a -> Bool)",
    "unpack <a, p> = q in (snd p) (fst p)",
    "case inl true as Bool + Int of inl x => x | inr y => false",
    "/\\a. \\x:a. x",
    "(/\\a. \\x:a. x) [Bool] true",
    "\\x: mu a. a -> a. (unfold x) x",
    "((\\x: Ref (Int -> Int). (\\y: Int -> Int. !x) (x := (\\n: Int. (!x) 0))) (ref (\\x: Int. x))) 0",
    "x := (\\n:Int. n) 0",
    "not (1 = 2)",
    "fst <snd <true, 1>, ref false>",
])
def test_roundtrip_goldens(src):
    e = parse_term(src)
    assert alpha_eq(parse_term(print_term(e)), e)


@pytest.mark.parametrize("seed", range(80))
def test_roundtrip_generated(seed):
    term, _ = gen_closed_term(LEVEL_PRESETS["full"], 30, seed)
    assert alpha_eq(parse_term(print_term(term)), term)


@pytest.mark.parametrize("src", [
    "Bool", "Int -> Int", "Ref (Bool * Int)", "all a. a -> a",
    "ex a. a * (a -> Bool)", "mu a. Bool + (Int * a)",
    "(mu a. a -> a) -> (mu a. a -> a)", "Ref Bool -> Ref Int",
])
def test_type_roundtrip(src):
    t = parse_type(src)
    assert alpha_eq(parse_type(print_type(t)), t)


def test_relation_literal():
    lt, rt, pairs = parse_relation("R : Int ~ Bool { (1, true); (0, false) }")
    assert alpha_eq(lt, parse_type("Int")) and alpha_eq(rt, parse_type("Bool"))
    assert len(pairs) == 2
    lt2, rt2, pairs2 = parse_relation("{(1, true)}")
    assert lt2 is None and rt2 is None and len(pairs2) == 1


def test_world_literal():
    w = parse_world("W { #l0 : Bool; #l1 : Int -> Int }")
    assert set(w) == {0, 1}
    assert alpha_eq(w[1], parse_type("Int -> Int"))
    assert parse_world("{ }") == {}

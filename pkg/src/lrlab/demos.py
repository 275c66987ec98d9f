"""Canonical workbench programs: the two observationally equivalent integer
and boolean packages (plus a distinguishable variant), the typeable
self-application combinator, and heap-encoded recursion."""

from __future__ import annotations

from .kernel import Term, Type
from .surface import parse_term, parse_type

PACKAGE_TYPE_SRC = "ex a. a * (a -> Bool)"

PACKAGE_INT_SRC = "pack <Int, <1, \\x:Int. x = 0>> as ex a. a * (a -> Bool)"
PACKAGE_BOOL_SRC = "pack <Bool, <true, \\x:Bool. not x>> as ex a. a * (a -> Bool)"
# same witness as the integer package but observably different behavior
PACKAGE_INT_VARIANT_SRC = "pack <Int, <1, \\x:Int. x = 1>> as ex a. a * (a -> Bool)"

SELF_APP_SRC = "\\x: mu a. a -> a. (unfold x) x"
SELF_APP_DIVERGING_SRC = (
    "(\\x: mu a. a -> a. (unfold x) x) (fold (\\x: mu a. a -> a. (unfold x) x) as mu a. a -> a)"
)

# recursion through the heap: allocate a dummy, tie the knot, run it
KNOT_SRC = (
    "((\\x: Ref (Int -> Int). (\\y: Int -> Int. !x) (x := (\\n: Int. (!x) 0)))"
    " (ref (\\x: Int. x))) 0"
)

DEMO_SOURCES: dict[str, str] = {
    "omega": SELF_APP_SRC,
    "landin": KNOT_SRC,
    "packages": PACKAGE_INT_SRC,
}


def package_type() -> Type:
    return parse_type(PACKAGE_TYPE_SRC)


def package_int() -> Term:
    return parse_term(PACKAGE_INT_SRC)


def package_bool() -> Term:
    return parse_term(PACKAGE_BOOL_SRC)


def package_int_variant() -> Term:
    return parse_term(PACKAGE_INT_VARIANT_SRC)


def self_app() -> Term:
    return parse_term(SELF_APP_SRC)


def self_app_diverging() -> Term:
    return parse_term(SELF_APP_DIVERGING_SRC)


def knot() -> Term:
    return parse_term(KNOT_SRC)

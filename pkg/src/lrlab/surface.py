"""Concrete syntax: lexer, recursive-descent parser, and pretty-printer.

Grammar sketch (whitespace-insensitive, ``--`` line comments):

    Type ::= "Bool" | "Int" | "Ref" Type | Type "->" Type   (right assoc)
           | Type "*" Type | Type "+" Type
           | ("all" | "ex" | "mu") ident "." Type | ident | "(" Type ")"
    precedence: Ref > "*" > "+" > "->"

    Term ::= ident | "true" | "false" | integer
           | "if" t "then" t "else" t
           | "\\" ident ":" Type "." t | "/\\" ident "." t | t "[" Type "]"
           | "<" t "," t ">" | "fst" t | "snd" t
           | "inl" t "as" Type | "inr" t "as" Type
           | "case" t "of" "inl" ident "=>" t "|" "inr" ident "=>" t
           | "pack" "<" Type "," t ">" "as" Type
           | "unpack" "<" ident "," ident ">" "=" t "in" t
           | "fold" t "as" Type | "unfold" t
           | "ref" t | t ":=" t | "!" t | t "=" t | "not" t | "(" t ")"

Application is left-associative juxtaposition and binds tighter than "="
and ":=".  Prefix operators (fst, snd, not, ref, fold, unfold, inl, inr,
"!") take the tightest argument, so ``!x 0`` reads ``(!x) 0``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .kernel import (
    Alloc, App, Assign, Case, Deref, FalseLit, Fold, Hole, If, Inl, Inr,
    IntEq, IntLit, Lam, Level, Loc, Not, Pack, Pair, Fst, Snd, Span, TArrow,
    TBool, TExists, TForall, TInt, TMu, TProd, TRef, TSum, TVar, Term,
    TrueLit, TyApp, TyLam, Type, Unfold, Unpack, Var, resolve_level,
)

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


class ParseError(Exception):
    def __init__(self, message: str, span: Span | None = None, expected: frozenset[str] = frozenset()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = expected

    def __str__(self) -> str:
        where = f" at {self.span.line}:{self.span.col}" if self.span else ""
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        return f"{self.message}{where}{exp}"


KEYWORDS = {
    "true", "false", "if", "then", "else", "fst", "snd", "inl", "inr",
    "case", "of", "as", "in", "pack", "unpack", "fold", "unfold", "ref",
    "not", "all", "ex", "mu", "Bool", "Int", "Ref",
}

_SYMBOLS = ["->", "=>", ":=", "/\\", "[", "]", "(", ")", "<", ">", ",", ".",
            ":", "*", "+", "=", "!", "\\", "|", ";", "~", "{", "}"]


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | int | loc | sym | eof
    text: str
    value: int | None
    span: Span


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span(start: int, end: int, sline: int, scol: int) -> Span:
        return Span(start, end, sline, scol)

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            if c == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start, sline, scol = i, line, col
        if c == "#":
            m = re.match(r"#l(\d+)", text[i:])
            if not m:
                raise ParseError("stray '#'", span(i, i + 1, line, col))
            i += m.end()
            col += m.end()
            tokens.append(Token("loc", m.group(0), int(m.group(1)), span(start, i, sline, scol)))
            continue
        if c == "-" and i + 1 < n and text[i + 1].isdigit():
            m = re.match(r"-\d+", text[i:])
            i += m.end()
            col += m.end()
            tokens.append(Token("int", m.group(0), int(m.group(0)), span(start, i, sline, scol)))
            continue
        if c.isdigit():
            m = re.match(r"\d+", text[i:])
            i += m.end()
            col += m.end()
            tokens.append(Token("int", m.group(0), int(m.group(0)), span(start, i, sline, scol)))
            continue
        sym = next((s for s in _SYMBOLS if text.startswith(s, i)), None)
        if sym is not None:
            i += len(sym)
            col += len(sym)
            tokens.append(Token("sym", sym, None, span(start, i, sline, scol)))
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group(0)
            i = m.end()
            col += len(word)
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, None, span(start, i, sline, scol)))
            continue
        raise ParseError(f"unsupported character {c!r}", span(i, i + 1, line, col))
    tokens.append(Token("eof", "", None, span(n, n, line, col)))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_hole: bool = False):
        self.tokens = tokenize(text)
        self.pos = 0
        self.allow_hole = allow_hole

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("sym", "keyword")

    def eat(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"unexpected {self._describe()}", self.peek().span, frozenset({text}))
        return self.next()

    def eat_ident(self) -> Token:
        if self.peek().kind != "ident":
            raise ParseError(f"unexpected {self._describe()}", self.peek().span, frozenset({"identifier"}))
        return self.next()

    def _describe(self) -> str:
        t = self.peek()
        return "end of input" if t.kind == "eof" else f"{t.text!r}"

    def done(self) -> bool:
        return self.peek().kind == "eof"

    def expect_eof(self) -> None:
        if not self.done():
            raise ParseError(f"trailing input {self._describe()}", self.peek().span, frozenset({"end of input"}))

    def _spanned(self, node, start: Span):
        end = self.tokens[self.pos - 1].span
        sp = Span(start.start, end.end, start.line, start.col)
        object.__setattr__(node, "span", sp)
        return node

    # -- types -------------------------------------------------------------

    def type_(self) -> Type:
        start = self.peek().span
        if self.at("all") or self.at("ex") or self.at("mu"):
            word = self.next().text
            var = self.eat_ident().text
            self.eat(".")
            body = self.type_()
            ctor = {"all": TForall, "ex": TExists, "mu": TMu}[word]
            return self._spanned(ctor(var, body), start)
        t = self.type_sum()
        if self.at("->"):
            self.next()
            return self._spanned(TArrow(t, self.type_()), start)
        return t

    def type_sum(self) -> Type:
        start = self.peek().span
        t = self.type_prod()
        if self.at("+"):
            self.next()
            return self._spanned(TSum(t, self.type_sum()), start)
        return t

    def type_prod(self) -> Type:
        start = self.peek().span
        t = self.type_atom()
        if self.at("*"):
            self.next()
            return self._spanned(TProd(t, self.type_prod()), start)
        return t

    def type_atom(self) -> Type:
        t = self.peek()
        if self.at("Bool"):
            return self._spanned(TBool(), self.next().span)
        if self.at("Int"):
            return self._spanned(TInt(), self.next().span)
        if self.at("Ref"):
            start = self.next().span
            return self._spanned(TRef(self.type_atom()), start)
        if self.at("("):
            self.next()
            inner = self.type_()
            self.eat(")")
            return inner
        if t.kind == "ident":
            return self._spanned(TVar(self.next().text), t.span)
        raise ParseError(f"unexpected {self._describe()} in type", t.span,
                         frozenset({"Bool", "Int", "Ref", "(", "identifier", "all", "ex", "mu"}))

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        start = self.peek().span
        if self.at("\\"):
            self.next()
            var = self.eat_ident().text
            self.eat(":")
            annot = self.type_()
            self.eat(".")
            return self._spanned(Lam(var, annot, self.term()), start)
        if self.at("/\\"):
            self.next()
            var = self.eat_ident().text
            self.eat(".")
            return self._spanned(TyLam(var, self.term()), start)
        if self.at("if"):
            self.next()
            cond = self.term()
            self.eat("then")
            then = self.term()
            self.eat("else")
            return self._spanned(If(cond, then, self.term()), start)
        if self.at("case"):
            self.next()
            scrutinee = self.term()
            self.eat("of")
            self.eat("inl")
            x1 = self.eat_ident().text
            self.eat("=>")
            t1 = self.term()
            self.eat("|")
            self.eat("inr")
            x2 = self.eat_ident().text
            self.eat("=>")
            t2 = self.term()
            return self._spanned(Case(scrutinee, x1, t1, x2, t2), start)
        if self.at("pack"):
            self.next()
            self.eat("<")
            witness = self.type_()
            self.eat(",")
            payload = self.term()
            self.eat(">")
            self.eat("as")
            annot = self.type_()
            return self._spanned(Pack(witness, payload, annot), start)
        if self.at("unpack"):
            self.next()
            self.eat("<")
            ty_var = self.eat_ident().text
            self.eat(",")
            var = self.eat_ident().text
            self.eat(">")
            self.eat("=")
            packed = self.term()
            self.eat("in")
            return self._spanned(Unpack(ty_var, var, packed, self.term()), start)
        return self.assign()

    def assign(self) -> Term:
        start = self.peek().span
        t = self.equality()
        if self.at(":="):
            self.next()
            return self._spanned(Assign(t, self.term()), start)
        return t

    def equality(self) -> Term:
        start = self.peek().span
        t = self.application()
        if self.at("="):
            self.next()
            return self._spanned(IntEq(t, self.application()), start)
        return t

    _APP_STARTS = frozenset({"true", "false", "fst", "snd", "inl", "inr",
                             "fold", "unfold", "ref", "not", "(", "<", "!"})

    def _starts_app_operand(self) -> bool:
        t = self.peek()
        if t.kind in ("ident", "int"):
            return True
        if t.kind == "loc":
            return True
        if t.text in self._APP_STARTS and t.kind in ("sym", "keyword"):
            return True
        return self.allow_hole and t.text == "["
    # "[" only reaches an operand position as a hole; type application is
    # handled separately below.

    def application(self) -> Term:
        start = self.peek().span
        t = self.prefixed()
        while True:
            if self.at("[") and not (self.allow_hole and self.tokens[self.pos + 1].text == "."):
                self.next()
                annot = self.type_()
                self.eat("]")
                t = self._spanned(TyApp(t, annot), start)
            elif self._starts_app_operand():
                t = self._spanned(App(t, self.prefixed()), start)
            else:
                return t

    def prefixed(self) -> Term:
        start = self.peek().span
        if self.at("fst"):
            self.next()
            return self._spanned(Fst(self.prefixed()), start)
        if self.at("snd"):
            self.next()
            return self._spanned(Snd(self.prefixed()), start)
        if self.at("not"):
            self.next()
            return self._spanned(Not(self.prefixed()), start)
        if self.at("unfold"):
            self.next()
            return self._spanned(Unfold(self.prefixed()), start)
        if self.at("ref"):
            self.next()
            return self._spanned(Alloc(self.prefixed()), start)
        if self.at("!"):
            self.next()
            return self._spanned(Deref(self.prefixed()), start)
        if self.at("inl") or self.at("inr"):
            word = self.next().text
            arg = self.prefixed()
            self.eat("as")
            annot = self.type_()
            ctor = Inl if word == "inl" else Inr
            return self._spanned(ctor(arg, annot), start)
        if self.at("fold"):
            self.next()
            arg = self.prefixed()
            self.eat("as")
            annot = self.type_()
            return self._spanned(Fold(arg, annot), start)
        return self.atom()

    def atom(self) -> Term:
        t = self.peek()
        if self.at("true"):
            return self._spanned(TrueLit(), self.next().span)
        if self.at("false"):
            return self._spanned(FalseLit(), self.next().span)
        if t.kind == "int":
            self.next()
            if not (INT_MIN <= t.value <= INT_MAX):
                raise ParseError("integer literal out of 64-bit range", t.span)
            return self._spanned(IntLit(t.value), t.span)
        if t.kind == "ident":
            self.next()
            return self._spanned(Var(t.text), t.span)
        if t.kind == "loc":
            raise ParseError("heap locations cannot appear in source programs", t.span)
        if self.at("("):
            self.next()
            inner = self.term()
            self.eat(")")
            return inner
        if self.at("<"):
            start = self.next().span
            left = self.term()
            self.eat(",")
            right = self.term()
            self.eat(">")
            return self._spanned(Pair(left, right), start)
        if self.allow_hole and self.at("["):
            start = self.next().span
            self.eat(".")
            self.eat("]")
            return self._spanned(Hole(), start)
        raise ParseError(f"unexpected {self._describe()} in term", t.span,
                         frozenset({"identifier", "literal", "(", "<", "if", "\\"}))


def parse_term(text: str) -> Term:
    p = _Parser(text)
    e = p.term()
    p.expect_eof()
    return e


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type_()
    p.expect_eof()
    return t


def parse_context(text: str) -> Term:
    """Like ``parse_term`` but allows ``[.]`` hole atoms."""
    p = _Parser(text, allow_hole=True)
    e = p.term()
    p.expect_eof()
    return e


_PRAGMA_RE = re.compile(r"^\s*--\s*level\s*:\s*(\S+)\s*$", re.MULTILINE)


def parse_program(text: str) -> tuple[Term, Level | None]:
    """One term per file; an optional ``-- level: <name>`` pragma."""
    level = None
    m = _PRAGMA_RE.search(text)
    if m:
        try:
            level = resolve_level(m.group(1))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    return parse_term(text), level


def parse_relation(text: str) -> tuple[Type | None, Type | None, list[tuple[Term, Term]]]:
    """``R : T1 ~ T2 { (a, b); ... }``; the typed header is optional."""
    p = _Parser(text)
    left_ty = right_ty = None
    if p.peek().kind == "ident" and p.peek().text == "R":
        p.next()
        p.eat(":")
        left_ty = p.type_()
        p.eat("~")
        right_ty = p.type_()
    p.eat("{")
    pairs: list[tuple[Term, Term]] = []
    while not p.at("}"):
        p.eat("(")
        a = p.term()
        p.eat(",")
        b = p.term()
        p.eat(")")
        pairs.append((a, b))
        if p.at(";"):
            p.next()
    p.eat("}")
    p.expect_eof()
    return left_ty, right_ty, pairs


def parse_world(text: str) -> dict[int, Type]:
    """``W { #l0 : Bool; #l1 : Int -> Int }``; the leading W is optional."""
    p = _Parser(text)
    if p.peek().kind == "ident" and p.peek().text == "W":
        p.next()
    p.eat("{")
    world: dict[int, Type] = {}
    while not p.at("}"):
        tok = p.peek()
        if tok.kind != "loc":
            raise ParseError(f"unexpected {tok.text!r} in world literal", tok.span, frozenset({"#l<n>"}))
        p.next()
        p.eat(":")
        world[tok.value] = p.type_()
        if p.at(";"):
            p.next()
    p.eat("}")
    p.expect_eof()
    return world


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# Type precedence: binders 0 < arrow 1 < sum 2 < prod 3 < Ref 4 < atom 5.


def print_type(t: Type, prec: int = 0) -> str:
    match t:
        case TBool():
            return "Bool"
        case TInt():
            return "Int"
        case TVar(a):
            return a
        case TRef(inner):
            s = f"Ref {print_type(inner, 5)}"
            return f"({s})" if prec > 4 else s
        case TProd(l, r):
            s = f"{print_type(l, 4)} * {print_type(r, 3)}"
            return f"({s})" if prec > 3 else s
        case TSum(l, r):
            s = f"{print_type(l, 3)} + {print_type(r, 2)}"
            return f"({s})" if prec > 2 else s
        case TArrow(d, c):
            s = f"{print_type(d, 2)} -> {print_type(c, 1)}"
            return f"({s})" if prec > 1 else s
        case TForall(a, b) | TExists(a, b) | TMu(a, b):
            word = {"TForall": "all", "TExists": "ex", "TMu": "mu"}[type(t).__name__]
            s = f"{word} {a}. {print_type(b, 0)}"
            return f"({s})" if prec > 0 else s
    raise AssertionError(f"unknown type {t!r}")


# Term precedence: low forms 0 < ":=" 1 < "=" 2 < application 3 < prefix 4
# < atom 5.


def print_term(e: Term, prec: int = 0, loc_names: dict[int, int] | None = None) -> str:
    def p(sub: Term, sub_prec: int) -> str:
        return print_term(sub, sub_prec, loc_names)

    match e:
        case Var(x):
            return x
        case TrueLit():
            return "true"
        case FalseLit():
            return "false"
        case IntLit(n):
            return str(n)
        case Loc(l):
            shown = loc_names[l] if loc_names is not None else l
            return f"#l{shown}"
        case Hole():
            return "[.]"
        case Pair(l, r):
            return f"<{p(l, 0)}, {p(r, 0)}>"
        case Fst(a):
            s = f"fst {p(a, 4)}"
        case Snd(a):
            s = f"snd {p(a, 4)}"
        case Not(a):
            s = f"not {p(a, 4)}"
        case Unfold(a):
            s = f"unfold {p(a, 4)}"
        case Alloc(a):
            s = f"ref {p(a, 4)}"
        case Deref(a):
            s = f"!{p(a, 4)}"
        case App(fn, arg):
            s = f"{p(fn, 3)} {p(arg, 4)}"
            return f"({s})" if prec > 3 else s
        case TyApp(fn, annot):
            s = f"{p(fn, 3)} [{print_type(annot)}]"
            return f"({s})" if prec > 3 else s
        case IntEq(l, r):
            s = f"{p(l, 3)} = {p(r, 3)}"
            return f"({s})" if prec > 2 else s
        case Assign(t, v):
            s = f"{p(t, 2)} := {p(v, 1)}"
            return f"({s})" if prec > 1 else s
        case Lam(x, annot, body):
            s = f"\\{x}:{print_type(annot)}. {p(body, 0)}"
            return f"({s})" if prec > 0 else s
        case TyLam(a, body):
            s = f"/\\{a}. {p(body, 0)}"
            return f"({s})" if prec > 0 else s
        case If(c, t, o):
            s = f"if {p(c, 0)} then {p(t, 0)} else {p(o, 0)}"
            return f"({s})" if prec > 0 else s
        case Case(sc, x1, t1, x2, t2):
            s = f"case {p(sc, 0)} of inl {x1} => {p(t1, 0)} | inr {x2} => {p(t2, 0)}"
            return f"({s})" if prec > 0 else s
        case Inl(a, annot):
            s = f"inl {p(a, 4)} as {print_type(annot)}"
            return f"({s})" if prec > 0 else s
        case Inr(a, annot):
            s = f"inr {p(a, 4)} as {print_type(annot)}"
            return f"({s})" if prec > 0 else s
        case Fold(a, annot):
            s = f"fold {p(a, 4)} as {print_type(annot)}"
            return f"({s})" if prec > 0 else s
        case Pack(w, payload, annot):
            s = f"pack <{print_type(w)}, {p(payload, 0)}> as {print_type(annot)}"
            return f"({s})" if prec > 0 else s
        case Unpack(a, x, packed, body):
            s = f"unpack <{a}, {x}> = {p(packed, 0)} in {p(body, 0)}"
            return f"({s})" if prec > 0 else s
        case _:
            raise AssertionError(f"unknown term {e!r}")
    # prefix operators fall through here
    return f"({s})" if prec > 4 else s

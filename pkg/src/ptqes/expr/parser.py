"""Recursive-descent parser for the expression grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' factor)?
    atom   := number | 'i' | 'x' | ident | ident '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``; ``^`` is
right-associative.  ``i`` is the imaginary unit and cannot name a parameter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    FUNCTIONS,
    I,
    X,
    Expr,
    Param,
    const,
    mk_add,
    mk_div,
    mk_func,
    mk_mul,
    mk_neg,
    mk_pow,
    mk_sub,
)


class ParseError(ValueError):
    """Syntax error; ``offset`` is a byte offset into the UTF-8 source."""

    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at byte {offset}{detail}")


class UnknownFunction(ParseError):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | eof
    text: str
    offset: int  # byte offset


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {source[pos]!r}",
                _byte_offset(source, pos),
                ("number", "identifier", "operator"),
            )
        if m.lastgroup != "ws":
            tokens.append(Token(m.lastgroup, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(Token("eof", "", len(source.encode("utf-8"))))
    return tokens


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail((repr(text),))

    def fail(self, expected):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {found}", t.offset, expected)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail(("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            if self.accept("+"):
                e = mk_add(e, self.term())
            elif self.accept("-"):
                e = mk_sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            if self.accept("*"):
                e = mk_mul(e, self.factor())
            elif self.accept("/"):
                e = mk_div(e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        if self.accept("-"):
            return mk_neg(self.factor())
        base = self.atom()
        if self.accept("^"):
            return mk_pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.advance()
            return const(float(t.text))
        if t.kind == "ident":
            self.advance()
            if self.accept("("):
                if t.text not in FUNCTIONS:
                    raise UnknownFunction(
                        f"unknown function {t.text!r}", t.offset, FUNCTIONS
                    )
                arg = self.expr()
                self.expect(")")
                return mk_func(t.text, arg)
            if t.text == "i":
                return I
            if t.text == "x":
                return X
            return Param(t.text)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.fail(("number", "identifier", "'('", "'-'"))


def parse(source: str) -> Expr:
    """Parse ``source`` into an expression tree."""
    return _Parser(source).parse()

"""Recursive-descent parser for polynomial expressions such as ``z1^3 - z2^2 - t*z2``."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from ..errors import ParseError
from .poly import Poly

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, vars_):
        self.t = tokens
        self.i = 0
        self.vars = tuple(vars_)

    def peek(self):
        return self.t[self.i] if self.i < len(self.t) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> Poly:
        out = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> Poly:
        out = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            _, op = self.take()
            rhs = self.unary()
            if op == "*":
                out = out * rhs
            else:
                try:
                    out = out / rhs
                except ZeroDivisionError as exc:
                    raise ParseError(str(exc)) from None
        return out

    def unary(self) -> Poly:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or not val.isdigit():
                raise ParseError("exponent must be a non-negative integer")
            return base ** int(val)
        return base

    def atom(self) -> Poly:
        kind, val = self.take()
        if kind == "num":
            return Poly.const(self.vars, Fraction(val))
        if kind == "name":
            if val not in self.vars:
                raise ParseError(f"unknown variable {val!r}; expected one of {self.vars}")
            return Poly.var(self.vars, val)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ParseError("missing closing parenthesis")
            return inner
        raise ParseError(f"unexpected token {val!r}")


def parse_poly(text: str, vars_: Sequence[str]) -> Poly:
    """Parse ``text`` as a polynomial in the given variables."""
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    p = _Parser(tokens, vars_)
    out = p.expr()
    if p.i != len(tokens):
        raise ParseError(f"trailing input after token {p.i}")
    return out

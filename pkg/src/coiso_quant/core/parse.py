"""Polynomial literal grammar used in scene files.

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*      # "/" only by a nonzero constant
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT | IDENT | "(" expr ")"

Juxtaposition (``2x``, ``x y``) is rejected.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Sequence, Tuple

from .poly import Poly

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^|\*\*|[-+*/()]))")


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1} in {text!r}")
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character", text, pos)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("id", m.group(2), start))
        else:
            op = m.group(3)
            tokens.append(("op", "^" if op == "**" else op, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vars: Sequence[str]):
        self.text = text
        self.vars = tuple(vars)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            self.error("empty expression")
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[0] in ("num", "id") or tok[1] == "(":
                self.error("implicit multiplication is not allowed; use '*'")
            self.error(f"unexpected token {tok[1]!r}")
        return p

    def expr(self) -> Poly:
        p = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Poly:
        p = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op = self.take()
            q = self.unary()
            if op[1] == "*":
                p = p * q
            else:
                if not q.is_constant() or q.is_zero():
                    self.error("division is only allowed by a nonzero constant", op)
                p = p / q.constant_value()
        return p

    def unary(self) -> Poly:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("+", "-"):
            self.take()
            p = self.unary()
            return -p if tok[1] == "-" else p
        return self.power()

    def power(self) -> Poly:
        p = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num":
                self.error("exponent must be a non-negative integer literal", tok)
            p = p ** int(tok[1])
        return p

    def atom(self) -> Poly:
        tok = self.take()
        if tok[0] == "num":
            return Poly.constant(Fraction(int(tok[1])), self.vars)
        if tok[0] == "id":
            if tok[1] not in self.vars:
                self.error(f"undeclared variable {tok[1]!r}", tok)
            return Poly.variable(tok[1], self.vars)
        if tok[0] == "op" and tok[1] == "(":
            p = self.expr()
            close = self.take()
            if close[1] != ")":
                self.error("expected ')'", close)
            return p
        self.error(f"unexpected token {tok[1]!r}" if tok[0] != "end" else "unexpected end of input", tok)


def parse_poly(text: str, vars: Sequence[str]) -> Poly:
    """Parse a polynomial literal over the declared variables."""
    if not isinstance(text, str):
        if isinstance(text, int):
            return Poly.constant(text, vars)
        raise ParseError("polynomial literal must be a string", str(text), 0)
    return _Parser(text, vars).parse()

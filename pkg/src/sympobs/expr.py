"""Parser for polynomial expressions such as ``1 + 4a + 6a^2 - 2b`` or ``(1+a)^3 - a^3``.

Grammar: integers, rationals written ``p/q``, variable names, ``+ - * / ^``
and parentheses.  A number or factor followed directly by a name or an
opening parenthesis multiplies implicitly (``4a`` is ``4*a``).  Division is
only allowed by a nonzero constant.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Sequence

from .poly import Poly

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


class ExpressionError(ValueError):
    """Malformed expression; ``column`` is 1-based within the parsed text."""

    def __init__(self, message: str, column: int, text: str = ""):
        self.message = message
        self.column = column
        self.text = text
        super().__init__(f"column {column}: {message}")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionError(f"unexpected character {text[col - 1]!r}", col, text)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("num", m.group(1), start + 1))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), start + 1))
        else:
            op = "^" if m.group(3) == "**" else m.group(3)
            tokens.append(("op", op, start + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text, names, truncate):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0
        self.index = {n: i for i, n in enumerate(names)}
        self.nvars = len(names)
        self.truncate = truncate or (lambda p: p)

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ExpressionError(message, tok[2], self.text)

    def parse(self) -> Poly:
        if self.peek()[0] == "end":
            self.error("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            self.error(f"unexpected {self.peek()[1]!r}")
        return value

    def expr(self) -> Poly:
        value = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Poly:
        value = self.unary()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                value = self.truncate(value * self.unary())
            elif tok[0] == "op" and tok[1] == "/":
                self.take()
                divisor = self.unary()
                if not divisor.is_constant() or divisor.is_zero():
                    self.error("division is only allowed by a nonzero constant", tok)
                value = value / divisor.constant_term()
            elif tok[0] == "name" or (tok[0] == "op" and tok[1] == "("):
                value = self.truncate(value * self.power())
            else:
                return value

    def unary(self) -> Poly:
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            inner = self.unary()
            return -inner if tok[1] == "-" else inner
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            exp_tok = self.take()
            if exp_tok[0] != "num":
                self.error("exponent must be a non-negative integer literal", exp_tok)
            result = Poly.const(self.nvars, 1)
            for _ in range(int(exp_tok[1])):
                result = self.truncate(result * base)
            return result
        return base

    def atom(self) -> Poly:
        tok = self.take()
        kind, value, _ = tok
        if kind == "num":
            return Poly.const(self.nvars, Fraction(int(value)))
        if kind == "name":
            if value not in self.index:
                self.error(f"unknown generator {value!r}", tok)
            return Poly.var(self.nvars, self.index[value])
        if kind == "op" and value == "(":
            inner = self.expr()
            close = self.take()
            if close[0] != "op" or close[1] != ")":
                self.error("expected ')'", close)
            return inner
        self.error("expected a number, a name or '('", tok)


def parse_expression(
    text: str,
    names: Sequence[str],
    truncate: Callable[[Poly], Poly] | None = None,
) -> Poly:
    """Parse ``text`` into a :class:`Poly` over the variables ``names``.

    ``truncate`` is applied after every product; cohomology rings pass a
    degree cut-off here so large powers never expand past the top degree.
    """
    return _Parser(text, list(names), truncate).parse()

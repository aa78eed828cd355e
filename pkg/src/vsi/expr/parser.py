"""Recursive-descent parser for the expression grammar.

    expr     := term (("+"|"-") term)*
    term     := factor (("*"|"/") factor)*
    factor   := base ("^" uint)?
    base     := rational | identifier | "(" expr ")" | "-" base
    rational := uint ("/" uint)?

The grammar is followed literally: ``p/q`` between two integers is a single
rational literal, and unary minus belongs to ``base`` so ``-v^2 == v^2``.
"""

from __future__ import annotations

from typing import NamedTuple

from .context import VariableContext
from .errors import ParseError, UnknownIdentifierError
from .rational import RationalFunction


class Token(NamedTuple):
    kind: str  # "int", "name", "op", "end"
    text: str
    offset: int  # byte offset


_OPS = set("+-*/^()")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    byte = 0  # running byte offset of text[i]
    while i < n:
        ch = text[i]
        start_byte = byte
        if ch.isspace():
            i += 1
            byte += len(ch.encode())
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                raise ParseError("non-integer number", start_byte + (j - i), text)
            tokens.append(Token("int", text[i:j], start_byte))
            byte += j - i
            i = j
            continue
        if ch.isascii() and ch.isalpha():
            j = i
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("name", text[i:j], start_byte))
            byte += j - i
            i = j
            continue
        if ch in _OPS:
            tokens.append(Token("op", ch, start_byte))
            i += 1
            byte += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", start_byte, text)
    tokens.append(Token("end", "", byte))
    return tokens


def identifiers(text: str) -> list[str]:
    """Identifiers used in ``text``, in order of first appearance."""
    seen: dict[str, None] = {}
    for tok in tokenize(text):
        if tok.kind == "name":
            seen.setdefault(tok.text, None)
    return list(seen)


class _Parser:
    def __init__(self, text: str, ctx: VariableContext) -> None:
        self.text = text
        self.ctx = ctx
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.offset, self.text)

    def is_op(self, op: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == "op" and tok.text == op

    def parse(self) -> RationalFunction:
        if self.peek().kind == "end":
            raise self.error("empty expression")
        value = self.expr()
        if self.peek().kind != "end":
            raise self.error(f"unexpected {self.peek().text!r}")
        return value

    def expr(self) -> RationalFunction:
        value = self.term()
        while self.is_op("+") or self.is_op("-"):
            op = self.take().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> RationalFunction:
        value = self.factor()
        while self.is_op("*") or self.is_op("/"):
            op = self.take()
            rhs = self.factor()
            if op.text == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by the zero polynomial", op.offset, self.text)
                value = value / rhs
        return value

    def factor(self) -> RationalFunction:
        value = self.base()
        if self.is_op("^"):
            caret = self.take()
            tok = self.peek()
            if tok.kind == "op" and tok.text == "-":
                raise self.error("negative exponent", tok)
            if tok.kind != "int":
                raise ParseError("exponent must be a non-negative integer", caret.offset, self.text)
            self.take()
            value = value ** int(tok.text)
        return value

    def base(self) -> RationalFunction:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            num = int(tok.text)
            if self.is_op("/") and self.peek(1).kind == "int":
                slash = self.take()
                den = int(self.take().text)
                if den == 0:
                    raise ParseError("division by the zero polynomial", slash.offset, self.text)
                return RationalFunction.constant(self.ctx, _frac(num, den))
            return RationalFunction.constant(self.ctx, num)
        if tok.kind == "name":
            self.take()
            if tok.text not in self.ctx:
                raise UnknownIdentifierError(
                    f"unknown identifier {tok.text!r}", tok.offset, self.text
                )
            return RationalFunction.symbol(self.ctx, tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            value = self.expr()
            if not self.is_op(")"):
                raise self.error("expected ')'")
            self.take()
            return value
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return -self.base()
        if tok.kind == "end":
            raise self.error("unexpected end of expression")
        raise self.error(f"unexpected {tok.text!r}")


def _frac(n: int, d: int):
    from fractions import Fraction

    return Fraction(n, d)


def parse_expression(text: str, ctx: VariableContext) -> RationalFunction:
    """Parse ``text`` into a normalized rational function over ``ctx``."""
    return _Parser(text, ctx).parse()

"""Tokenizer and Pratt parser for field expressions.

Binding powers: ``+ -`` 10, ``* /`` 20, prefix ``-`` 30, ``^`` 40 (right
associative), so ``-2^2`` is ``-(2^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import LexError, ParseError, UnknownVariable
from .nodes import FUNCTIONS, BinOp, Call, Expr, Neg, Num, Var

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, eof
    text: str
    pos: int


def tokenize(src: str) -> list[Token]:
    out, pos = [], 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise LexError(pos, src[pos], src)
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", len(src)))
    return out


_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_PREFIX_NEG = 30
_NAME = re.compile(r"([A-Za-z_]+)(\d+)$")


class VarSpec:
    """Allowed variables as ordered ``(prefix, count)`` blocks; position in the point is block offset + index."""

    def __init__(self, blocks: Sequence[tuple[str, int]]):
        self.blocks = tuple(blocks)
        self.offsets: dict[str, int] = {}
        self.counts: dict[str, int] = {}
        off = 0
        for prefix, count in self.blocks:
            self.offsets[prefix] = off
            self.counts[prefix] = count
            off += count
        self.dim = off

    @classmethod
    def coerce(cls, spec) -> VarSpec:
        if isinstance(spec, VarSpec):
            return spec
        if isinstance(spec, Mapping):
            return cls(list(spec.items()))
        if isinstance(spec, int):
            return cls([("x", spec)])
        return cls(spec)

    def position(self, var: Var) -> int:
        return self.offsets[var.prefix] + var.index

    def resolve(self, name: str, pos: int | None = None) -> Var:
        m = _NAME.match(name)
        if m and m.group(1) in self.counts and int(m.group(2)) < self.counts[m.group(1)]:
            return Var(m.group(1), int(m.group(2)))
        raise UnknownVariable(name, pos)

    def __repr__(self) -> str:
        return f"VarSpec({list(self.blocks)})"


class _Parser:
    def __init__(self, src: str, spec: VarSpec):
        self.src = src
        self.spec = spec
        self.tokens = tokenize(src)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: list[str]):
        tok = self.peek()
        got = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(tok.pos, expected, got, self.src)

    def expect(self, text: str) -> Token:
        if self.peek().text != text or self.peek().kind != "op":
            self.fail([repr(text)])
        return self.advance()

    def expression(self, rbp: int = 0) -> Expr:
        left = self.prefix()
        while True:
            tok = self.peek()
            lbp = _INFIX.get(tok.text, 0) if tok.kind == "op" else 0
            if lbp <= rbp:
                break
            self.advance()
            right = self.expression(lbp - 1 if tok.text == "^" else lbp)
            left = BinOp(tok.text, left, right)
        return left

    def prefix(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.expression(_PREFIX_NEG))
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.kind == "name":
            self.advance()
            if self.peek().text == "(":
                if tok.text not in FUNCTIONS:
                    raise ParseError(tok.pos, [f"one of the functions {', '.join(FUNCTIONS)}"], repr(tok.text), self.src)
                self.advance()
                arg = self.expression()
                self.expect(")")
                return Call(tok.text, arg)
            return self.spec.resolve(tok.text, tok.pos)
        self.fail(["number", "variable", "function call", "'('", "'-'"])

    def parse(self) -> Expr:
        if self.peek().kind == "eof":
            self.fail(["expression"])
        e = self.expression()
        if self.peek().kind != "eof":
            self.fail(["operator", "end of input"])
        return e


def parse(src: str, allowed_vars=None) -> Expr:
    """Parse ``src``; ``allowed_vars`` is a :class:`VarSpec`, a ``{prefix: count}`` map or a base dimension."""
    spec = VarSpec.coerce({"x": 0} if allowed_vars is None else allowed_vars)
    return _Parser(src, spec).parse()

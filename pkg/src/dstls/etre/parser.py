"""Textual syntax for expressions.

Grammar (``|`` binds loosest, then ``.``, then the postfix operators)::

    union   := concat ('|' concat)*
    concat  := postfix ('.' postfix)*
    postfix := atom ('+' | 'within' '[' num ',' num ']')*
    atom    := 'tube' '(' num ',' num ')' | 'any' | '(' union ')'
"""

from __future__ import annotations

import re

from .ast import Any, Concat, Expr, ExprError, Plus, Tube, Union, Within

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<word>[A-Za-z_]+)|(?P<sym>[()\[\],.|+]))"
)


class ParseError(ExprError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


def _tokenize(text: str):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def number(self) -> float:
        # a leading '+' lexes as a separate symbol when preceded by an atom,
        # so signed numbers are only accepted inside argument lists
        tok = self.peek()
        if tok[0] == "sym" and tok[1] == "+" and self.toks[self.i + 1][0] == "num":
            self.i += 1
        return float(self.take("num")[1])

    def union(self) -> Expr:
        node = self.concat()
        while self.peek()[1] == "|":
            self.take()
            node = Union(node, self.concat())
        return node

    def concat(self) -> Expr:
        node = self.postfix()
        while self.peek()[1] == ".":
            self.take()
            node = Concat(node, self.postfix())
        return node

    def postfix(self) -> Expr:
        node = self.atom()
        while True:
            tok = self.peek()
            if tok[1] == "+":
                self.take()
                node = Plus(node)
            elif tok[0] == "word" and tok[1] == "within":
                self.take()
                self.take("sym", "[")
                lo = self.number()
                self.take("sym", ",")
                hi = self.number()
                close = self.take("sym", "]")
                try:
                    node = Within(node, lo, hi)
                except ExprError as exc:
                    raise ParseError(str(exc), close[2]) from None
            else:
                return node

    def atom(self) -> Expr:
        tok = self.peek()
        if tok[0] == "word" and tok[1] == "tube":
            self.take()
            self.take("sym", "(")
            center = self.number()
            self.take("sym", ",")
            delta = self.number()
            close = self.take("sym", ")")
            try:
                return Tube(center, delta)
            except ExprError as exc:
                raise ParseError(str(exc), close[2]) from None
        if tok[0] == "word" and tok[1] == "any":
            self.take()
            return Any()
        if tok[1] == "(":
            self.take()
            node = self.union()
            self.take("sym", ")")
            return node
        raise ParseError(f"unexpected {tok[1] or 'end of input'!r}", tok[2])


def parse_etre(text: str) -> Expr:
    p = _Parser(text)
    node = p.union()
    tok = p.peek()
    if tok[0] != "end":
        raise ParseError(f"trailing input {tok[1]!r}", tok[2])
    return node


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(float(x))


def to_text(expr: Expr) -> str:
    """Print with minimal parentheses; ``parse_etre(to_text(e)) == e``."""
    return _print(expr, 0)


# precedence levels: 0 union, 1 concat, 2 postfix/atom
def _print(expr: Expr, ctx: int) -> str:
    if isinstance(expr, Tube):
        return f"tube({_num(expr.center)},{_num(expr.delta)})"
    if isinstance(expr, Any):
        return "any"
    if isinstance(expr, Union):
        s = f"{_print(expr.left, 0)} | {_print(expr.right, 1)}"
        return f"({s})" if ctx > 0 else s
    if isinstance(expr, Concat):
        s = f"{_print(expr.left, 1)} . {_print(expr.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(expr, Plus):
        return f"{_print(expr.inner, 2)}+"
    if isinstance(expr, Within):
        s = f"{_print(expr.inner, 2)} within [{_num(expr.lo)},{_num(expr.hi)}]"
        return s
    raise TypeError(f"not an expression: {expr!r}")

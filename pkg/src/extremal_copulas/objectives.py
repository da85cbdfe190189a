"""Objective functions g(x1, ..., xn) for coupling optimization.

Expressions are parsed by recursive descent over the grammar

    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' signed)*          # '^' binds tighter than unary '-'
    signed := '-' signed | atom
    atom   := NUMBER | xK | fn '(' expr {',' expr} ')' | '(' expr ')'

with functions abs, exp, ln (unary) and min, max (binary).  All binary
operators associate to the left.  Evaluation is vectorized over numpy
arrays; non-finite results are the caller's concern (the cost builder
checks and names the offending cell).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ObjectiveSyntaxError

_FUNCTIONS: dict = {
    "abs": (1, np.abs),
    "exp": (1, np.exp),
    "ln": (1, np.log),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or match.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ObjectiveSyntaxError(f"unexpected character {text[pos:].strip()[:1]!r}", bad)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind) + 1))
        pos = match.end()
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.max_var = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, symbol: str):
        kind, value, col = self.peek()
        if kind != "op" or value != symbol:
            raise ObjectiveSyntaxError(f"expected {symbol!r}", col)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, col = self.peek()
        if kind != "eof":
            raise ObjectiveSyntaxError(f"unexpected {value!r}", col)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            rhs = self.term()
            node = (np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.advance()[1]
            rhs = self.unary()
            node = (np.multiply if op == "*" else np.divide, node, rhs)
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return (np.negative, self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while self.peek()[:2] == ("op", "^"):
            self.advance()
            node = (np.power, node, self.signed_atom())
        return node

    def signed_atom(self):
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return (np.negative, self.signed_atom())
        return self.atom()

    def atom(self):
        kind, value, col = self.advance()
        if kind == "num":
            return ("const", float(value))
        if kind == "ident":
            var = re.fullmatch(r"x([1-9]\d*)", value)
            if var:
                idx = int(var.group(1))
                self.max_var = max(self.max_var, idx)
                return ("var", idx - 1)
            if value in _FUNCTIONS:
                arity, fn = _FUNCTIONS[value]
                self.expect_op("(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.advance()
                    args.append(self.expr())
                self.expect_op(")")
                if len(args) != arity:
                    raise ObjectiveSyntaxError(
                        f"{value} takes {arity} argument(s), got {len(args)}", col
                    )
                return (fn, *args)
            raise ObjectiveSyntaxError(f"unknown identifier {value!r}", col)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ObjectiveSyntaxError(
            "expected a number, variable, or parenthesized expression"
            if value else "unexpected end of expression",
            col,
        )


def _eval_node(node, cols):
    tag = node[0]
    if tag == "const":
        return node[1]
    if tag == "var":
        return cols[node[1]]
    fn = tag
    return fn(*(_eval_node(child, cols) for child in node[1:]))


@dataclass(frozen=True)
class Objective:
    """Callable objective over n coordinate arrays.

    ``min_vars`` is the highest coordinate an expression references;
    ``exact_n`` pins builtins that only make sense for a fixed dimension.
    """

    kind: str
    fn: Callable = field(repr=False)
    source: str | None = None
    min_vars: int = 0
    exact_n: int | None = None

    def evaluate(self, cols: Sequence[np.ndarray]):
        if self.exact_n is not None and len(cols) != self.exact_n:
            raise DomainError(
                f"objective {self.kind!r} needs exactly {self.exact_n} marginals"
            )
        if len(cols) < self.min_vars:
            raise DomainError(
                f"objective references x{self.min_vars} but only "
                f"{len(cols)} marginals are present"
            )
        return self.fn(cols)


def parse_objective(text: str) -> Objective:
    """Parse an expression objective; errors carry the 1-based column."""
    parser = _Parser(text)
    root = parser.parse()
    return Objective(
        kind="expression",
        fn=lambda cols, _root=root: _eval_node(_root, cols),
        source=text,
        min_vars=parser.max_var,
    )


def product_objective() -> Objective:
    """g(x) = x1 * x2 * ... * xn (any dimension)."""
    def fn(cols):
        out = cols[0]
        for c in cols[1:]:
            out = out * c
        return out
    return Objective(kind="product", fn=fn)


def abs_diff_objective() -> Objective:
    """g(x, y) = |x - y|."""
    return Objective(
        kind="abs_diff",
        fn=lambda cols: np.abs(cols[0] - cols[1]),
        exact_n=2,
    )


def match_eps_objective(eps: float) -> Objective:
    """Tent surrogate for the diagonal indicator: max(0, 1 - |x-y|/eps)."""
    if not eps > 0:
        raise DomainError("match window eps must be positive")
    return Objective(
        kind=f"match_eps({eps:g})",
        fn=lambda cols: np.clip(1.0 - np.abs(cols[0] - cols[1]) / eps, 0.0, None),
        exact_n=2,
    )


def builtin_objective(name: str) -> Objective:
    """Lookup ``product`` / ``abs_diff`` / ``match_eps:EPS``."""
    head, _, arg = name.partition(":")
    head = head.strip().lower()
    if head == "product":
        return product_objective()
    if head == "abs_diff":
        return abs_diff_objective()
    if head == "match_eps":
        try:
            return match_eps_objective(float(arg))
        except ValueError as exc:
            raise DomainError(f"match_eps needs a numeric window: {name!r}") from exc
    raise DomainError(f"unknown builtin objective {name!r}")

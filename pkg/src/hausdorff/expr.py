"""A small arithmetic expression language for kernels and test functions.

Grammar (``^`` and ``**`` are the same right-associative power)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Names are the declared variables plus the constants ``pi`` and ``e``.
Functions: abs, exp, log, sqrt, sign, min, max, step (``step(z) = 1`` for
``z >= 0``, else 0).
"""
from __future__ import annotations

import math
import re
from typing import Sequence

import numpy as np

__all__ = ["Expression", "ExpressionError", "parse"]


class ExpressionError(ValueError):
    def __init__(self, message, text=None, pos=None):
        if text is not None and pos is not None:
            message = f"{message} at column {pos + 1} in {text!r}"
        super().__init__(message)
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)"
                    r"|(?P<op>\*\*|[-+*/^(),]))")

_FUNCS = {
    "abs": (1, np.abs),
    "exp": (1, np.exp),
    "log": (1, np.log),
    "sqrt": (1, np.sqrt),
    "sign": (1, np.sign),
    "step": (1, lambda z: (np.asarray(z) >= 0).astype(float)),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}
_CONSTS = {"pi": math.pi, "e": math.e}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionError("unexpected character", text, len(text) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = variables
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ExpressionError(f"expected {value!r}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExpressionError(f"unexpected {tok[1]!r}", self.text, tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] in ("-", "+"):
            op = self.take()[1]
            inner = self.unary()
            return ("neg", inner) if op == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return ("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "name":
            if self.peek()[1] == "(":
                if val not in _FUNCS:
                    raise ExpressionError(f"unknown function {val!r}", self.text, pos)
                self.take("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                if len(args) != _FUNCS[val][0]:
                    raise ExpressionError(f"{val} takes {_FUNCS[val][0]} argument(s)", self.text, pos)
                return ("call", val, tuple(args))
            if val in self.variables:
                return ("var", val)
            if val in _CONSTS:
                return ("num", _CONSTS[val])
            raise ExpressionError(f"unknown name {val!r}", self.text, pos)
        if val == "(":
            node = self.expr()
            self.take(")")
            return node
        raise ExpressionError(f"unexpected {val or 'end of input'!r}", self.text, pos)


def _eval(node, env):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return env[node[1]]
    if tag == "neg":
        return -_eval(node[1], env)
    if tag == "call":
        fn = _FUNCS[node[1]][1]
        return fn(*[_eval(a, env) for a in node[2]])
    a = _eval(node[1], env)
    b = _eval(node[2], env)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    if tag == "*":
        return a * b
    if tag == "/":
        return np.divide(a, b)
    return np.power(np.asarray(a, dtype=float), b)


def _names(node, acc):
    if node[0] == "var":
        acc.add(node[1])
    elif node[0] == "neg":
        _names(node[1], acc)
    elif node[0] == "call":
        for a in node[2]:
            _names(a, acc)
    elif node[0] in "+-*/^":
        _names(node[1], acc)
        _names(node[2], acc)
    return acc


class Expression:
    """A parsed expression; call it with keyword arrays for its variables."""

    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text.strip()
        self.variables = tuple(variables)
        self.tree = _Parser(self.text, self.variables).parse()
        self.used = frozenset(_names(self.tree, set()))

    def __call__(self, **env):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return _eval(self.tree, env)

    def uses(self, name):
        return name in self.used

    def __eq__(self, other):
        return isinstance(other, Expression) and (self.text, self.variables) == (other.text, other.variables)

    def __hash__(self):
        return hash((self.text, self.variables))

    def __repr__(self):
        return f"Expression({self.text!r})"


def parse(text: str, variables: Sequence[str]) -> Expression:
    return Expression(text, variables)

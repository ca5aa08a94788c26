"""Arithmetic expression mini-language.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | VARIABLE | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Variables are drawn from ``x y z s t q``; functions are ``exp sin cos abs``
(one argument) and ``min max`` (two or more). Evaluation is vectorised over
numpy arrays bound to the variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import EvaluationError, ExpressionError, ExpressionSyntaxError, UnknownIdentifier

VARIABLES = frozenset("xyzstq")
UNARY_FUNCS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}
VARIADIC_FUNCS = {"min": np.minimum, "max": np.maximum}
FUNCTIONS = frozenset(UNARY_FUNCS) | frozenset(VARIADIC_FUNCS)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Neg, BinOp, Call]


# -- tokenizer ------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}",
                                        _byte_offset(src, pos), src)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg, pos=None):
        if pos is None:
            pos = self.peek()[2]
        return ExpressionSyntaxError(msg, _byte_offset(self.src, pos), self.src)

    def expect(self, text):
        kind, val, pos = self.peek()
        if val != text or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise self.error(f"expected {text!r}, found {found}")
        return self.advance()

    def parse(self) -> Node:
        tree = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise self.error(f"unexpected token {val!r}")
        return tree

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.advance()
            value = float(val)
            if not np.isfinite(value):
                raise self.error(f"numeric literal {val!r} out of range", pos)
            return Num(value)
        if kind == "name":
            self.advance()
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                return self.call(val, pos)
            raise UnknownIdentifier(val, _byte_offset(self.src, pos), self.src)
        if (kind, val) == ("op", "("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {val!r}")

    def call(self, name, pos):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[:2] == ("op", ","):
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if name in UNARY_FUNCS and len(args) != 1:
            raise self.error(f"{name} takes 1 argument, got {len(args)}", pos)
        if name in VARIADIC_FUNCS and len(args) < 2:
            raise self.error(f"{name} takes at least 2 arguments, got {len(args)}", pos)
        return Call(name, tuple(args))


def parse_expression(src: str) -> Node:
    if not isinstance(src, str):
        raise ExpressionError(f"expression must be text, got {type(src).__name__}")
    return _Parser(src).parse()


# -- printing -------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_NEG_PREC = 3
_ATOM_PREC = 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def _wrap(node: Node, min_prec: int) -> str:
    text = to_source(node)
    return text if _prec(node) >= min_prec else f"({text})"


def to_source(node: Node) -> str:
    """Print `node` with the minimum parentheses needed to reparse to an equal tree."""
    if isinstance(node, Num):
        if node.value < 0 or not np.isfinite(node.value):
            raise ExpressionError(f"literal {node.value!r} has no source form")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _NEG_PREC)
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    if node.op == "^":
        return f"{_wrap(node.left, _ATOM_PREC)}^{_wrap(node.right, _NEG_PREC)}"
    p = _PREC[node.op]
    return f"{_wrap(node.left, p)} {node.op} {_wrap(node.right, p + 1)}"


def variables(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return set().union(*(variables(a) for a in node.args))


# -- evaluation -------------------------------------------------------------------

def evaluate(node: Node, env: Mapping[str, object]):
    """Evaluate `node` with variables bound in `env` (floats or broadcastable arrays).

    Raises EvaluationError on an unbound variable, division by zero, zero to a
    negative power or any non-finite intermediate.
    """
    with np.errstate(all="ignore"):
        out = _eval(node, env)
    return out


def _finite(val, what):
    if not np.all(np.isfinite(val)):
        raise EvaluationError(f"{what} produced a non-finite value")
    return val


def _eval(node, env):
    if isinstance(node, Num):
        return np.float64(node.value)
    if isinstance(node, Var):
        try:
            return np.asarray(env[node.name], dtype=float)
        except KeyError:
            raise EvaluationError(
                f"variable {node.name} unbound in tabulation context "
                f"(bound: {', '.join(sorted(env)) or 'none'})") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        if node.name in UNARY_FUNCS:
            return _finite(UNARY_FUNCS[node.name](args[0]), f"{node.name}()")
        fn = VARIADIC_FUNCS[node.name]
        out = args[0]
        for a in args[1:]:
            out = fn(out, a)
        return out
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    op = node.op
    if op == "+":
        return _finite(left + right, "addition")
    if op == "-":
        return _finite(left - right, "subtraction")
    if op == "*":
        return _finite(left * right, "multiplication")
    if op == "/":
        if np.any(right == 0):
            raise EvaluationError("division by zero")
        return _finite(left / right, "division")
    if np.any((left == 0) & (right < 0)):
        raise EvaluationError("zero raised to a negative power")
    return _finite(np.power(left, right), "power")


class Expression:
    """A parsed expression together with its source text."""

    def __init__(self, src: str):
        self.source = src
        self.tree = parse_expression(src)

    @property
    def variables(self):
        return variables(self.tree)

    def __call__(self, **env):
        return evaluate(self.tree, env)

    def __eq__(self, other):
        return isinstance(other, Expression) and self.tree == other.tree

    def __repr__(self):
        return f"Expression({self.source!r})"

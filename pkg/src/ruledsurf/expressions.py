"""Small arithmetic expression language in one variable ``u``.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | atom ("^" factor)?
    atom   := number | "u" | "pi" | "e" | func "(" expr ")" | "(" expr ")"
    func   := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt"

Expressions are parsed into immutable trees that can be evaluated on floats
or numpy arrays, differentiated symbolically and printed back to text.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExpressionError(ValueError):
    """Base class for parse and evaluation failures."""


class ExpressionSyntaxError(ExpressionError):
    """Malformed input; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class ArityError(ExpressionSyntaxError):
    pass


class EvaluationError(ExpressionError, ArithmeticError):
    """Expression is singular at the requested point."""


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Named:
    name: str


@dataclass(frozen=True)
class Unary:
    func: str  # one of FUNCTIONS or "neg"
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Named, Unary, Binary]


# --- tokenizer / parser ----------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text, char_index):
    return len(text[:char_index].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, text, off = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", off)
        self.take()

    def parse(self):
        node = self.expr()
        kind, text, off = self.tok
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        # unary minus binds looser than ^ so that -u^2 == -(u^2); 2^-u is allowed
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            return Unary("neg", self.factor())
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            return Binary("^", base, self.factor())
        return base

    def atom(self):
        kind, text, off = self.tok
        if kind == "number":
            self.take()
            return Const(float(text))
        if kind == "ident":
            self.take()
            if text == "u":
                return Var()
            if text in CONSTANTS:
                return Named(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                if self.tok[1] == ",":
                    raise ArityError(f"{text}() takes exactly one argument", self.tok[2])
                self.expect(")")
                return Unary(text, arg)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", off)


def parse_expression(text: str) -> Node:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# --- printing --------------------------------------------------------------

def to_string(node: Node) -> str:
    """Fully parenthesized text that parses back to an equal tree."""
    if isinstance(node, Const):
        s = repr(float(node.value))
        return f"(-{s[1:]})" if s.startswith("-") else s
    if isinstance(node, Var):
        return "u"
    if isinstance(node, Named):
        return node.name
    if isinstance(node, Unary):
        if node.func == "neg":
            return f"(-{to_string(node.arg)})"
        return f"{node.func}({to_string(node.arg)})"
    return f"({to_string(node.left)} {node.op} {to_string(node.right)})"


# --- evaluation ------------------------------------------------------------

def evaluate(node: Node, u):
    """Evaluate ``node`` at ``u`` (float or array).

    Raises EvaluationError for log of non-positive values, sqrt of negative
    values, division by zero and non-finite results.
    """
    with np.errstate(all="ignore"):
        out = _eval(node, np.asarray(u, dtype=float))
    out = np.broadcast_to(out, np.shape(u)).astype(float)
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"non-finite value of {to_string(node)}")
    return float(out) if out.ndim == 0 else out


def _eval(node, u):
    if isinstance(node, Const):
        return np.float64(node.value)
    if isinstance(node, Var):
        return u
    if isinstance(node, Named):
        return np.float64(CONSTANTS[node.name])
    if isinstance(node, Unary):
        a = _eval(node.arg, u)
        f = node.func
        if f == "neg":
            return -a
        if f == "log":
            if np.any(a <= 0):
                raise EvaluationError("log of non-positive value")
            return np.log(a)
        if f == "sqrt":
            if np.any(a < 0):
                raise EvaluationError("sqrt of negative value")
            return np.sqrt(a)
        return getattr(np, f)(a)
    a = _eval(node.left, u)
    b = _eval(node.right, u)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if np.any(b == 0):
            raise EvaluationError("division by zero")
        return a / b
    if np.any((a == 0) & (b < 0)):
        raise EvaluationError("zero raised to a negative power")
    if np.any((a < 0) & (b != np.round(b))):
        raise EvaluationError("negative base with non-integer exponent")
    return np.power(a, b)


# --- symbolic differentiation ---------------------------------------------

ZERO = Const(0.0)
ONE = Const(1.0)


def _add(a, b):
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Binary("+", a, b)


def _sub(a, b):
    if b == ZERO:
        return a
    if a == ZERO:
        return _neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Binary("-", a, b)


def _mul(a, b):
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return Binary("*", a, b)


def _div(a, b):
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return Binary("/", a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.func == "neg":
        return a.arg
    return Unary("neg", a)


def _pow(a, b):
    if b == ONE:
        return a
    if b == ZERO:
        return ONE
    return Binary("^", a, b)


def derivative(node: Node) -> Node:
    """Symbolic d/du of ``node`` with light constant folding."""
    if isinstance(node, (Const, Named)):
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Unary):
        a = node.arg
        da = derivative(a)
        if da == ZERO:
            return ZERO
        f = node.func
        if f == "neg":
            return _neg(da)
        if f == "sin":
            inner = Unary("cos", a)
        elif f == "cos":
            inner = _neg(Unary("sin", a))
        elif f == "tan":
            inner = _add(ONE, _pow(Unary("tan", a), Const(2.0)))
        elif f == "exp":
            inner = Unary("exp", a)
        elif f == "log":
            return _div(da, a)
        elif f == "sqrt":
            return _div(da, _mul(Const(2.0), Unary("sqrt", a)))
        else:  # pragma: no cover
            raise ValueError(f)
        return _mul(inner, da)
    a, b = node.left, node.right
    da, db = derivative(a), derivative(b)
    op = node.op
    if op == "+":
        return _add(da, db)
    if op == "-":
        return _sub(da, db)
    if op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if op == "/":
        if db == ZERO:
            return _div(da, b)
        return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, Const(2.0)))
    # power
    if db == ZERO:
        if da == ZERO:
            return ZERO
        exponent = _sub(b, ONE)
        if isinstance(b, Const):
            exponent = Const(b.value - 1.0)
        return _mul(_mul(b, _pow(a, exponent)), da)
    # general case: a^b * (b' log a + b a'/a)
    return _mul(node, _add(_mul(db, Unary("log", a)), _div(_mul(b, da), a)))

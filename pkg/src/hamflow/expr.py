"""Scalar fields on coordinate charts: parsing, printing, evaluation and
exact symbolic partial differentiation.

Grammar (loosest to tightest binding)::

    expr   := expr ('+' | '-') expr
            | expr ('*' | '/') expr
            | '-' expr
            | expr '^' constant          (right associative)
            | func '(' expr ')' | number | coordinate | '(' expr ')'
    func   := sin | cos | exp | ln | sqrt

Coordinates are ``t``, ``x1..xn`` and either ``v1..vn`` (velocity chart) or
``p1..pn`` (momentum chart).
"""
from __future__ import annotations

import enum
import math
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union

import numpy as np

from hamflow.errors import (
    ChartMismatchError,
    DomainError,
    LexError,
    ParseError,
    UnknownIdentifierError,
)

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt")


class ChartKind(enum.Enum):
    VELOCITY = "velocity"
    MOMENTUM = "momentum"

    @property
    def prefix(self) -> str:
        return "v" if self is ChartKind.VELOCITY else "p"


@dataclass(frozen=True)
class ChartSpec:
    dimension: int
    kind: ChartKind = ChartKind.MOMENTUM

    def __post_init__(self):
        if not isinstance(self.dimension, int) or self.dimension < 1:
            raise ValueError(f"chart dimension must be a positive integer, got {self.dimension!r}")
        if not isinstance(self.kind, ChartKind):
            object.__setattr__(self, "kind", ChartKind(self.kind))

    @classmethod
    def momentum(cls, n: int) -> "ChartSpec":
        return cls(n, ChartKind.MOMENTUM)

    @classmethod
    def velocity(cls, n: int) -> "ChartSpec":
        return cls(n, ChartKind.VELOCITY)

    @cached_property
    def x_names(self) -> tuple[str, ...]:
        return tuple(f"x{i}" for i in range(1, self.dimension + 1))

    @cached_property
    def fiber_names(self) -> tuple[str, ...]:
        """Names of the velocity or momentum coordinates."""
        prefix = self.kind.prefix
        return tuple(f"{prefix}{i}" for i in range(1, self.dimension + 1))

    @cached_property
    def coordinates(self) -> tuple[str, ...]:
        return ("t",) + self.x_names + self.fiber_names

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: k for k, name in enumerate(self.coordinates)}

    def point(self, values) -> dict[str, float]:
        """Normalize a mapping or a coordinate-ordered sequence to a dict."""
        if isinstance(values, Mapping):
            missing = [c for c in self.coordinates if c not in values]
            if missing:
                raise ValueError(f"point is missing coordinates {missing}")
            return {c: float(values[c]) for c in self.coordinates}
        values = np.asarray(values, dtype=float).ravel()
        if values.shape[0] != len(self.coordinates):
            raise ValueError(
                f"point needs {len(self.coordinates)} coordinates, got {values.shape[0]}"
            )
        return dict(zip(self.coordinates, values.tolist()))


# --------------------------------------------------------------------------
# AST

class Node:
    __slots__ = ()
    precedence = 100


@dataclass(frozen=True)
class Const(Node):
    value: float

    @property
    def precedence(self):
        return 30 if self.value < 0 else 100


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node
    precedence = 30


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    @property
    def precedence(self):
        return _BINARY_POWER[self.op]


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node


_BINARY_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_POWER = 30

ZERO = Const(0.0)
ONE = Const(1.0)


def is_const(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


# --------------------------------------------------------------------------
# smart constructors: light simplification only

def _apply_func(name: str, x: float) -> float:
    if name == "ln":
        if x <= 0.0:
            raise ValueError
        return math.log(x)
    if name == "sqrt":
        if x < 0.0:
            raise ValueError
        return math.sqrt(x)
    return getattr(math, name)(x)


def _apply_pow(base: float, exponent: float) -> float:
    if base == 0.0 and exponent < 0:
        raise ValueError
    if base < 0.0 and not float(exponent).is_integer():
        raise ValueError
    return base ** exponent


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if is_const(a, 0.0):
        return b
    if is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if is_const(b, 0.0):
        return a
    if is_const(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if is_const(a, 0.0) or is_const(b, 0.0):
        return ZERO
    if is_const(a, 1.0):
        return b
    if is_const(b, 1.0):
        return a
    if is_const(a, -1.0):
        return neg(b)
    if is_const(b, -1.0):
        return neg(a)
    return BinOp("*", a, b)


def div(a: Node, b: Node) -> Node:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if is_const(b, 1.0):
        return a
    if is_const(a, 0.0) and not is_const(b, 0.0):
        return ZERO
    return BinOp("/", a, b)


def power(a: Node, exponent: float) -> Node:
    if exponent == 0.0:
        return ONE
    if exponent == 1.0:
        return a
    if isinstance(a, Const):
        try:
            return Const(_apply_pow(a.value, exponent))
        except (ValueError, OverflowError, ZeroDivisionError):
            pass
    return BinOp("^", a, Const(float(exponent)))


def call(func: str, a: Node) -> Node:
    if func not in FUNCTIONS:
        raise ValueError(f"unknown function {func!r}")
    if isinstance(a, Const):
        try:
            return Const(_apply_func(func, a.value))
        except (ValueError, OverflowError):
            pass
    return Call(func, a)


_BUILD = {"+": add, "-": sub, "*": mul, "/": div}


def binary(op: str, a: Node, b: Node) -> Node:
    if op == "^":
        if not isinstance(b, Const):
            raise ValueError("exponent of ^ must be a constant")
        return power(a, b.value)
    return _BUILD[op](a, b)


def simplify(node: Node) -> Node:
    """Rebuild bottom-up through the smart constructors."""
    if isinstance(node, (Const, Var)):
        return node
    if isinstance(node, Neg):
        return neg(simplify(node.arg))
    if isinstance(node, Call):
        return call(node.func, simplify(node.arg))
    return binary(node.op, simplify(node.left), simplify(node.right))


# --------------------------------------------------------------------------
# printing

def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def to_text(node: Node) -> str:
    if isinstance(node, Const):
        return _format_number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, node.arg.precedence < _UNARY_POWER)
    prec = node.precedence
    if node.op == "^":
        left = _wrap(node.left, node.left.precedence <= prec)
        right = _wrap(node.right, node.right.precedence < prec)
        return f"{left}^{right}"
    left = _wrap(node.left, node.left.precedence < prec)
    right = _wrap(node.right, node.right.precedence <= prec)
    return f"{left} {node.op} {right}" if prec == 10 else f"{left}{node.op}{right}"


def _wrap(node: Node, parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if parens else text


# --------------------------------------------------------------------------
# lexing and parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise LexError(source[pos], pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    """Pratt parser over the token list."""

    def __init__(self, source: str, chart: ChartSpec):
        self.tokens = tokenize(source)
        self.pos = 0
        self.chart = chart

    @property
    def token(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if self.token.text != text:
            found = self.token.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", self.token.offset)
        return self.advance()

    def parse(self) -> Node:
        node = self.expression(0)
        if self.token.kind != "end":
            raise ParseError(f"unexpected {self.token.text!r}", self.token.offset)
        return node

    def lbp(self, tok: Token) -> int:
        if tok.kind == "op" and tok.text in _BINARY_POWER:
            return _BINARY_POWER[tok.text]
        return 0

    def expression(self, rbp: int) -> Node:
        left = self.nud(self.advance())
        while rbp < self.lbp(self.token):
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: Token) -> Node:
        if tok.kind == "number":
            return Const(float(tok.text))
        if tok.kind == "ident":
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expression(0)
                self.expect(")")
                return call(tok.text, arg)
            if tok.text not in self.chart.index:
                raise UnknownIdentifierError(tok.text, tok.offset, self.chart)
            return Var(tok.text)
        if tok.text == "-":
            return neg(self.expression(_UNARY_POWER))
        if tok.text == "+":
            return self.expression(_UNARY_POWER)
        if tok.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        found = tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", tok.offset)

    def led(self, tok: Token, left: Node) -> Node:
        if tok.text == "^":
            exponent = simplify(self.expression(_BINARY_POWER["^"] - 1))
            if not isinstance(exponent, Const):
                raise ParseError("exponent of ^ must be a constant", tok.offset)
            return power(left, exponent.value)
        right = self.expression(_BINARY_POWER[tok.text])
        return _BUILD[tok.text](left, right)


# --------------------------------------------------------------------------
# evaluation

Evaluator = Callable[[Mapping[str, float]], float]


def _domain(message: str, node: Node):
    raise DomainError(message, to_text(node))


def compile_node(node: Node) -> Evaluator:
    """Compile an AST into a closure over an environment mapping.

    Overflow yields an infinity rather than an exception so numerical
    drivers can report where their state stopped being finite;
    ``ScalarField.eval`` turns any non-finite result into a DomainError.
    """
    if isinstance(node, Const):
        value = node.value
        return lambda env: value
    if isinstance(node, Var):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        inner = compile_node(node.arg)
        return lambda env: -inner(env)
    if isinstance(node, Call):
        inner = compile_node(node.arg)
        func = node.func
        if func == "ln":
            def ln(env):
                x = inner(env)
                if x <= 0.0:
                    _domain(f"ln of non-positive value {x!r}", node)
                return math.log(x)
            return ln
        if func == "sqrt":
            def sqrt(env):
                x = inner(env)
                if x < 0.0:
                    _domain(f"sqrt of negative value {x!r}", node)
                return math.sqrt(x)
            return sqrt
        if func == "exp":
            def exp(env):
                try:
                    return math.exp(inner(env))
                except OverflowError:
                    return math.inf
            return exp
        f = getattr(math, func)

        def trig(env):
            try:
                return f(inner(env))
            except ValueError:  # sin/cos of an infinity
                return math.nan
        return trig

    left = compile_node(node.left)
    op = node.op
    if op == "^":
        k = node.right.value
        if float(k).is_integer():
            ik = int(k)

            def ipow(env):
                b = left(env)
                if b == 0.0 and ik < 0:
                    _domain("zero raised to a negative power", node)
                try:
                    return b ** ik
                except OverflowError:
                    return math.copysign(math.inf, b) if ik % 2 else math.inf
            return ipow

        def fpow(env):
            b = left(env)
            if b < 0.0:
                _domain(f"negative base {b!r} with non-integer exponent", node)
            if b == 0.0 and k < 0:
                _domain("zero raised to a negative power", node)
            try:
                return b ** k
            except OverflowError:
                return math.inf
        return fpow

    right = compile_node(node.right)
    if op == "+":
        return lambda env: left(env) + right(env)
    if op == "-":
        return lambda env: left(env) - right(env)
    if op == "*":
        return lambda env: left(env) * right(env)

    def divide(env):
        d = right(env)
        if d == 0.0:
            _domain("division by zero", node)
        return left(env) / d
    return divide


# --------------------------------------------------------------------------
# symbolic differentiation

def diff_node(node: Node, coord: str) -> Node:
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == coord else ZERO
    if isinstance(node, Neg):
        return neg(diff_node(node.arg, coord))
    if isinstance(node, Call):
        a = node.arg
        da = diff_node(a, coord)
        if is_const(da, 0.0):
            return ZERO
        if node.func == "sin":
            return mul(da, call("cos", a))
        if node.func == "cos":
            return neg(mul(da, call("sin", a)))
        if node.func == "exp":
            return mul(da, node)
        if node.func == "ln":
            return div(da, a)
        return div(da, mul(Const(2.0), node))  # sqrt
    a, b = node.left, node.right
    if node.op == "^":
        k = b.value
        da = diff_node(a, coord)
        return mul(mul(Const(k), power(a, k - 1.0)), da)
    da, db = diff_node(a, coord), diff_node(b, coord)
    if node.op == "+":
        return add(da, db)
    if node.op == "-":
        return sub(da, db)
    if node.op == "*":
        return add(mul(da, b), mul(a, db))
    # quotient rule
    if is_const(db, 0.0):
        return div(da, b)
    return div(sub(mul(da, b), mul(a, db)), power(b, 2.0))


def free_variables(node: Node) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, (Neg, Call)):
        return free_variables(node.arg)
    return free_variables(node.left) | free_variables(node.right)


# --------------------------------------------------------------------------
# ScalarField

Operand = Union["ScalarField", float, int]


@dataclass(frozen=True)
class ScalarField:
    chart: ChartSpec
    body: Node

    @classmethod
    def constant(cls, chart: ChartSpec, value: float) -> "ScalarField":
        return cls(chart, Const(float(value)))

    @classmethod
    def coordinate(cls, chart: ChartSpec, name: str) -> "ScalarField":
        if name not in chart.index:
            raise UnknownIdentifierError(name, 0, chart)
        return cls(chart, Var(name))

    @cached_property
    def evaluator(self) -> Evaluator:
        return compile_node(self.body)

    @cached_property
    def free_variables(self) -> frozenset[str]:
        return free_variables(self.body)

    @property
    def is_zero(self) -> bool:
        return is_const(self.body, 0.0)

    def eval(self, point) -> float:
        env = point if isinstance(point, dict) else self.chart.point(point)
        value = self.evaluator(env)
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r}", to_text(self.body))
        return float(value)

    __call__ = eval

    def diff(self, coord: str) -> "ScalarField":
        if coord not in self.chart.index:
            raise UnknownIdentifierError(coord, 0, self.chart)
        return ScalarField(self.chart, diff_node(self.body, coord))

    def __str__(self):
        return to_text(self.body)

    def __repr__(self):
        return f"ScalarField({to_text(self.body)!r}, n={self.chart.dimension}, {self.chart.kind.value})"

    # arithmetic, with the same light simplification as diff
    def _lift(self, other: Operand) -> Node:
        if isinstance(other, ScalarField):
            if other.chart != self.chart:
                raise ChartMismatchError(f"chart mismatch: {self.chart} vs {other.chart}")
            return other.body
        if isinstance(other, (int, float)):
            return Const(float(other))
        return NotImplemented

    def _binary(self, build, other, reflected=False):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        a, b = (o, self.body) if reflected else (self.body, o)
        return ScalarField(self.chart, build(a, b))

    def __add__(self, other):
        return self._binary(add, other)

    def __radd__(self, other):
        return self._binary(add, other, True)

    def __sub__(self, other):
        return self._binary(sub, other)

    def __rsub__(self, other):
        return self._binary(sub, other, True)

    def __mul__(self, other):
        return self._binary(mul, other)

    def __rmul__(self, other):
        return self._binary(mul, other, True)

    def __truediv__(self, other):
        return self._binary(div, other)

    def __rtruediv__(self, other):
        return self._binary(div, other, True)

    def __neg__(self):
        return ScalarField(self.chart, neg(self.body))

    def __pow__(self, exponent: float):
        return ScalarField(self.chart, power(self.body, float(exponent)))


def parse(source: str, chart: ChartSpec) -> ScalarField:
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression", 0)
    return ScalarField(chart, _Parser(source, chart).parse())


def as_field(value, chart: ChartSpec) -> ScalarField:
    """Accept a ScalarField, expression text or a number."""
    if isinstance(value, ScalarField):
        if value.chart != chart:
            raise ChartMismatchError(f"chart mismatch: {value.chart} vs {chart}")
        return value
    if isinstance(value, str):
        return parse(value, chart)
    return ScalarField.constant(chart, float(value))


def evaluate(f: ScalarField, point) -> float:
    return f.eval(point)


def diff(f: ScalarField, coord: str) -> ScalarField:
    return f.diff(coord)


def fd_step(value: float) -> float:
    return np.finfo(float).eps ** (1.0 / 3.0) * max(1.0, abs(value))


def fd_check(f: ScalarField, coord: str, point) -> tuple[float, float]:
    """Return (symbolic, central-difference) values of df/dcoord at point."""
    env = f.chart.point(point)
    symbolic = f.diff(coord).eval(env)
    h = fd_step(env[coord])
    hi, lo = dict(env), dict(env)
    hi[coord] += h
    lo[coord] -= h
    # the actual spacing differs from 2h by rounding
    numeric = (f.eval(hi) - f.eval(lo)) / (hi[coord] - lo[coord])
    return symbolic, float(numeric)


def evaluate_many(f: ScalarField, points: np.ndarray) -> np.ndarray:
    names = f.chart.coordinates
    return np.array([f.eval(dict(zip(names, row))) for row in np.asarray(points, dtype=float).tolist()])

"""Scalar expressions in ``x`` and ``y``: parsing, evaluation, symbolic derivatives.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
    func   := 'sin' | 'cos' | 'exp' | 'ln'

Note that unary minus binds tighter than ``^``, so ``-x^2`` is ``(-x)^2``.

Evaluation accepts floats or numpy arrays (broadcast together) and is the
only place coefficient data is turned into numbers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Pi",
    "Neg",
    "BinOp",
    "Call",
    "ParseError",
    "EvaluationError",
    "parse",
    "evaluate",
    "differentiate",
    "to_text",
    "is_constant",
]


class ParseError(ValueError):
    """Raised for malformed expression text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class EvaluationError(ArithmeticError):
    """Raised when a guarded operation (division, ln, power) leaves its domain."""


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __call__(self, x, y):
        return evaluate(self, x, y)

    def __str__(self):
        return to_text(self)

    def diff(self, var: str) -> "Expr":
        return differentiate(self, var)


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str  # 'x' or 'y'


@dataclass(frozen=True, eq=True)
class Pi(Expr):
    pass


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str  # sin cos exp ln
    arg: Expr


FUNCTIONS = ("sin", "cos", "exp", "ln")

# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.factor())
        return left

    def factor(self):
        base = self.unary()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def unary(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in ("x", "y"):
                return Var(text)
            if text == "pi":
                return Pi()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"expected an operand, found {found}", pos)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    >>> evaluate(parse("x^2+y"), 2.0, 1.0)
    5.0
    """
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text).parse()


# ------------------------------------------------------------- evaluation


def _fail(node: Expr, what: str):
    raise EvaluationError(f"{what} in subterm '{to_text(node)}'")


def _eval(e: Expr, x, y):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x if e.name == "x" else y
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Neg):
        return -_eval(e.arg, x, y)
    if isinstance(e, BinOp):
        a = _eval(e.left, x, y)
        b = _eval(e.right, x, y)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if np.any(np.asarray(b) == 0):
                _fail(e, "division by zero")
            return a / b
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            r = np.power(np.asarray(a, dtype=float), b)
        bad = ~np.isfinite(r) & np.isfinite(a) & np.isfinite(b)
        if np.any(bad):
            _fail(e, "power outside its real domain")
        return r
    if isinstance(e, Call):
        a = _eval(e.arg, x, y)
        f = e.func
        if f == "sin":
            return np.sin(a)
        if f == "cos":
            return np.cos(a)
        if f == "exp":
            return np.exp(a)
        if np.any(np.asarray(a) <= 0):
            _fail(e, "logarithm of a non-positive value")
        return np.log(a)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, x, y):
    """Evaluate ``e`` at ``(x, y)``; scalars give a float, arrays broadcast."""
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    if scalar:
        x = float(x)
        y = float(y)
    else:
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r = _eval(e, x, y)
    if scalar:
        return float(r)
    return np.broadcast_to(np.asarray(r, dtype=float), x.shape).copy()


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _num_text(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot print non-finite literal {v}")
    s = repr(abs(v))
    return f"(-{s})" if math.copysign(1.0, v) < 0 else s


def to_text(e: Expr) -> str:
    """Render ``e`` in the input grammar; ``parse(to_text(e))`` evaluates identically."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        return f"-({to_text(e.arg)})"
    if isinstance(e, BinOp):
        return f"{_operand(e.left)}{e.op}{_operand(e.right)}"
    raise TypeError(f"not an expression node: {e!r}")


def _operand(e: Expr) -> str:
    if isinstance(e, (Var, Pi, Call)) or (isinstance(e, Num) and e.value >= 0):
        return to_text(e)
    if isinstance(e, Num):
        return _num_text(e.value)
    return f"({to_text(e)})"


# ---------------------------------------------------------- differentiation
# The smart constructors only drop exact zeros/ones and fold literal-literal
# arithmetic, which is the same IEEE operation evaluation would perform.

ZERO = Num(0.0)
ONE = Num(1.0)


def _is(e, v):
    return isinstance(e, Num) and e.value == v


def _add(a, b):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def _sub(a, b):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def _div(a, b):
    if _is(b, 1.0):
        return a
    if _is(a, 0.0):
        return ZERO
    return BinOp("/", a, b)


def _neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _pow(a, b):
    if _is(b, 1.0):
        return a
    return BinOp("^", a, b)


def is_constant(e: Expr) -> bool:
    """True when ``e`` contains neither ``x`` nor ``y``."""
    if isinstance(e, (Num, Pi)):
        return True
    if isinstance(e, Var):
        return False
    if isinstance(e, (Neg, Call)):
        return is_constant(e.arg)
    return is_constant(e.left) and is_constant(e.right)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic partial derivative of ``e`` with respect to ``var``."""
    if var not in ("x", "y"):
        raise ValueError(f"can only differentiate with respect to x or y, not {var!r}")
    return _d(e, var)


def _d(e: Expr, v: str) -> Expr:
    if isinstance(e, (Num, Pi)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return _neg(_d(e.arg, v))
    if isinstance(e, Call):
        da = _d(e.arg, v)
        if _is(da, 0.0):
            return ZERO
        if e.func == "sin":
            outer = Call("cos", e.arg)
        elif e.func == "cos":
            outer = _neg(Call("sin", e.arg))
        elif e.func == "exp":
            outer = e
        else:
            return _div(da, e.arg)
        return _mul(da, outer)
    a, b = e.left, e.right
    if e.op == "+":
        return _add(_d(a, v), _d(b, v))
    if e.op == "-":
        return _sub(_d(a, v), _d(b, v))
    if e.op == "*":
        return _add(_mul(_d(a, v), b), _mul(a, _d(b, v)))
    if e.op == "/":
        num = _sub(_mul(_d(a, v), b), _mul(a, _d(b, v)))
        return _div(num, _pow(b, Num(2.0)))
    # power
    da = _d(a, v)
    if is_constant(b):
        return _mul(_mul(b, _pow(a, _sub(b, ONE))), da)
    # a^b = exp(b ln a) for a non-constant exponent
    db = _d(b, v)
    inner = _add(_mul(db, Call("ln", a)), _div(_mul(b, da), a))
    return _mul(e, inner)

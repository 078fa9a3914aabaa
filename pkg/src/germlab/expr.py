"""A small closed-form expression language.

Expressions are parsed over a declared variable set and can be evaluated at a
point (exactly, in floats, in mpmath, or elementwise on numpy arrays) or
expanded as a jet at the origin.

Grammar::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' '-'? INTEGER)?
    atom  := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``flat(e)`` is ``exp(-1/e^2)`` extended by zero where ``e = 0``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .exceptions import DomainError, NotExpandableAtOrigin, ParseError, UsageError
from .jets import DEFAULT_DEGREE, Jet1, Jet2, is_zero

FUNCTIONS = ("sqrt", "exp", "log", "neg", "flat")

__all__ = [
    "BinOp",
    "Const",
    "Expr",
    "Func",
    "Pow",
    "Var",
    "eval_array",
    "eval_numeric",
    "parse",
    "to_text",
    "taylor",
]


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: object


@dataclass(frozen=True)
class Expr:
    """A parsed expression together with its ordered variable set."""

    root: object
    variables: tuple

    def __str__(self):
        return to_text(self.root)

    def __call__(self, *point):
        return eval_numeric(self, point)

    def taylor(self, degree=DEFAULT_DEGREE, exact=True):
        return taylor(self, degree, exact)

    def uses(self):
        return _free_vars(self.root)


def _free_vars(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, BinOp):
        return _free_vars(node.left) | _free_vars(node.right)
    if isinstance(node, Pow):
        return _free_vars(node.base)
    if isinstance(node, Func):
        return _free_vars(node.arg)
    return set()


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\S))")


def _tokenize(text):
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1) is not None:
            out.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(m.start(3), f"unexpected character {ch!r}")
            out.append(("op", ch, m.start(3)))
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

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value or tok[0] not in ("op",):
            raise ParseError(tok[2], f"expected {value!r}")
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(tok[2], f"unexpected {tok[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Func("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            sign = 1
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "-":
                self.take()
                sign = -1
            nxt = self.take()
            if nxt[0] != "num" or not nxt[1].isdigit():
                raise ParseError(nxt[2], "exponent must be an integer literal")
            return Pow(base, sign * int(nxt[1]))
        return base

    def atom(self):
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Const(Fraction(val))
        if kind == "name":
            if val in FUNCTIONS:
                nxt = self.peek()
                if not (nxt[0] == "op" and nxt[1] == "("):
                    raise ParseError(nxt[2], f"expected '(' after {val}")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            if val not in self.variables:
                raise ParseError(pos, f"unknown variable {val!r}; allowed: {', '.join(self.variables)}")
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError(pos, "unexpected end of input")
        raise ParseError(pos, f"unexpected {val!r}")


def parse(text, variables=("x", "y")):
    """Parse ``text`` over the ordered ``variables``; returns an :class:`Expr`."""
    if isinstance(variables, str):
        variables = tuple(variables)
    variables = tuple(variables)
    if not isinstance(text, str):
        raise UsageError("expression must be a string")
    return Expr(_Parser(text, variables).parse(), variables)


# ---------------------------------------------------------------------------
# printing


def _const_text(v):
    if v.denominator == 1:
        return str(v.numerator)
    den = v.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        places = max(twos, fives)
        scaled = v.numerator * 10 ** places // v.denominator
        sign = "-" if scaled < 0 else ""
        digits = str(abs(scaled)).rjust(places + 1, "0")
        return f"{sign}{digits[:-places]}.{digits[-places:]}"
    return f"({v.numerator}/{v.denominator})"


def to_text(node):
    """Print an AST so that parsing the text gives back the same tree."""
    if isinstance(node, Expr):
        node = node.root
    if isinstance(node, Const):
        return _const_text(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, BinOp):
        def side(n):
            s = to_text(n)
            return f"({s})" if isinstance(n, BinOp) else s
        return f"{side(node.left)} {node.op} {side(node.right)}"
    if isinstance(node, Pow):
        b = to_text(node.base)
        if not isinstance(node.base, (Var, Func)) and not (
            isinstance(node.base, Const) and node.base.value.denominator == 1
        ):
            b = f"({b})"
        return f"{b}^{node.exponent}"
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# numeric evaluation


def _subst(node, table):
    if isinstance(node, Var):
        return table.get(node.name, node)
    if isinstance(node, BinOp):
        return BinOp(node.op, _subst(node.left, table), _subst(node.right, table))
    if isinstance(node, Pow):
        return Pow(_subst(node.base, table), node.exponent)
    if isinstance(node, Func):
        return Func(node.name, _subst(node.arg, table))
    return node


def substitute(expr, mapping, variables):
    """Replace variables by expressions (given as Expr or text over ``variables``)."""
    table = {}
    for name, e in mapping.items():
        if not isinstance(e, Expr):
            e = parse(e, variables)
        table[name] = e.root
    return Expr(_subst(expr.root, table), tuple(variables))


def _bind(expr, point):
    if isinstance(point, dict):
        env = dict(point)
        missing = [v for v in expr.variables if v not in env]
        if missing:
            raise UsageError(f"missing values for {missing}")
        return env
    point = tuple(point)
    if len(point) != len(expr.variables):
        raise UsageError(f"expected {len(expr.variables)} coordinates, got {len(point)}")
    return dict(zip(expr.variables, point))


def _num(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return v


def _is_mp(v):
    return isinstance(v, (mpmath.mpf, mpmath.mpc))


def _sqrt(v):
    if v < 0:
        raise DomainError(f"sqrt of negative value {v}")
    if isinstance(v, Fraction):
        n, d = math.isqrt(v.numerator), math.isqrt(v.denominator)
        if n * n == v.numerator and d * d == v.denominator:
            return Fraction(n, d)
        return math.sqrt(v)
    return mpmath.sqrt(v) if _is_mp(v) else math.sqrt(v)


def _exp(v):
    if v == 0 and isinstance(v, Fraction):
        return Fraction(1)
    if _is_mp(v):
        return mpmath.exp(v)
    try:
        return math.exp(v)
    except OverflowError as exc:
        raise DomainError(f"exp overflow at {v}") from exc


def _log(v):
    if v <= 0:
        raise DomainError(f"log of non-positive value {v}")
    if v == 1 and isinstance(v, Fraction):
        return Fraction(0)
    return mpmath.log(v) if _is_mp(v) else math.log(v)


def _flat(v):
    if v == 0:
        return Fraction(0) if isinstance(v, Fraction) else v * 0
    if _is_mp(v):
        return mpmath.exp(-1 / (v * v))
    return math.exp(-1.0 / (float(v) * float(v)))


def _match(a, b):
    """Bring a Fraction operand to the other operand's arithmetic."""
    if isinstance(a, Fraction) and not isinstance(b, Fraction):
        a = mpmath.mpf(a.numerator) / a.denominator if _is_mp(b) else float(a)
    elif isinstance(b, Fraction) and not isinstance(a, Fraction):
        b = mpmath.mpf(b.numerator) / b.denominator if _is_mp(a) else float(b)
    return a, b


def _eval(node, env):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, BinOp):
        a, b = _match(_eval(node.left, env), _eval(node.right, env))
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise DomainError("division by zero")
        return a / b
    if isinstance(node, Pow):
        a = _eval(node.base, env)
        if node.exponent < 0 and a == 0:
            raise DomainError("negative power of zero")
        return a ** node.exponent
    if isinstance(node, Func):
        a = _eval(node.arg, env)
        if node.name == "neg":
            return -a
        if node.name == "sqrt":
            return _sqrt(a)
        if node.name == "exp":
            return _exp(a)
        if node.name == "log":
            return _log(a)
        if node.name == "flat":
            return _flat(a)
    raise TypeError(f"not an expression node: {node!r}")


def eval_numeric(expr, point):
    """Value of ``expr`` at ``point`` (tuple in variable order, or a dict).

    Rational inputs stay exact until a transcendental step; float and mpmath
    inputs are evaluated in their own arithmetic.
    """
    env = {k: _num(v) for k, v in _bind(expr, point).items()}
    return _eval(expr.root, env)


def _eval_arr(node, env):
    if isinstance(node, Const):
        return float(node.value)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, BinOp):
        a = _eval_arr(node.left, env)
        b = _eval_arr(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return np.divide(a, b, out=np.full(np.broadcast(a, b).shape, np.nan), where=np.asarray(b) != 0)
    if isinstance(node, Pow):
        a = np.asarray(_eval_arr(node.base, env), dtype=float)
        if node.exponent < 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(a == 0, np.nan, np.power(np.where(a == 0, 1.0, a), node.exponent))
        return a ** node.exponent
    if isinstance(node, Func):
        a = np.asarray(_eval_arr(node.arg, env), dtype=float)
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            if node.name == "neg":
                return -a
            if node.name == "sqrt":
                return np.where(a >= 0, np.sqrt(np.abs(a)), np.nan)
            if node.name == "exp":
                return np.exp(a)
            if node.name == "log":
                return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)
            if node.name == "flat":
                safe = np.where(a == 0, 1.0, a)
                return np.where(a == 0, 0.0, np.exp(-1.0 / (safe * safe)))
    raise TypeError(f"not an expression node: {node!r}")


def eval_array(expr, *arrays):
    """Elementwise float evaluation on numpy arrays; points outside the domain give NaN."""
    if len(arrays) != len(expr.variables):
        raise UsageError(f"expected {len(expr.variables)} arrays")
    env = {k: np.asarray(v, dtype=float) for k, v in zip(expr.variables, arrays)}
    out = _eval_arr(expr.root, env)
    return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(*env.values()).shape).copy()


# ---------------------------------------------------------------------------
# Taylor mode


def _origin_value(node, variables):
    """Value of a subexpression at the origin, or None outside the domain."""
    try:
        return _eval(node, {v: Fraction(0) for v in variables})
    except DomainError:
        return None


def _jet_div(a, b):
    c0 = b.constant_term
    if not is_zero(c0):
        return a / b
    if isinstance(b, Jet1):
        k = b.order()
        if k is None or (a.order() is not None and a.order() < k):
            raise NotExpandableAtOrigin("quotient is not expandable at the origin")
        if a.order() is None:
            return a * 0
        return a.shift_down(k) / b.shift_down(k)
    raise NotExpandableAtOrigin("divisor vanishes at the origin")


def taylor(expr, degree=DEFAULT_DEGREE, exact=True):
    """Jet of ``expr`` at the origin: Jet1 for one variable, Jet2 (x, y order) for two."""
    nv = len(expr.variables)
    if nv == 1:
        gens = {expr.variables[0]: Jet1.variable(degree, exact)}
        one = Jet1.constant(1 if exact else 1.0, degree)
    elif nv == 2:
        gens = {expr.variables[0]: Jet2.x(degree, exact), expr.variables[1]: Jet2.y(degree, exact)}
        one = Jet2.constant(1 if exact else 1.0, degree)
    else:
        raise UsageError("taylor supports one or two variables")

    def const(v):
        return one * (v if exact else float(v))

    def walk(n):
        if isinstance(n, Const):
            return const(n.value)
        if isinstance(n, Var):
            return gens[n.name]
        if isinstance(n, BinOp):
            a, b = walk(n.left), walk(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            return _jet_div(a, b)
        if isinstance(n, Pow):
            a = walk(n.base)
            if n.exponent < 0:
                if is_zero(a.constant_term):
                    raise NotExpandableAtOrigin("negative power of a series vanishing at 0")
                return a.reciprocal() ** (-n.exponent)
            return a ** n.exponent
        if isinstance(n, Func):
            if n.name == "flat":
                v0 = _origin_value(n.arg, expr.variables)
                if v0 == 0:
                    return one * 0
                if exact:
                    raise NotExpandableAtOrigin("flat of a non-vanishing argument has an irrational jet; use float mode")
                a = walk(n.arg)
                return (-(a * a).reciprocal()).exp()
            a = walk(n.arg)
            if n.name == "neg":
                return -a
            c0 = a.constant_term
            if n.name == "sqrt":
                if is_zero(c0) or c0 < 0:
                    raise NotExpandableAtOrigin(f"sqrt of a series with constant term {c0}")
                return a.sqrt_unit()
            if n.name == "log":
                if is_zero(c0) or c0 < 0:
                    raise NotExpandableAtOrigin(f"log of a series with constant term {c0}")
                return a.log()
            if n.name == "exp":
                return a.exp()
        raise TypeError(f"not an expression node: {n!r}")

    return walk(expr.root)


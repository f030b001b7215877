"""Scenario expression language.

Recursive-descent parser and evaluators for the small deterministic language
in which scenario data (metric entries, potentials, Lagrangians) is written.
Variables are the jet-bundle coordinates `t1..tp`, `x1..xn` and `v<i>_<a>`
(the partial velocity of x<i> along t<a>); operators are + - * / ^ with the
usual precedence (^ binds tightest and associates right, then unary minus,
then * /, then + -); functions are sin cos tan exp log sqrt sinh cosh.
Exponents must be constant subexpressions; integer exponents are evaluated
by repeated multiplication, fractional ones require a positive base.

Expressions are immutable after parsing and evaluation is pure, so both can
be shared freely between concurrent workers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from . import jets
from .errors import DomainError, ParseError

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")

_VAR_RE = re.compile(r"^(t(\d+)|x(\d+)|v(\d+)_(\d+))$")


# -- AST -----------------------------------------------------------------------


class Expr:
    """Base class of expression nodes; instances are immutable."""

    __slots__ = ()

    def __str__(self):
        return unparse(self)


@dataclass(frozen=True, slots=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Call(Expr):
    fn: str
    arg: Expr


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    lhs: Expr
    rhs: Expr


def num(v):
    return Num(float(v))


def var(name):
    return Var(name)


def add(a, b):
    return BinOp("+", a, b)


def sub(a, b):
    return BinOp("-", a, b)


def mul(a, b):
    return BinOp("*", a, b)


def div(a, b):
    return BinOp("/", a, b)


# -- tokenizer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(source):
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(source):
        if source[pos] == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            bad_at = len(source) - len(stripped)
            raise ParseError(
                f"unexpected character {source[bad_at]!r}",
                line,
                bad_at - line_start + 1,
            )
        kind = m.lastgroup
        text = m.group(kind)
        col = m.start(kind) - line_start + 1
        tokens.append((kind, text, line, col))
        pos = m.end()
    tokens.append(("end", "", line, len(source) - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens, dims):
        self.tokens = tokens
        self.i = 0
        self.p, self.n = dims

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, tok[2], tok[3])

    def expect_op(self, op):
        kind, text, _, _ = self.peek()
        if kind != "op" or text != op:
            self.fail(f"expected '{op}'")
        return self.take()

    def parse(self):
        e = self.expression()
        kind, text, _, _ = self.peek()
        if kind != "end":
            self.fail(f"unexpected token {text!r}")
        return e

    def expression(self):
        e = self.term()
        while True:
            kind, text, _, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                e = BinOp(text, e, self.term())
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, text, _, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                e = BinOp(text, e, self.unary())
            else:
                return e

    def unary(self):
        kind, text, _, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, line, col = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "ident":
            self.take()
            nxt_kind, nxt_text, _, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in FUNCTIONS:
                    raise ParseError(
                        f"unknown function {text!r} (expected one of {', '.join(FUNCTIONS)})",
                        line,
                        col,
                    )
                self.take()
                arg = self.expression()
                self.expect_op(")")
                return Call(text, arg)
            return Var(self._check_var(text, line, col))
        if kind == "op" and text == "(":
            self.take()
            e = self.expression()
            self.expect_op(")")
            return e
        self.fail(
            "expected a number, variable, function call or '('"
            if kind != "end"
            else "unexpected end of input"
        )

    def _check_var(self, name, line, col):
        m = _VAR_RE.match(name)
        if m is None:
            raise ParseError(
                f"unknown identifier {name!r} (variables are t<k>, x<k>, v<i>_<a>)",
                line,
                col,
            )
        if m.group(2) is not None:
            k = int(m.group(2))
            if not 1 <= k <= self.p:
                raise ParseError(f"temporal index out of range: {name} (p={self.p})", line, col)
        elif m.group(3) is not None:
            k = int(m.group(3))
            if not 1 <= k <= self.n:
                raise ParseError(f"spatial index out of range: {name} (n={self.n})", line, col)
        else:
            i, a = int(m.group(4)), int(m.group(5))
            if not (1 <= i <= self.n and 1 <= a <= self.p):
                raise ParseError(
                    f"velocity index out of range: {name} (n={self.n}, p={self.p})", line, col
                )
        return name


def parse(source, dims):
    """Parse an expression for a scenario of dimensions dims = (p, n)."""
    p, n = dims
    if p < 1 or n < 1:
        raise ParseError(f"dimensions must be at least 1, got (p={p}, n={n})")
    if not source or not source.strip():
        raise ParseError("empty expression")
    return _Parser(_tokenize(source), (p, n)).parse()


# -- printing --------------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def unparse(e):
    """Render an Expr to source that reparses to a structurally identical AST."""
    return _unparse(e, 0)


def _unparse(e, parent_prec):
    if isinstance(e, Num):
        text = repr(e.value)
        return text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = _unparse(e.arg, _PRECEDENCE["neg"])
        text = f"-{inner}"
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if isinstance(e, Call):
        return f"{e.fn}({_unparse(e.arg, 0)})"
    if isinstance(e, BinOp):
        prec = _PRECEDENCE[e.op]
        if e.op == "^":
            # right-associative; the grammar parses the exponent as a unary
            lhs = _unparse(e.lhs, prec + 1)
            rhs = _unparse(e.rhs, prec)
        else:
            # left-associative: force parens on a same-precedence right child
            lhs = _unparse(e.lhs, prec)
            rhs = _unparse(e.rhs, prec + 1)
        text = f"{lhs} {e.op} {rhs}" if e.op != "^" else f"{lhs}^{rhs}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"not an Expr: {e!r}")


# -- analysis ---------------------------------------------------------------------


def free_vars(e):
    """Syntactic variable set of an expression ('0*t1' still mentions t1)."""
    out = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, Call):
            stack.append(node.arg)
        elif isinstance(node, BinOp):
            stack.append(node.lhs)
            stack.append(node.rhs)
    return out


def is_constant(e):
    return not free_vars(e)


# -- evaluation --------------------------------------------------------------------

_JET_FUNCTIONS = {
    "sin": jets.sin,
    "cos": jets.cos,
    "tan": jets.tan,
    "exp": jets.exp,
    "log": jets.log,
    "sqrt": jets.sqrt,
    "sinh": jets.sinh,
    "cosh": jets.cosh,
}


def _eval(e, env):
    """Evaluate over any environment of ring values (jets or floats)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise DomainError(f"unbound variable {e.name!r}", unparse(e)) from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Call):
        try:
            return _JET_FUNCTIONS[e.fn](_eval(e.arg, env))
        except DomainError as err:
            if err.subexpression is None:
                raise DomainError(err.reason, unparse(e)) from None
            raise
    if isinstance(e, BinOp):
        if e.op == "^":
            if not is_constant(e.rhs):
                raise DomainError("exponent must be constant", unparse(e))
            exponent = eval_float(e.rhs, {})
            base = _eval(e.lhs, env)
            try:
                return base ** exponent
            except DomainError as err:
                if err.subexpression is None:
                    raise DomainError(err.reason, unparse(e)) from None
                raise
        lhs = _eval(e.lhs, env)
        rhs = _eval(e.rhs, env)
        try:
            if e.op == "+":
                return lhs + rhs
            if e.op == "-":
                return lhs - rhs
            if e.op == "*":
                return lhs * rhs
            if isinstance(rhs, (int, float)) and rhs == 0.0:
                raise DomainError("division by zero")
            return lhs / rhs
        except DomainError as err:
            if err.subexpression is None:
                raise DomainError(err.reason, unparse(e)) from None
            raise
    raise TypeError(f"not an Expr: {e!r}")


def eval_jet(e, at, order, space=None):
    """Jet of the smooth function defined by `e` at point `at`, to `order`.

    `at` maps variable names to base-point values (a JetPoint's `variables`
    view works directly).  Coefficients are the exact partial derivatives of
    the expression; there is no truncation error at or below `order`.
    """
    values = dict(at)
    if space is None:
        space = jets.jet_space(tuple(values.keys()), order)
    env = {
        nm: jets.JetValue.coordinate(space, nm, values[nm], order)
        for nm in space.names
        if nm in values
    }
    missing = free_vars(e) - env.keys()
    if missing:
        raise DomainError(f"unbound variables {sorted(missing)}", unparse(e))
    result = _eval(e, env)
    if not isinstance(result, jets.JetValue):
        result = jets.JetValue.constant(space, result, order)
    return result


def eval_float(e, at):
    """Plain float evaluation (used by samplers and finite-difference oracles)."""
    result = _eval(e, dict(at))
    if isinstance(result, jets.JetValue):
        return result.value
    return float(result)


def eval_in_env(e, env):
    """Evaluate with prebuilt ring values (jets) bound to variable names."""
    return _eval(e, env)


__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Call",
    "BinOp",
    "parse",
    "unparse",
    "free_vars",
    "is_constant",
    "eval_jet",
    "eval_float",
    "eval_in_env",
    "num",
    "var",
    "add",
    "sub",
    "mul",
    "div",
]

"""Tiny expression language for chart-local field components.

Expressions are built from complex coordinates z1..zn, their formal
conjugates zb1..zbn, named parameters, float literals, the imaginary
unit `i`, the operators + - * / ^ (integer exponents only), and the
functions exp() and log().  There is no implicit multiplication.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .jets import Jet, jet_exp, jet_log, jet_var


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


# --- abstract syntax -------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Coord:
    kind: str  # "z" or "zb"
    index: int  # 1-based


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Sub:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Mul:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Div:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str  # "exp" or "log"
    arg: "Expr"


Expr = Num | Coord | Param | Neg | Add | Sub | Mul | Div | Pow | Call

ZERO = Num(0j)
ONE = Num(1 + 0j)

_COORD_RE = re.compile(r"^(zb?)([1-9][0-9]*)$")
_RESERVED = {"i", "exp", "log"}

_TOKEN_RE = re.compile(
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


def validate_param_name(name: str) -> None:
    if name in _RESERVED:
        raise ValueError(f"parameter name {name!r} is reserved")
    if _COORD_RE.match(name):
        raise ValueError(f"parameter name {name!r} collides with a coordinate")
    if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", name):
        raise ValueError(f"parameter name {name!r} is not a valid identifier")


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "name" | "op" | "end"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            col = 1
            pos += 1
            continue
        if ch.isspace():
            col += 1
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(), line, col))
        col += m.end() - pos
        pos = m.end()
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], dim: int, params: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.dim = dim
        self.params = params

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            shown = repr(tok.text) if tok.text else "end of input"
            raise ParseError(f"expected {op!r}, found {shown}", tok.line, tok.col)
        return self.advance()

    def parse(self) -> Expr:
        expr = self.parse_sum()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)
        return expr

    def parse_sum(self) -> Expr:
        node = self.parse_product()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.parse_product()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def parse_product(self) -> Expr:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            rhs = self.parse_unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            exponent = self.parse_exponent()
            base = Pow(base, exponent)
            tok = self.peek()
            if tok.kind == "op" and tok.text == "^":
                raise ParseError(
                    "chained '^' needs parentheses", tok.line, tok.col
                )
        return base

    def parse_exponent(self) -> int:
        sign = 1
        parens = False
        tok = self.peek()
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            parens = True
            tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            sign = -1
            tok = self.peek()
        if tok.kind != "number" or not re.match(r"^\d+$", tok.text):
            raise ParseError(
                "exponent must be an integer literal", tok.line, tok.col
            )
        self.advance()
        if parens:
            self.expect_op(")")
        return sign * int(tok.text)

    def parse_atom(self) -> Expr:
        tok = self.advance()
        if tok.kind == "number":
            return Num(complex(float(tok.text)))
        if tok.kind == "op" and tok.text == "(":
            inner = self.parse_sum()
            self.expect_op(")")
            return inner
        if tok.kind == "name":
            return self.resolve_name(tok)
        shown = repr(tok.text) if tok.text else "end of input"
        raise ParseError(f"expected a value, found {shown}", tok.line, tok.col)

    def resolve_name(self, tok: _Token) -> Expr:
        name = tok.text
        if name == "i":
            return Num(1j)
        if name in ("exp", "log"):
            self.expect_op("(")
            arg = self.parse_sum()
            self.expect_op(")")
            return Call(name, arg)
        m = _COORD_RE.match(name)
        if m:
            kind = "z" if m.group(1) == "z" else "zb"
            index = int(m.group(2))
            if index > self.dim:
                raise ParseError(
                    f"coordinate {name!r} exceeds chart dimension {self.dim}",
                    tok.line,
                    tok.col,
                )
            return Coord(kind, index)
        if name in self.params:
            return Param(name)
        raise ParseError(f"unknown name {name!r}", tok.line, tok.col)


def parse(text: str, dim: int, params: Sequence[str] = ()) -> Expr:
    """Parse an expression over a dim-dimensional complex chart."""
    for p in params:
        validate_param_name(p)
    tokens = _tokenize(text)
    if tokens[0].kind == "end":
        raise ParseError("empty expression", 1, 1)
    return _Parser(tokens, dim, frozenset(params)).parse()


# --- evaluation ------------------------------------------------------------

def eval_jet(
    expr: Expr,
    point: Sequence[complex],
    order: int,
    params: Mapping[str, complex] | None = None,
) -> Jet:
    """Evaluate to a jet at `point` = (z1..zn, zb1..zbn)."""
    n = len(point) // 2
    if len(point) != 2 * n or n == 0:
        raise ValueError("point must list z1..zn followed by zb1..zbn")
    num_vars = 2 * n
    params = params or {}
    cache: dict[int, Jet] = {}

    def var(v: int) -> Jet:
        if v not in cache:
            cache[v] = jet_var(v, complex(point[v]), order, num_vars)
        return cache[v]

    def rec(e: Expr) -> Jet | complex:
        # scalars stay plain until combined with a jet
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Param):
            try:
                return complex(params[e.name])
            except KeyError:
                raise ValueError(f"parameter {e.name!r} has no value") from None
        if isinstance(e, Coord):
            v = e.index - 1 if e.kind == "z" else n + e.index - 1
            return var(v)
        if isinstance(e, Neg):
            return -rec(e.arg)
        if isinstance(e, Add):
            return rec(e.lhs) + rec(e.rhs)
        if isinstance(e, Sub):
            return rec(e.lhs) - rec(e.rhs)
        if isinstance(e, Mul):
            return rec(e.lhs) * rec(e.rhs)
        if isinstance(e, Div):
            num, den = rec(e.lhs), rec(e.rhs)
            if isinstance(num, complex) and isinstance(den, Jet):
                return den.reciprocal() * num
            return num / den
        if isinstance(e, Pow):
            return rec(e.base) ** e.exponent
        if isinstance(e, Call):
            arg = rec(e.arg)
            if isinstance(arg, complex):
                return cmath.exp(arg) if e.func == "exp" else cmath.log(arg)
            return jet_exp(arg) if e.func == "exp" else jet_log(arg)
        raise TypeError(f"not an expression node: {e!r}")

    result = rec(expr)
    if isinstance(result, Jet):
        return result
    return var(0) * 0.0 + result  # constant expression, promote


def eval_value(
    expr: Expr,
    point: Sequence[complex],
    params: Mapping[str, complex] | None = None,
) -> complex:
    """Plain complex evaluation; independent of the jet machinery."""
    n = len(point) // 2
    params = params or {}

    def rec(e: Expr) -> complex:
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Param):
            try:
                return complex(params[e.name])
            except KeyError:
                raise ValueError(f"parameter {e.name!r} has no value") from None
        if isinstance(e, Coord):
            v = e.index - 1 if e.kind == "z" else n + e.index - 1
            return complex(point[v])
        if isinstance(e, Neg):
            return -rec(e.arg)
        if isinstance(e, Add):
            return rec(e.lhs) + rec(e.rhs)
        if isinstance(e, Sub):
            return rec(e.lhs) - rec(e.rhs)
        if isinstance(e, Mul):
            return rec(e.lhs) * rec(e.rhs)
        if isinstance(e, Div):
            return rec(e.lhs) / rec(e.rhs)
        if isinstance(e, Pow):
            return rec(e.base) ** e.exponent
        if isinstance(e, Call):
            return cmath.exp(rec(e.arg)) if e.func == "exp" else cmath.log(rec(e.arg))
        raise TypeError(f"not an expression node: {e!r}")

    return rec(expr)


# --- structural operations -------------------------------------------------

def conjugate_expr(expr: Expr) -> Expr:
    """Formal conjugate: swap z_k with zb_k and conjugate literals.

    Parameters are kept as-is, so they should hold real values whenever
    conjugation symmetry matters.
    """
    if isinstance(expr, Num):
        return Num(expr.value.conjugate())
    if isinstance(expr, Coord):
        return Coord("zb" if expr.kind == "z" else "z", expr.index)
    if isinstance(expr, Param):
        return expr
    if isinstance(expr, Neg):
        return Neg(conjugate_expr(expr.arg))
    if isinstance(expr, Add):
        return Add(conjugate_expr(expr.lhs), conjugate_expr(expr.rhs))
    if isinstance(expr, Sub):
        return Sub(conjugate_expr(expr.lhs), conjugate_expr(expr.rhs))
    if isinstance(expr, Mul):
        return Mul(conjugate_expr(expr.lhs), conjugate_expr(expr.rhs))
    if isinstance(expr, Div):
        return Div(conjugate_expr(expr.lhs), conjugate_expr(expr.rhs))
    if isinstance(expr, Pow):
        return Pow(conjugate_expr(expr.base), expr.exponent)
    if isinstance(expr, Call):
        return Call(expr.func, conjugate_expr(expr.arg))
    raise TypeError(f"not an expression node: {expr!r}")


_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _render(expr: Expr) -> tuple[str, int]:
    if isinstance(expr, Num):
        return _render_num(expr.value)
    if isinstance(expr, Coord):
        return f"{expr.kind}{expr.index}", _PREC_ATOM
    if isinstance(expr, Param):
        return expr.name, _PREC_ATOM
    if isinstance(expr, Neg):
        inner = _wrap(expr.arg, _PREC_UNARY)
        return f"-{inner}", _PREC_UNARY
    if isinstance(expr, Add):
        return f"{_wrap(expr.lhs, _PREC_ADD)} + {_wrap(expr.rhs, _PREC_ADD)}", _PREC_ADD
    if isinstance(expr, Sub):
        rhs = _wrap(expr.rhs, _PREC_ADD + 1)
        return f"{_wrap(expr.lhs, _PREC_ADD)} - {rhs}", _PREC_ADD
    if isinstance(expr, Mul):
        return f"{_wrap(expr.lhs, _PREC_MUL)}*{_wrap(expr.rhs, _PREC_MUL)}", _PREC_MUL
    if isinstance(expr, Div):
        rhs = _wrap(expr.rhs, _PREC_MUL + 1)
        return f"{_wrap(expr.lhs, _PREC_MUL)}/{rhs}", _PREC_MUL
    if isinstance(expr, Pow):
        base = _wrap(expr.base, _PREC_ATOM)
        if expr.exponent < 0:
            return f"{base}^({expr.exponent})", _PREC_POW
        return f"{base}^{expr.exponent}", _PREC_POW
    if isinstance(expr, Call):
        inner, _ = _render(expr.arg)
        return f"{expr.func}({inner})", _PREC_ATOM
    raise TypeError(f"not an expression node: {expr!r}")


def _render_num(value: complex) -> tuple[str, int]:
    re_, im = value.real, value.imag
    if im == 0.0:
        if re_ < 0:
            return f"-{-re_!r}", _PREC_UNARY
        return repr(re_), _PREC_ATOM
    if re_ == 0.0:
        if im == 1.0:
            return "i", _PREC_ATOM
        if im < 0:
            return f"-{-im!r}*i", _PREC_UNARY
        return f"{im!r}*i", _PREC_MUL
    op = "+" if im >= 0 else "-"
    return f"({re_!r} {op} {abs(im)!r}*i)", _PREC_ATOM


def _wrap(expr: Expr, minimum: int) -> str:
    text, prec = _render(expr)
    if prec < minimum:
        return f"({text})"
    return text


def to_text(expr: Expr) -> str:
    """Render with minimal parentheses; parse(to_text(e)) re-reads it."""
    return _render(expr)[0]

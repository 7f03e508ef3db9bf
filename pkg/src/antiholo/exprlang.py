"""A tiny arithmetic language for metric and almost complex structure entries.

Expressions are parsed once into an immutable tree and evaluated with jet
arithmetic, so exact partial derivatives up to order 3 come for free.  The
grammar is documented in ``docs/grammar.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .jet import MAX_ORDER, Jet

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "atan")


class ExprError(ValueError):
    """Base class for expression parse errors; carries a position in the source."""

    def __init__(self, message: str, text: str = "", offset: int = 0):
        self.message = message
        self.text = text
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column}, offset {offset})")


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class VariableRangeError(ExprError):
    pass


class ExponentError(ExprError):
    pass


class ExprDomainError(ValueError):
    """Raised during evaluation, e.g. ``log`` of a non-positive value."""

    def __init__(self, message: str, subexpr: "Expr"):
        self.subexpr = subexpr
        super().__init__(f"{message} in subexpression '{subexpr}'")


# -- syntax tree ------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return repr(self.value) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written in the source

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"

    def __str__(self):
        return f"-({self.arg})"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left} + {self.right})"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left} - {self.right})"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left} * {self.right})"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"({self.left} / {self.right})"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int

    def __str__(self):
        return f"({self.base})^({self.exponent})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"

    def __str__(self):
        return f"{self.func}({self.arg})"


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


def variables(e: Expr) -> set[int]:
    """1-based indices of the coordinates an expression depends on."""
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


def relabel(e: Expr, mapping: dict[int, int]) -> Expr:
    """Substitute variable indices (1-based) according to ``mapping``."""
    if isinstance(e, Var):
        return Var(mapping.get(e.index, e.index))
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return Neg(relabel(e.arg, mapping))
    if isinstance(e, Call):
        return Call(e.func, relabel(e.arg, mapping))
    if isinstance(e, Pow):
        return Pow(relabel(e.base, mapping), e.exponent)
    return type(e)(relabel(e.left, mapping), relabel(e.right, mapping))


# -- tokenizer / parser -----------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def error(self, message: str, cls=ExprSyntaxError, offset: int | None = None):
        t = self.tok
        if offset is None:
            offset = t.offset
            found = "end of input" if t.kind == "end" else repr(t.text)
            message = f"{message}, found {found}"
        raise cls(message, self.text, offset)

    def parse(self) -> Expr:
        e = self.sum()
        if self.tok.kind != "end":
            self.error("unexpected token")
        return e

    def sum(self) -> Expr:
        e = self.product()
        while True:
            if self.accept("+"):
                e = Add(e, self.product())
            elif self.accept("-"):
                e = Sub(e, self.product())
            else:
                return e

    def product(self) -> Expr:
        e = self.unary()
        while True:
            if self.accept("*"):
                e = Mul(e, self.unary())
            elif self.accept("/"):
                e = Div(e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if not self.accept("^"):
            return base
        e = Pow(base, self.exponent())
        if self.tok.kind == "op" and self.tok.text == "^":
            self.error("chained '^' is ambiguous; add parentheses")
        return e

    def exponent(self) -> int:
        start = self.tok.offset
        paren = self.accept("(")
        sign = 1
        if self.accept("-"):
            sign = -1
        elif self.accept("+"):
            pass
        t = self.tok
        if t.kind != "num":
            self.error("exponent must be an integer literal", ExponentError, offset=start)
        self.advance()
        if not re.fullmatch(r"\d+", t.text):
            self.error(f"non-integer exponent {t.text!r}", ExponentError, offset=t.offset)
        if paren:
            self.expect(")")
        return sign * int(t.text)

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            m = re.fullmatch(r"x([0-9]+)", t.text)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.dim:
                    raise VariableRangeError(
                        f"variable index out of range: {t.text} (dimension {self.dim})",
                        self.text,
                        t.offset,
                    )
                return Var(idx)
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return Call(t.text, arg)
            raise UnknownIdentifierError(f"unknown identifier {t.text!r}", self.text, t.offset)
        if self.accept("("):
            e = self.sum()
            self.expect(")")
            return e
        self.error("expected a number, variable, function call or '('")


def parse_expr(text: str, dim: int) -> Expr:
    """Parse ``text`` into an expression tree over coordinates ``x1 .. x{dim}``."""
    if dim < 4 or dim % 2:
        raise ValueError(f"dimension must be even and at least 4, got {dim}")
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", text or "", 0)
    return _Parser(text, dim).parse()


# -- evaluation --------------------------------------------------------------


def eval_jet(e: Expr, p, order: int = 2) -> Jet:
    """Evaluate ``e`` at point ``p`` as a jet carrying partials up to ``order``."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ORDER}")
    p = np.asarray(p, dtype=float)
    return _eval(e, p, order, {})


def _eval(e: Expr, p, order: int, memo: dict) -> Jet:
    if isinstance(e, Num):
        return Jet.constant(e.value, p.shape[0], order)
    if isinstance(e, Var):
        if e.index > p.shape[0]:
            raise ExprDomainError("variable outside the point's dimension", e)
        key = ("var", e.index)
        if key not in memo:
            memo[key] = Jet.variable(e.index - 1, p, order)
        return memo[key]
    if isinstance(e, Neg):
        return -_eval(e.arg, p, order, memo)
    if isinstance(e, Add):
        return _eval(e.left, p, order, memo) + _eval(e.right, p, order, memo)
    if isinstance(e, Sub):
        return _eval(e.left, p, order, memo) - _eval(e.right, p, order, memo)
    if isinstance(e, Mul):
        return _eval(e.left, p, order, memo) * _eval(e.right, p, order, memo)
    if isinstance(e, Div):
        den = _eval(e.right, p, order, memo)
        if den.value == 0.0:
            raise ExprDomainError("division by zero", e)
        return _eval(e.left, p, order, memo) / den
    if isinstance(e, Pow):
        base = _eval(e.base, p, order, memo)
        if e.exponent < 0 and base.value == 0.0:
            raise ExprDomainError("negative power of zero", e)
        return base.ipow(e.exponent)
    if isinstance(e, Call):
        arg = _eval(e.arg, p, order, memo)
        if e.func == "log" and arg.value <= 0.0:
            raise ExprDomainError("log of a non-positive value", e)
        if e.func == "sqrt" and (arg.value < 0.0 or (order > 0 and arg.value == 0.0)):
            raise ExprDomainError("sqrt of a non-positive value", e)
        return getattr(arg, e.func)()
    raise TypeError(f"not an expression node: {e!r}")


def eval_value(e: Expr, p) -> float:
    """Plain float evaluation (order-0 jet)."""
    return float(eval_jet(e, p, 0).value)

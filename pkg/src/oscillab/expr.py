"""Scalar coefficient expressions in the time variable t.

Expressions are parsed from strings, evaluated pointwise, differentiated
symbolically, and printed back to parseable strings.

Grammar (EBNF):

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom { "^" exponent } ;          (* left-associative chain *)
    exponent = { "-" } atom ;                   (* must fold to an integer *)
    atom     = NUMBER | "t" | FUNC "(" expr ")" | "(" expr ")" ;
    FUNC     = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" | "sign" ;
    NUMBER   = decimal literal, optionally with fraction and exponent part ;

Notes:

* ``^`` takes a constant integer exponent only; anything else is a
  ``ParseError``.  Precedence is ``^`` > unary ``-`` > ``*``/``/`` > ``+``/``-``.
* ``sign`` exists so that derivatives of ``abs`` stay inside the grammar:
  d/dt abs(u) = sign(u)*u', with sign(0) = 0 (hence abs'(0) = 0).
* Singular operations raise :class:`~oscillab.errors.DomainError` with a
  kind tag and the evaluation point — never a silent NaN.
* :func:`parse` preserves the written structure.  Algebraic composition
  (operator overloads, :func:`differentiate`) folds constants and trivial
  identities (x+0, x*1, x*0, x^1, ...).  Folding 0*f or 0/f discards any
  singular points of f; a literal-zero numerator over any denominator is
  the zero function by the unknown-factor convention for ratios.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

from .errors import DomainError, ParseError

__all__ = [
    "Expr", "Num", "Var", "Add", "Sub", "Mul", "Div", "Pow", "Neg", "Call",
    "parse", "differentiate", "to_string", "fn", "num", "T",
    "central_difference", "FUNCTIONS", "compile_tuple", "guarded_call",
]


class _Singular(Exception):
    def __init__(self, kind: str):
        self.kind = kind


def _log(x):
    if x <= 0.0:
        raise _Singular("log_nonpositive")
    return math.log(x)


def _sqrt(x):
    if x < 0.0:
        raise _Singular("sqrt_negative")
    return math.sqrt(x)


def _sign(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


#: function name -> evaluation callable
FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": abs,
    "sign": _sign,
}

_EVAL_NS = {"__builtins__": {}, **FUNCTIONS}

# printing precedence levels
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 30, 40, 50


class Expr:
    """Base class; all nodes are immutable and hashable."""

    __slots__ = ()

    @cached_property
    def _fn(self):
        return eval(compile(f"lambda t: {_to_source(self)}", "<expr>", "eval"),
                    dict(_EVAL_NS))

    def evaluate(self, t: float) -> float:
        try:
            v = self._fn(t)
        except ZeroDivisionError:
            raise DomainError("division_by_zero", t) from None
        except OverflowError:
            raise DomainError("overflow", t) from None
        except _Singular as s:
            raise DomainError(s.kind, t) from None
        if not math.isfinite(v):
            raise DomainError("overflow", t)
        return v

    __call__ = evaluate

    def diff(self) -> "Expr":
        return differentiate(self)

    def __str__(self) -> str:
        return to_string(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({to_string(self)!r})"

    # -- algebra (folding constructors) --------------------------------
    def __add__(self, other):
        return _add(self, _coerce(other))

    def __radd__(self, other):
        return _add(_coerce(other), self)

    def __sub__(self, other):
        return _sub(self, _coerce(other))

    def __rsub__(self, other):
        return _sub(_coerce(other), self)

    def __mul__(self, other):
        return _mul(self, _coerce(other))

    def __rmul__(self, other):
        return _mul(_coerce(other), self)

    def __truediv__(self, other):
        return _div(self, _coerce(other))

    def __rtruediv__(self, other):
        return _div(_coerce(other), self)

    def __neg__(self):
        return _neg(self)

    def __pow__(self, n: int):
        return _pow(self, n)


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: float


@dataclass(frozen=True, repr=False)
class Var(Expr):
    """The time variable t."""


@dataclass(frozen=True, repr=False)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True, repr=False)
class Call(Expr):
    name: str
    arg: Expr


T = Var()
_ZERO = Num(0.0)
_ONE = Num(1.0)


def num(v: float) -> Num:
    return Num(float(v))


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float)):
        return Num(float(x))
    raise TypeError(f"cannot use {type(x).__name__} as an expression")


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0.0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 1.0


def _add(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Sub(a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_zero(a) or _is_zero(b):
        return _ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        v = a.value * b.value
        if math.isfinite(v):
            return Num(v)
    return Mul(a, b)


def _div(a: Expr, b: Expr) -> Expr:
    # literal-zero numerator: the zero function (unknown-factor convention)
    if _is_zero(a):
        return _ZERO
    if _is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        v = a.value / b.value
        if math.isfinite(v):
            return Num(v)
    return Div(a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _pow(a: Expr, n: int) -> Expr:
    if not isinstance(n, int):
        raise TypeError("exponent must be an integer")
    if n == 0:
        return _ONE
    if n == 1:
        return a
    if isinstance(a, Num):
        try:
            v = a.value ** n
        except (OverflowError, ZeroDivisionError):
            return Pow(a, n)
        if math.isfinite(v):
            return Num(v)
    return Pow(a, n)


def fn(name: str, arg: Expr) -> Expr:
    """Folding constructor for function application."""
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    arg = _coerce(arg)
    if isinstance(arg, Num):
        try:
            v = FUNCTIONS[name](arg.value)
        except (_Singular, OverflowError, ZeroDivisionError):
            return Call(name, arg)
        if math.isfinite(v):
            return Num(v)
    return Call(name, arg)


# ---------------------------------------------------------------------------
# evaluation source generation
# ---------------------------------------------------------------------------

def _to_source(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Add):
        return f"({_to_source(e.left)} + {_to_source(e.right)})"
    if isinstance(e, Sub):
        return f"({_to_source(e.left)} - {_to_source(e.right)})"
    if isinstance(e, Mul):
        return f"({_to_source(e.left)} * {_to_source(e.right)})"
    if isinstance(e, Div):
        return f"({_to_source(e.left)} / {_to_source(e.right)})"
    if isinstance(e, Pow):
        return f"({_to_source(e.base)}) ** ({e.exponent})"
    if isinstance(e, Neg):
        return f"(-({_to_source(e.operand)}))"
    if isinstance(e, Call):
        return f"{e.name}({_to_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def differentiate(e: Expr) -> Expr:
    """Symbolic derivative with respect to t (constant-folded)."""
    if isinstance(e, Num):
        return _ZERO
    if isinstance(e, Var):
        return _ONE
    if isinstance(e, Add):
        return _add(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Sub):
        return _sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        return _add(_mul(differentiate(e.left), e.right),
                    _mul(e.left, differentiate(e.right)))
    if isinstance(e, Div):
        numer = _sub(_mul(differentiate(e.left), e.right),
                     _mul(e.left, differentiate(e.right)))
        return _div(numer, _pow(e.right, 2))
    if isinstance(e, Pow):
        return _mul(_mul(Num(float(e.exponent)), _pow(e.base, e.exponent - 1)),
                    differentiate(e.base))
    if isinstance(e, Neg):
        return _neg(differentiate(e.operand))
    if isinstance(e, Call):
        da = differentiate(e.arg)
        a = e.arg
        if e.name == "sin":
            return _mul(fn("cos", a), da)
        if e.name == "cos":
            return _neg(_mul(fn("sin", a), da))
        if e.name == "exp":
            return _mul(e, da)
        if e.name == "log":
            return _div(da, a)
        if e.name == "sqrt":
            return _div(da, _mul(Num(2.0), e))
        if e.name == "abs":
            return _mul(fn("sign", a), da)
        if e.name == "sign":
            # zero a.e.; the jump at sign changes is not representable
            return _ZERO
    raise TypeError(f"not an expression node: {e!r}")


def central_difference(f, t: float, h: float = 1e-5) -> float:
    """Two-sided finite-difference derivative of a callable (or Expr)."""
    return (f(t + h) - f(t - h)) / (2.0 * h)


def compile_tuple(exprs) -> "Callable[[float], tuple]":
    """Compile several expressions into one fast t -> tuple callable.

    The callable raises the raw arithmetic exceptions; run it through
    :func:`guarded_call` to get DomainError semantics.
    """
    exprs = list(exprs)
    parts = ",".join(_to_source(e) for e in exprs)
    if len(exprs) == 1:
        parts += ","
    return eval(compile(f"lambda t: ({parts})", "<exprs>", "eval"),
                dict(_EVAL_NS))


def guarded_call(fn, t: float):
    """Call a compiled expression function, mapping failures to DomainError."""
    try:
        return fn(t)
    except ZeroDivisionError:
        raise DomainError("division_by_zero", t) from None
    except OverflowError:
        raise DomainError("overflow", t) from None
    except _Singular as s:
        raise DomainError(s.kind, t) from None


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num) and e.value < 0:
        return _PREC_NEG  # prints with a leading minus
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def to_string(e: Expr) -> str:
    """Render to a string that re-parses to an equivalent expression."""
    if isinstance(e, Num):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return "t"
    if isinstance(e, Add):
        return f"{_child(e.left, _PREC_ADD)} + {_child(e.right, _PREC_ADD, True)}"
    if isinstance(e, Sub):
        return f"{_child(e.left, _PREC_ADD)} - {_child(e.right, _PREC_ADD, True)}"
    if isinstance(e, Mul):
        return f"{_child(e.left, _PREC_MUL)}*{_child(e.right, _PREC_MUL, True)}"
    if isinstance(e, Div):
        return f"{_child(e.left, _PREC_MUL)}/{_child(e.right, _PREC_MUL, True)}"
    if isinstance(e, Pow):
        base = _child(e.base, _PREC_POW)
        return f"{base}^{e.exponent}"
    if isinstance(e, Neg):
        return f"-{_child(e.operand, _PREC_NEG)}"
    if isinstance(e, Call):
        return f"{e.name}({to_string(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def _child(e: Expr, parent_prec: int, right_side: bool = False) -> str:
    p = _prec(e)
    if p < parent_prec or (right_side and p == parent_prec):
        return f"({to_string(e)})"
    return to_string(e)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", at)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect_op(self, op: str):
        tok = self.next()
        if tok[0] != "op" or tok[1] != op:
            raise ParseError(f"expected {op!r}", tok[2])

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        node = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.next()
                rhs = self.term()
                node = Add(node, rhs) if tok[1] == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.next()
                rhs = self.unary()
                node = Mul(node, rhs) if tok[1] == "*" else Div(node, rhs)
            else:
                return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "^":
                self.next()
                node = Pow(node, self.exponent(tok[2]))
            else:
                return node

    def exponent(self, caret_offset: int) -> int:
        sign = 1
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "-":
                self.next()
                sign = -sign
            else:
                break
        operand = self.atom()
        if _contains_var(operand):
            raise ParseError("exponent must be a constant integer", caret_offset)
        try:
            v = operand.evaluate(0.0)
        except DomainError:
            raise ParseError("exponent must be a constant integer", caret_offset) from None
        if v != round(v):
            raise ParseError("non-integer exponent", caret_offset)
        return sign * int(round(v))

    def atom(self) -> Expr:
        tok = self.next()
        kind, value, offset = tok
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if value == "t":
                return T
            if value in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            raise ParseError(f"unknown identifier {value!r}", offset)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {value!r}", offset)


def _contains_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Num,)):
        return False
    if isinstance(e, (Add, Sub, Mul, Div)):
        return _contains_var(e.left) or _contains_var(e.right)
    if isinstance(e, Pow):
        return _contains_var(e.base)
    if isinstance(e, Neg):
        return _contains_var(e.operand)
    if isinstance(e, Call):
        return _contains_var(e.arg)
    return False


def parse(text: str) -> Expr:
    """Parse an expression string.  Structure is preserved (no folding)."""
    return _Parser(text).parse()

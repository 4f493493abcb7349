"""AST node types for complex-valued expressions of one real variable ``x``.

Nodes are immutable.  The ``mk_*`` constructors fold literal arithmetic and
drop additive/multiplicative identities; nothing else is simplified.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

FUNCTIONS = ("exp", "log", "sin", "cos")


class Expr:
    """Base class for all expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_source(self)

    def free_params(self) -> frozenset[str]:
        return frozenset(_walk_params(self))

    def depends_on_x(self) -> bool:
        return _depends_on_x(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: complex


@dataclass(frozen=True, slots=True)
class Var(Expr):
    """The real variable ``x``."""


@dataclass(frozen=True, slots=True)
class Param(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class IntPow(Expr):
    """``base ** n`` for a literal integer ``n`` (evaluated by repeated multiplication)."""

    base: Expr
    n: int


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    """General power; integer-valued exponents still use repeated multiplication."""

    base: Expr
    exponent: Expr


@dataclass(frozen=True, slots=True)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")


X = Var()
ZERO = Const(0j)
ONE = Const(1 + 0j)
I = Const(1j)


def const(value) -> Const:
    return Const(complex(value))


def _is(e: Expr, value: complex) -> bool:
    return isinstance(e, Const) and e.value == value


def _int_value(c: complex) -> int | None:
    if c.imag == 0 and c.real == int(c.real) and abs(c.real) < 2**31:
        return int(c.real)
    return None


def mk_neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(0.0 - a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mk_add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    return Add(a, b)


def mk_sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0):
        return a
    if _is(a, 0):
        return mk_neg(b)
    return Sub(a, b)


def mk_mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return mk_neg(b)
    if _is(b, -1):
        return mk_neg(a)
    return Mul(a, b)


def mk_div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if _is(b, 1):
        return a
    if _is(a, 0) and not _is(b, 0):
        return ZERO
    return Div(a, b)


def mk_intpow(base: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const) and (base.value != 0 or n > 0):
        return Const(base.value**n)
    return IntPow(base, n)


def mk_pow(base: Expr, exponent: Expr) -> Expr:
    if isinstance(exponent, Const):
        n = _int_value(exponent.value)
        if n is not None:
            return mk_intpow(base, n)
    return Pow(base, exponent)


_FOLD = {"exp": cmath.exp, "sin": cmath.sin, "cos": cmath.cos}


def mk_func(name: str, arg: Expr) -> Expr:
    if isinstance(arg, Const) and name in _FOLD:
        return Const(_FOLD[name](arg.value))
    if isinstance(arg, Const) and name == "log" and arg.value != 0:
        return Const(cmath.log(arg.value))
    return Func(name, arg)


def _walk_params(e: Expr):
    if isinstance(e, Param):
        yield e.name
    for child in children(e):
        yield from _walk_params(child)


def _depends_on_x(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    return any(_depends_on_x(c) for c in children(e))


def children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Neg, Func)):
        return (e.arg,)
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    if isinstance(e, IntPow):
        return (e.base,)
    if isinstance(e, Pow):
        return (e.base, e.exponent)
    return ()


def depth(e: Expr) -> int:
    return 1 + max((depth(c) for c in children(e)), default=0)


# -- printing ---------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, IntPow: 4, Pow: 4}
_SYM = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


def _num(v: float) -> str:
    return repr(float(v))


def _const_source(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0:
        return _num(re) if re >= 0 else f"(-{_num(-re)})"
    imag = "i" if im == 1 else f"{_num(abs(im))}*i"
    sign = "-" if im < 0 else "+"
    if re == 0:
        return imag if im == 1 else f"({'-' if im < 0 else ''}{imag})"
    return f"({_num(re)}{sign}{imag})" if re >= 0 else f"(-{_num(-re)}{sign}{imag})"


def to_source(e: Expr) -> str:
    """Render ``e`` in the input grammar; ``parse(to_source(e))`` evaluates like ``e``."""
    if isinstance(e, Const):
        return _const_source(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_source(e.arg)})"
    if isinstance(e, Neg):
        return f"-{_wrap(e.arg, 3, strict=False)}"
    if isinstance(e, IntPow):
        exp = str(e.n) if e.n >= 0 else f"({e.n})"
        return f"{_wrap(e.base, 5)}^{exp}"
    if isinstance(e, Pow):
        return f"{_wrap(e.base, 5)}^{_wrap(e.exponent, 3, strict=False)}"
    prec = _PREC[type(e)]
    left = _wrap(e.left, prec, strict=False)
    right = _wrap(e.right, prec, strict=True)
    return f"{left}{_SYM[type(e)]}{right}"


def _wrap(e: Expr, prec: int, strict: bool = True) -> str:
    inner = _PREC.get(type(e), 10)
    if isinstance(e, Const) and e.value.real < 0 and e.value.imag == 0:
        return _const_source(e.value)
    if inner < prec or (strict and inner == prec):
        return f"({to_source(e)})"
    return to_source(e)

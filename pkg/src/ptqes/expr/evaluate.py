"""Numerical evaluation of expression trees over scalars or numpy arrays."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

import numpy as np

from .nodes import (
    Add,
    Const,
    Div,
    Expr,
    Func,
    IntPow,
    Mul,
    Neg,
    Param,
    Pow,
    Sub,
    Var,
)


class EvaluationError(ArithmeticError):
    """Raised on division by zero, log(0) or an unbound parameter."""

    def __init__(self, message: str, x=None):
        self.x = x
        super().__init__(message if x is None else f"{message} at x={x!r}")


class UnboundParameter(EvaluationError, KeyError):
    def __str__(self):
        return self.args[0]


class Bindings(Mapping):
    """Parameter values plus a reality flag per name.

    Parameters default to real.  Names listed in ``complex_params`` are
    conjugated by :meth:`conjugated`, which is what the PT image of an
    expression needs.
    """

    def __init__(self, values: Mapping[str, complex] | None = None, complex_params: Iterable[str] = ()):
        self._values = {k: complex(v) for k, v in (values or {}).items()}
        self.complex_params = frozenset(complex_params)
        for name in self._values:
            if name in ("i", "x"):
                raise ValueError(f"{name!r} is reserved and cannot be a parameter")
        for name, v in self._values.items():
            if v.imag != 0 and name not in self.complex_params:
                raise ValueError(
                    f"parameter {name!r} has imaginary part but is declared real"
                )

    def __getitem__(self, key: str) -> complex:
        return self._values[key]

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        extra = f", complex_params={sorted(self.complex_params)}" if self.complex_params else ""
        return f"Bindings({self._values!r}{extra})"

    def is_real(self, name: str) -> bool:
        return name not in self.complex_params

    def conjugated(self) -> "Bindings":
        vals = {
            k: (v.conjugate() if k in self.complex_params else v)
            for k, v in self._values.items()
        }
        return Bindings(vals, self.complex_params)

    def updated(self, **values) -> "Bindings":
        return Bindings({**self._values, **values}, self.complex_params)

    def to_dict(self) -> dict:
        return {
            k: ([v.real, v.imag] if k in self.complex_params else v.real)
            for k, v in self._values.items()
        }


def evaluate(e: Expr, x, bindings: Mapping[str, complex] | None = None):
    """Evaluate ``e`` at real ``x`` (a float or an array of floats).

    Returns a Python complex for scalar ``x`` and a complex array otherwise.
    Logarithms and non-integer powers use the principal branch.
    """
    bindings = bindings if bindings is not None else {}
    scalar = np.ndim(x) == 0
    xa = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(e, xa, bindings)
    out = np.broadcast_to(np.asarray(out, dtype=complex), xa.shape)
    if scalar:
        return complex(out)
    return np.array(out)


def _where_zero(x: np.ndarray, mask):
    mask = np.broadcast_to(mask, x.shape)
    if x.ndim == 0:
        return float(x)
    return float(x[np.argmax(mask)])


def _eval(e: Expr, x: np.ndarray, b):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Param):
        try:
            return b[e.name]
        except KeyError:
            raise UnboundParameter(f"unbound parameter {e.name!r}") from None
    if isinstance(e, Neg):
        # 0 - v keeps a +0 imaginary part, so log(-2) stays on the principal branch
        return 0.0 - _eval(e.arg, x, b)
    if isinstance(e, Add):
        return _eval(e.left, x, b) + _eval(e.right, x, b)
    if isinstance(e, Sub):
        return _eval(e.left, x, b) - _eval(e.right, x, b)
    if isinstance(e, Mul):
        return _eval(e.left, x, b) * _eval(e.right, x, b)
    if isinstance(e, Div):
        num = _eval(e.left, x, b)
        den = np.asarray(_eval(e.right, x, b), dtype=complex)
        zero = den == 0
        if np.any(zero):
            raise EvaluationError("division by zero", _where_zero(x, zero))
        return num / den
    if isinstance(e, IntPow):
        return _int_power(np.asarray(_eval(e.base, x, b), dtype=complex), e.n, x)
    if isinstance(e, Pow):
        base = np.asarray(_eval(e.base, x, b), dtype=complex)
        p = np.asarray(_eval(e.exponent, x, b), dtype=complex)
        n = _integral_exponent(p)
        if n is not None:
            return _int_power(base, n, x)
        zero = (base == 0) & (p.real <= 0)
        if np.any(zero):
            raise EvaluationError("zero base with non-positive exponent", _where_zero(x, zero))
        return np.power(base, p)
    if isinstance(e, Func):
        arg = np.asarray(_eval(e.arg, x, b), dtype=complex)
        if e.name == "exp":
            return np.exp(arg)
        if e.name == "sin":
            return np.sin(arg)
        if e.name == "cos":
            return np.cos(arg)
        zero = arg == 0
        if np.any(zero):
            raise EvaluationError("log of zero", _where_zero(x, zero))
        return np.log(arg)
    raise TypeError(f"not an expression node: {e!r}")


def _integral_exponent(p: np.ndarray) -> int | None:
    if p.ndim and not np.all(p == p.flat[0]):
        return None
    v = complex(p.flat[0]) if p.ndim else complex(p)
    if v.imag == 0 and v.real.is_integer() and abs(v.real) <= 4096:
        return int(v.real)
    return None


def _int_power(base: np.ndarray, n: int, x) -> np.ndarray:
    if n < 0:
        zero = base == 0
        if np.any(zero):
            raise EvaluationError("division by zero", _where_zero(x, zero))
    k = abs(n)
    result = np.ones_like(base)
    sq = base
    while k:
        if k & 1:
            result = result * sq
        k >>= 1
        if k:
            sq = sq * sq
    return 1.0 / result if n < 0 else result

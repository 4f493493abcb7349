"""Symbolic d/dx and the PT image of an expression."""

from __future__ import annotations

from .nodes import (
    ONE,
    ZERO,
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
    X,
    const,
    mk_add,
    mk_div,
    mk_func,
    mk_intpow,
    mk_mul,
    mk_neg,
    mk_pow,
    mk_sub,
)


def differentiate(e: Expr) -> Expr:
    """Return d/dx of ``e``.  Only literal arithmetic is folded."""
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Neg):
        return mk_neg(differentiate(e.arg))
    if isinstance(e, Add):
        return mk_add(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Sub):
        return mk_sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        u, v = e.left, e.right
        return mk_add(mk_mul(differentiate(u), v), mk_mul(u, differentiate(v)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        du, dv = differentiate(u), differentiate(v)
        if isinstance(dv, Const) and dv.value == 0:
            return mk_div(du, v)
        return mk_div(mk_sub(mk_mul(du, v), mk_mul(u, dv)), mk_intpow(v, 2))
    if isinstance(e, IntPow):
        return mk_mul(
            mk_mul(const(e.n), mk_intpow(e.base, e.n - 1)), differentiate(e.base)
        )
    if isinstance(e, Pow):
        u, p = e.base, e.exponent
        if not p.depends_on_x():
            # p * u^(p-1) * u'
            return mk_mul(mk_mul(p, mk_pow(u, mk_sub(p, ONE))), differentiate(u))
        # u^p * (p' log u + p u'/u)
        return mk_mul(
            e,
            mk_add(
                mk_mul(differentiate(p), mk_func("log", u)),
                mk_div(mk_mul(p, differentiate(u)), u),
            ),
        )
    if isinstance(e, Func):
        du = differentiate(e.arg)
        if e.name == "exp":
            return mk_mul(e, du)
        if e.name == "log":
            return mk_div(du, e.arg)
        if e.name == "sin":
            return mk_mul(mk_func("cos", e.arg), du)
        if e.name == "cos":
            return mk_neg(mk_mul(mk_func("sin", e.arg), du))
    raise TypeError(f"not an expression node: {e!r}")


def conjugate_reflect(e: Expr) -> Expr:
    """Build the PT image ``g(x) = conj(e(-x))``.

    Literals are conjugated and ``x`` becomes ``-x``.  Parameters are kept
    as they are, so evaluate the result with ``bindings.conjugated()`` when
    any parameter is declared complex.  The identity holds away from the
    branch cuts of ``log`` and non-integer powers.
    """
    if isinstance(e, Const):
        return Const(e.value.conjugate())
    if isinstance(e, Var):
        return Neg(X)
    if isinstance(e, Param):
        return e
    if isinstance(e, Neg):
        return Neg(conjugate_reflect(e.arg))
    if isinstance(e, (Add, Sub, Mul, Div)):
        return type(e)(conjugate_reflect(e.left), conjugate_reflect(e.right))
    if isinstance(e, IntPow):
        return IntPow(conjugate_reflect(e.base), e.n)
    if isinstance(e, Pow):
        return Pow(conjugate_reflect(e.base), conjugate_reflect(e.exponent))
    if isinstance(e, Func):
        return Func(e.name, conjugate_reflect(e.arg))
    raise TypeError(f"not an expression node: {e!r}")

"""Superpotential construction from a PT-symmetric generating function U+.

Given U+ and a complex factorization energy eps the pipeline builds

    U-  = (U+' - 2(eps - conj(eps))) / U+
    W   = (U+ + U-) / 2
    V   = (U+^2 + U-^2)/8 - U-'/4 + Re(eps)
    psi = exp(-int_0^x W)

sampled on a grid that is exactly symmetric about x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .expr import Bindings, Expr, differentiate, evaluate
from .expr.nodes import const, mk_add, mk_div, mk_mul, mk_sub

# Re(-int W) above this overflows exp().
EXP_LIMIT = 700.0
ZERO_THRESHOLD = 1e-12


class PipelineError(ArithmeticError):
    """Numerical failure while building a model."""


class ZeroGeneratingFunction(PipelineError):
    def __init__(self, x: float, value: complex):
        self.x = x
        self.value = value
        super().__init__(f"generating function vanishes at x={x!r} (|U+|={abs(value):.3g})")


class OverflowingWavefunction(PipelineError):
    def __init__(self, x: float, exponent: float):
        self.x = x
        self.exponent = exponent
        super().__init__(f"wave function overflows at x={x!r} (log|psi|={exponent:.4g})")


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L] with an odd number of points, so x = 0 is a node.

    Abscissae are ``(j - c) * h`` with integer offsets, which makes the
    mirror ``x[::-1] == -x`` hold bit for bit.
    """

    L: float = 10.0
    N: int = 2001

    def __post_init__(self):
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"grid half-width must be positive, got {self.L}")
        if self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"grid needs an odd number of points >= 3, got {self.N}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    @property
    def center(self) -> int:
        return (self.N - 1) // 2

    @cached_property
    def x(self) -> np.ndarray:
        x = (np.arange(self.N) - self.center) * self.h
        x.flags.writeable = False
        return x

    def to_dict(self) -> dict:
        return {"L": self.L, "N": self.N}


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def pt_image(self) -> "SampledFunction":
        """Samples of conj(f(-x)), by index mirroring."""
        return SampledFunction(self.grid, np.conj(self.values[::-1]))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def at_zero(self) -> complex:
        return complex(self.values[self.grid.center])


@dataclass(frozen=True, eq=False)
class Wavefunction(SampledFunction):
    """psi = exp(log_values).

    ``values`` is clipped where Re(log_values) exceeds the exp range;
    ``overflow`` records that this happened.  Use ``log_values`` for any
    quantitative comparison.
    """

    log_values: np.ndarray = field(default=None)
    overflow: bool = False

    @classmethod
    def from_log(cls, grid: Grid, log_values) -> "Wavefunction":
        log_values = np.asarray(log_values, dtype=complex)
        overflow = bool(np.any(log_values.real > EXP_LIMIT))
        clipped = np.minimum(log_values.real, EXP_LIMIT) + 1j * log_values.imag
        return cls(grid, np.exp(clipped), log_values, overflow)

    def log_abs(self) -> np.ndarray:
        return self.log_values.real


# -- quadrature and differences ----------------------------------------------


@lru_cache(maxsize=None)
def _interval_weights(offsets: tuple[int, ...]) -> tuple[float, ...]:
    """Weights w_k with int_0^1 f(t) dt ~ sum w_k f(offsets[k]), exact for degree len-1."""
    weights = []
    for k, ok in enumerate(offsets):
        # Lagrange basis polynomial coefficients, lowest order first.
        poly = [Fraction(1)]
        for m, om in enumerate(offsets):
            if m == k:
                continue
            scale = Fraction(1, ok - om)
            nxt = [Fraction(0)] * (len(poly) + 1)
            for p, c in enumerate(poly):
                nxt[p + 1] += c * scale
                nxt[p] -= c * om * scale
            poly = nxt
        weights.append(float(sum(c / (p + 1) for p, c in enumerate(poly))))
    return tuple(weights)


def interval_integrals(f: np.ndarray, h: float, points: int = 8) -> np.ndarray:
    """Integral of ``f`` over each grid interval [x_k, x_k+1] (length N-1).

    Each interval uses a local interpolant through ``points`` neighbouring
    samples (centred where possible, shifted at the edges), so the global
    error is O(h**points).
    """
    f = np.asarray(f)
    n = f.size
    p = min(points, n)
    left = (p - 1) // 2  # samples to the left of x_k in a centred stencil
    out = np.empty(n - 1, dtype=np.result_type(f, float))
    starts = np.clip(np.arange(n - 1) - left, 0, n - p)
    for start in np.unique(starts):
        ks = np.nonzero(starts == start)[0]
        if start == 0 or start == n - p:
            for k in ks:
                w = _interval_weights(tuple(range(start - k, start - k + p)))
                out[k] = np.dot(w, f[start : start + p])
        else:
            w = _interval_weights(tuple(range(-left, p - left)))
            idx = ks[:, None] + np.arange(-left, p - left)[None, :]
            out[ks] = f[idx] @ np.asarray(w)
    return out * h


def _simpson_from_center(f: np.ndarray, h: float, c: int) -> np.ndarray:
    """Cumulative integral from index c: composite Simpson, trapezoid on a trailing odd interval."""
    n = f.size
    out = np.zeros(n, dtype=np.result_type(f, float))
    for direction in (1, -1):
        acc = 0.0
        j = c
        while 0 <= j + direction < n:
            if 0 <= j + 2 * direction < n:
                a, m, b = f[j], f[j + direction], f[j + 2 * direction]
                out[j + direction] = acc + direction * h * (f[j] + f[j + direction]) / 2
                acc = acc + direction * h * (a + 4 * m + b) / 3
                out[j + 2 * direction] = acc
                j += 2 * direction
            else:
                out[j + direction] = acc + direction * h * (f[j] + f[j + direction]) / 2
                j += direction
    return out


def cumulative_integral(f, grid: Grid, method: str = "local8") -> np.ndarray:
    """int_0^{x_j} f dx along the real axis for every grid node."""
    f = np.asarray(f, dtype=complex)
    c = grid.center
    if method == "simpson":
        return _simpson_from_center(f, grid.h, c)
    if method.startswith("local"):
        pieces = interval_integrals(f, grid.h, points=int(method[5:] or 8))
        out = np.zeros_like(f)
        out[c + 1 :] = np.cumsum(pieces[c:])
        out[:c] = -np.cumsum(pieces[:c][::-1])[::-1]
        return out
    raise ValueError(f"unknown quadrature method {method!r}")


def finite_difference(f: SampledFunction) -> SampledFunction:
    """4th-order central first derivative, one-sided 5-point stencils at the edges."""
    v = f.values
    h = f.grid.h
    if v.size < 5:
        return SampledFunction(f.grid, np.gradient(v, h))
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12 * h)
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12 * h)
    return SampledFunction(f.grid, d)


# -- symbolic pieces ---------------------------------------------------------


def u_minus_expr(u_plus: Expr, epsilon: complex) -> Expr:
    eps = complex(epsilon)
    shift = const(2 * (eps - eps.conjugate()))
    return mk_div(mk_sub(differentiate(u_plus), shift), u_plus)


def superpotential_expr(u_plus: Expr, epsilon: complex) -> Expr:
    return mk_mul(const(0.5), mk_add(u_plus, u_minus_expr(u_plus, epsilon)))


def _sample(e: Expr, grid: Grid, bindings) -> SampledFunction:
    return SampledFunction(grid, evaluate(e, grid.x, bindings))


def _sample_u_plus(u_plus: Expr, grid: Grid, bindings) -> SampledFunction:
    up = _sample(u_plus, grid, bindings)
    mags = np.abs(up.values)
    bad = mags <= ZERO_THRESHOLD
    if np.any(bad):
        j = int(np.argmax(bad))
        raise ZeroGeneratingFunction(float(grid.x[j]), complex(up.values[j]))
    return up


# -- operations --------------------------------------------------------------


def build_u_minus(u_plus: Expr, epsilon: complex, grid: Grid, bindings=None) -> SampledFunction:
    """Anti-PT partner U- = (U+' - 2(eps - eps*)) / U+ on the grid."""
    _sample_u_plus(u_plus, grid, bindings)
    return _sample(u_minus_expr(u_plus, epsilon), grid, bindings)


def build_superpotential(u_plus: Expr, epsilon: complex, grid: Grid, bindings=None) -> SampledFunction:
    """W = (U+ + (U+' - 2(eps - eps*)) / U+) / 2 on the grid."""
    up = _sample_u_plus(u_plus, grid, bindings)
    um = _sample(u_minus_expr(u_plus, epsilon), grid, bindings)
    return SampledFunction(grid, 0.5 * (up.values + um.values))


def potential_from_superpotential(w: SampledFunction, w_prime: SampledFunction, epsilon: complex) -> SampledFunction:
    """V = (W^2 - W')/2 + eps."""
    _same_grid(w, w_prime)
    return SampledFunction(w.grid, 0.5 * (w.values**2 - w_prime.values) + complex(epsilon))


def potential_from_u_pair(
    u_plus: SampledFunction,
    u_minus: SampledFunction,
    u_minus_prime: SampledFunction,
    epsilon: complex,
) -> SampledFunction:
    """V = (U+^2 + U-^2)/8 - U-'/4 + Re(eps)."""
    _same_grid(u_plus, u_minus, u_minus_prime)
    eps = complex(epsilon)
    v = (u_plus.values**2 + u_minus.values**2) / 8 - u_minus_prime.values / 4 + eps.real
    return SampledFunction(u_plus.grid, v)


def build_wavefunction(w: SampledFunction, method: str = "local8", strict: bool = False) -> Wavefunction:
    """psi = exp(-int_0^x W dx) with psi(0) = 1.

    With ``strict=True`` an exponent beyond the exp range raises
    :class:`OverflowingWavefunction`; otherwise the result carries
    ``overflow=True`` and exact ``log_values``.
    """
    log_psi = -cumulative_integral(w.values, w.grid, method)
    psi = Wavefunction.from_log(w.grid, log_psi)
    if strict and psi.overflow:
        j = int(np.argmax(log_psi.real))
        raise OverflowingWavefunction(float(w.grid.x[j]), float(log_psi.real[j]))
    return psi


def _same_grid(*fs: SampledFunction):
    g = fs[0].grid
    for f in fs[1:]:
        if f.grid != g:
            raise ValueError("sampled functions live on different grids")


@dataclass(frozen=True, eq=False)
class PTModel:
    u_plus_expr: Expr
    epsilon: complex
    bindings: Bindings
    u_plus: SampledFunction
    u_minus: SampledFunction
    w: SampledFunction
    v: SampledFunction
    psi: Wavefunction

    @property
    def grid(self) -> Grid:
        return self.u_plus.grid

    @property
    def u_minus_expr(self) -> Expr:
        return u_minus_expr(self.u_plus_expr, self.epsilon)

    @property
    def w_expr(self) -> Expr:
        return superpotential_expr(self.u_plus_expr, self.epsilon)

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "u_plus": self.u_plus.values,
            "u_minus": self.u_minus.values,
            "w": self.w.values,
            "v": self.v.values,
            "psi": self.psi.values,
        }


def build_model(
    u_plus: Expr,
    epsilon: complex,
    grid: Grid | None = None,
    bindings: Bindings | None = None,
    quadrature: str = "local8",
) -> PTModel:
    grid = grid or Grid()
    bindings = bindings if bindings is not None else Bindings()
    eps = complex(epsilon)
    up = _sample_u_plus(u_plus, grid, bindings)
    um_expr = u_minus_expr(u_plus, eps)
    um = _sample(um_expr, grid, bindings)
    um_prime = _sample(differentiate(um_expr), grid, bindings)
    w = SampledFunction(grid, 0.5 * (up.values + um.values))
    v = potential_from_u_pair(up, um, um_prime, eps)
    psi = build_wavefunction(w, quadrature)
    return PTModel(u_plus, eps, bindings, up, um, w, v, psi)

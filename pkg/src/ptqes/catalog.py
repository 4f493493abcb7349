"""Closed-form PT-symmetric QES families used as oracles for the pipeline.

``example1``: U+ = i al / (x + i a)^n with odd n >= 1.
``example2``: U+ = al exp(i k x), a periodic potential.
``pt_wavefunction_limit``: U+ = al f(x) with al -> 0, which forces a
PT-symmetric wave function and a real eigenvalue.

The closed forms are written in the expression language; the energy enters
through the real parameters ``re_eps`` and ``im_eps``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Grid,
    SampledFunction,
    ZeroGeneratingFunction,
    build_model,
    build_superpotential,
)
from .expr import Bindings, Expr, Param, differentiate, evaluate, parse
from .expr.nodes import const, mk_div, mk_mul, mk_sub
from .verify import CheckResult, check_anti_pt


class InvalidParameters(ValueError):
    pass


class WrongEntry(ValueError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    u_plus: Expr
    bindings: Bindings
    epsilon: complex
    u_minus: Expr
    w: Expr
    v: Expr
    log_psi: Expr
    singularities: tuple[complex, ...] = ()
    exactly_solvable: bool = False
    notes: str = ""
    params: dict = field(default_factory=dict)

    def sample(self, e: Expr, grid: Grid) -> np.ndarray:
        return evaluate(e, grid.x, self.bindings)

    def log_psi_values(self, grid: Grid) -> np.ndarray:
        """log psi normalized so that psi(0) = 1."""
        lp = self.sample(self.log_psi, grid)
        return lp - evaluate(self.log_psi, 0.0, self.bindings)

    def psi_values(self, grid: Grid) -> np.ndarray:
        return np.exp(self.log_psi_values(grid))

    def closed_forms(self, grid: Grid) -> dict[str, np.ndarray]:
        return {
            "u_plus": self.sample(self.u_plus, grid),
            "u_minus": self.sample(self.u_minus, grid),
            "w": self.sample(self.w, grid),
            "v": self.sample(self.v, grid),
            "log_psi": self.log_psi_values(grid),
        }

    def build(self, grid: Grid | None = None):
        """Run the generic pipeline on this entry's generating function."""
        return build_model(self.u_plus, self.epsilon, grid or Grid(), self.bindings)


def _energy_bindings(epsilon: complex, **params) -> Bindings:
    eps = complex(epsilon)
    return Bindings({**params, "re_eps": eps.real, "im_eps": eps.imag})


_EX1_U_PLUS = parse("i*al/(x+i*a)^n")
_EX1_U_MINUS = parse("-n/(x+i*a) - 4*im_eps/al*(x+i*a)^n")
_EX1_W = parse("i*al/(2*(x+i*a)^n) - n/(2*(x+i*a)) - 2*im_eps/al*(x+i*a)^n")
_EX1_V = parse(
    "re_eps - al^2/8/(x+i*a)^(2*n) + 2*im_eps^2/al^2*(x+i*a)^(2*n)"
    " + (n^2-2*n)/8/(x+i*a)^2 + 2*n*im_eps/al*(x+i*a)^(n-1)"
)
# psi = (x+ia)^(n/2) exp(...) for n > 1, and a separate form for n = 1.
_EX1_LOG_PSI = parse(
    "n/2*log(x+i*a) + i*al/(2*(n-1))/(x+i*a)^(n-1) + 2*im_eps/al*(x+i*a)^(n+1)/(n+1)"
)
_EX1_LOG_PSI_N1 = parse("(1-i*al)/2*log(x+i*a) + im_eps/al*(x+i*a)^2")


def example1(alpha: float, a: float, n: int, epsilon: complex) -> CatalogEntry:
    """Rational generating function with a pole at x = -ia.

    Bound states require Im(eps)/alpha < 0; n = 1 is the PT harmonic
    oscillator with a regularized inverse-square core.
    """
    if alpha == 0 or a == 0:
        raise InvalidParameters("example1 needs alpha != 0 and a != 0")
    if int(n) != n or n < 1 or n % 2 == 0:
        raise InvalidParameters(f"example1 needs an odd integer n >= 1, got {n}")
    n = int(n)
    b = _energy_bindings(epsilon, al=alpha, a=a, n=n)
    return CatalogEntry(
        name="example1",
        u_plus=_EX1_U_PLUS,
        bindings=b,
        epsilon=complex(epsilon),
        u_minus=_EX1_U_MINUS,
        w=_EX1_W,
        v=_EX1_V,
        log_psi=_EX1_LOG_PSI_N1 if n == 1 else _EX1_LOG_PSI,
        singularities=(-1j * a,),
        exactly_solvable=(n == 1),
        notes="bound state iff Im(eps)/alpha < 0",
        params={"al": alpha, "a": a, "n": n},
    )


_EX2_U_PLUS = parse("al*exp(i*k*x)")
_EX2_U_MINUS = parse("i*k - 4*i*im_eps/al*exp(-i*k*x)")
_EX2_W = parse("al/2*exp(i*k*x) + i*k/2 - 2*i*im_eps/al*exp(-i*k*x)")
_EX2_V = parse(
    "re_eps - k^2/8 + al^2/8*exp(2*i*k*x) - 2*im_eps^2/al^2*exp(-2*i*k*x)"
    " + 2*k*im_eps/al*exp(-i*k*x)"
)
_EX2_LOG_PSI = parse("-i*k*x/2 + i*al/(2*k)*exp(i*k*x) - 2*im_eps/(al*k)*exp(-i*k*x)")


def example2(alpha: float, k: float, epsilon: complex) -> CatalogEntry:
    """Periodic potential; exactly solvable when Im(eps) = 0."""
    if alpha == 0 or k == 0:
        raise InvalidParameters("example2 needs alpha != 0 and k != 0")
    b = _energy_bindings(epsilon, al=alpha, k=k)
    return CatalogEntry(
        name="example2",
        u_plus=_EX2_U_PLUS,
        bindings=b,
        epsilon=complex(epsilon),
        u_minus=_EX2_U_MINUS,
        w=_EX2_W,
        v=_EX2_V,
        log_psi=_EX2_LOG_PSI,
        exactly_solvable=(complex(epsilon).imag == 0),
        notes="periodic; psi bounded for real eps",
        params={"al": alpha, "k": k},
    )


CATALOG = {
    "example1": (example1, ("al", "a", "n"), "U+ = i*al/(x+i*a)^n, n odd"),
    "example2": (example2, ("al", "k"), "U+ = al*exp(i*k*x)"),
    "pt-limit": (None, ("B",), "U+ = al*f(x), al -> 0 with 2 Im(eps)/al fixed"),
}


# -- degenerate limit U+ -> 0 ------------------------------------------------


def limit_superpotential_expr(f: Expr, B: float) -> Expr:
    """W = (f'/f - i B / f) / 2."""
    return mk_mul(
        const(0.5),
        mk_sub(mk_div(differentiate(f), f), mk_div(const(1j * B), f)),
    )


def pt_wavefunction_limit(f: Expr, B: float, grid: Grid | None = None, bindings: Bindings | None = None) -> SampledFunction:
    """Superpotential of a PT-symmetric wave function, from the al -> 0 limit."""
    grid = grid or Grid()
    fv = evaluate(f, grid.x, bindings)
    bad = np.abs(fv) <= 1e-12
    if np.any(bad):
        j = int(np.argmax(bad))
        raise ZeroGeneratingFunction(float(grid.x[j]), complex(fv[j]))
    return SampledFunction(grid, evaluate(limit_superpotential_expr(f, B), grid.x, bindings))


def check_limit_anti_pt(w_limit: SampledFunction, tol: float = 1e-10) -> CheckResult:
    """A PT-symmetric wave function needs W*(-x) = -W(x); fails for f that is not real and even."""
    return check_anti_pt(w_limit, tol, name="limit_anti_pt")


@dataclass
class LimitStep:
    alpha: float
    epsilon: complex
    w: SampledFunction
    error: float


def limit_sequence(
    f: Expr,
    B: float,
    alphas,
    grid: Grid | None = None,
    bindings: Bindings | None = None,
    re_eps: float = 0.0,
    im_eps_per_alpha: float | None = None,
) -> list[LimitStep]:
    """Superpotentials for U+ = al_m f along a sequence al_m -> 0.

    The energy is eps_m = re_eps + i * al_m * im_eps_per_alpha.  The default
    ``im_eps_per_alpha = B/4`` is the choice for which the sequence tends to
    (f'/f - iB/f)/2; the ``error`` of each step is measured against that
    formula.
    """
    grid = grid or Grid()
    bindings = bindings if bindings is not None else Bindings()
    if im_eps_per_alpha is None:
        im_eps_per_alpha = B / 4
    if "alpha_" in bindings:
        raise ValueError("'alpha_' is reserved for the limit sequence")
    target = pt_wavefunction_limit(f, B, grid, bindings)
    u_plus = mk_mul(Param("alpha_"), f)
    steps = []
    for al in alphas:
        eps = complex(re_eps, al * im_eps_per_alpha)
        w = build_superpotential(u_plus, eps, grid, bindings.updated(alpha_=al))
        err = float(np.max(np.abs(w.values - target.values)))
        steps.append(LimitStep(float(al), eps, w, err))
    return steps


# -- n = 1 structure ---------------------------------------------------------


def check_n1_oscillator_structure(entry: CatalogEntry, grid: Grid | None = None, tol: float = 1e-8) -> CheckResult:
    """Fit the built V to c0 + c2 (x+ia)^2 + cm2 (x+ia)^-2 and compare coefficients.

    Expected: c2 = 2 Im(eps)^2/al^2, cm2 = -al^2/8 - 1/8,
    c0 = Re(eps) + 2 Im(eps)/al.
    """
    if entry.name != "example1" or entry.params.get("n") != 1:
        raise WrongEntry("oscillator structure applies to example1 with n = 1 only")
    grid = grid or Grid()
    al, a = entry.params["al"], entry.params["a"]
    eps = entry.epsilon
    v = entry.build(grid).v.values
    z = grid.x + 1j * a
    basis = np.stack([np.ones_like(z), z**2, z**-2], axis=1)
    coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
    fit_residual = float(np.linalg.norm(basis @ coef - v) / np.linalg.norm(v))
    expected = np.array(
        [eps.real + 2 * eps.imag / al, 2 * eps.imag**2 / al**2, -(al**2) / 8 - 1 / 8],
        dtype=complex,
    )
    coef_err = float(np.max(np.abs(coef - expected) / np.maximum(1.0, np.abs(expected))))
    details = {
        "c0": [coef[0].real, coef[0].imag],
        "c2": [coef[1].real, coef[1].imag],
        "c_minus2": [coef[2].real, coef[2].imag],
        "fit_residual": fit_residual,
        "coefficient_error": coef_err,
    }
    return CheckResult("n1_oscillator_structure", max(fit_residual, coef_err), tol, details=details)

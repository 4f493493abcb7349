"""Dirichlet finite-difference spectrum of H = -d^2/dx^2 / 2 + V."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import Grid, PipelineError, SampledFunction, build_model
from .expr import Bindings, EvaluationError, Expr
from .verify import Tolerances, run_battery

REALITY_THRESHOLD = 1e-6


class NonConvergence(ArithmeticError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class TridiagonalComplexMatrix:
    """Interior-point Hamiltonian: diagonal 1/h^2 + V, off-diagonal -1/(2h^2)."""

    diagonal: np.ndarray
    off_diagonal: float
    h: float

    @property
    def dim(self) -> int:
        return self.diagonal.size

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diagonal.astype(complex))
        idx = np.arange(self.dim - 1)
        m[idx, idx + 1] = self.off_diagonal
        m[idx + 1, idx] = self.off_diagonal
        return m

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out

    def banded(self, shift: complex = 0) -> np.ndarray:
        ab = np.empty((3, self.dim), dtype=complex)
        ab[0] = self.off_diagonal
        ab[1] = self.diagonal - shift
        ab[2] = self.off_diagonal
        return ab

    def norm(self) -> float:
        return float(np.max(np.abs(self.diagonal)) + 2 * abs(self.off_diagonal))


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    backward_errors: np.ndarray = field(repr=False)
    reality_fraction: float = 0.0

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "reality_fraction": float(self.reality_fraction),
            "max_backward_error": float(np.max(self.backward_errors, initial=0.0)),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass
class EnergyMatch:
    matched: bool
    distance: float
    index: int
    eigenvalue: complex

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "distance": self.distance,
            "index": self.index,
            "eigenvalue": [self.eigenvalue.real, self.eigenvalue.imag],
        }


def discretize(v: SampledFunction) -> TridiagonalComplexMatrix:
    if v.grid.N < 5:
        raise ValueError("discretization needs at least 5 grid points")
    h = v.grid.h
    return TridiagonalComplexMatrix(1.0 / h**2 + v.values[1:-1], -0.5 / h**2, h)


def reality_fraction(lams: np.ndarray, threshold: float = REALITY_THRESHOLD) -> float:
    if lams.size == 0:
        return 1.0
    real = np.abs(lams.imag) < threshold * np.maximum(1.0, np.abs(lams.real))
    return float(np.mean(real))


def _refine(m: TridiagonalComplexMatrix, lam: complex) -> tuple[complex, float]:
    """One inverse-iteration step plus a complex-symmetric Rayleigh quotient.

    Returns the better of the original and refined value together with its
    relative backward error ||T x - lam x|| / (||T|| ||x||).
    """
    scale = m.norm()
    shift = lam + 1e-13 * scale * (1 + 1j)
    rng = np.random.default_rng(m.dim)
    b = rng.standard_normal(m.dim) + 0j
    try:
        x = scipy.linalg.solve_banded((1, 1), m.banded(shift), b, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        return lam, np.inf
    if not np.all(np.isfinite(x)):
        return lam, np.inf
    x /= np.linalg.norm(x)
    tx = m.matvec(x)
    denom = x @ x
    refined = complex((x @ tx) / denom) if abs(denom) > 1e-8 else lam

    def berr(mu):
        return float(np.linalg.norm(tx - mu * x) / scale)

    e_old, e_new = berr(lam), berr(refined)
    return (refined, e_new) if e_new <= e_old else (lam, e_old)


def eigenvalues(m: TridiagonalComplexMatrix, refine: bool = True) -> Spectrum:
    """All eigenvalues, sorted by real part.

    Real diagonals go to the symmetric tridiagonal solver, complex ones to
    the dense nonsymmetric QR solver.  Each eigenvalue then gets one
    inverse-iteration refinement and a backward-error estimate.
    """
    if m.dim < 1:
        raise ValueError("empty matrix")
    hermitian = bool(np.all(m.diagonal.imag == 0))
    try:
        if hermitian:
            lams = scipy.linalg.eigvalsh_tridiagonal(
                m.diagonal.real, np.full(m.dim - 1, m.off_diagonal)
            ).astype(complex)
        else:
            lams = scipy.linalg.eigvals(m.to_dense(), check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"eigenvalue iteration failed: {exc}", {"dim": m.dim}) from exc
    if not np.all(np.isfinite(lams)):
        raise NonConvergence("non-finite eigenvalues", {"dim": m.dim, "n_bad": int(np.sum(~np.isfinite(lams)))})
    berrs = np.zeros(lams.size)
    if refine:
        for k, lam in enumerate(lams):
            lams[k], berrs[k] = _refine(m, complex(lam))
    if hermitian:
        lams = lams.real.astype(complex)
    order = np.lexsort((lams.imag, lams.real))
    lams, berrs = lams[order], berrs[order]
    return Spectrum(lams, berrs, reality_fraction(lams))


def match_factorization_energy(s: Spectrum, epsilon: complex, tol: float = 1e-3) -> EnergyMatch:
    d = np.abs(s.eigenvalues - complex(epsilon))
    k = int(np.argmin(d))
    return EnergyMatch(bool(d[k] < tol), float(d[k]), k, complex(s.eigenvalues[k]))


@dataclass
class SweepRecord:
    epsilon: complex
    reality_fraction: float | None = None
    match: EnergyMatch | None = None
    battery_pass: bool | None = None
    failed_checks: list[str] = field(default_factory=list)
    state_class: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "epsilon": [self.epsilon.real, self.epsilon.imag],
            "reality_fraction": self.reality_fraction,
            "match": self.match.to_dict() if self.match else None,
            "battery_pass": self.battery_pass,
            "failed_checks": self.failed_checks,
            "state_class": self.state_class,
            "error": self.error,
        }


def _sweep_point(u_plus, eps, grid, bindings, tols, with_spectrum, match_tol) -> SweepRecord:
    rec = SweepRecord(complex(eps))
    try:
        model = build_model(u_plus, eps, grid, bindings)
        report = run_battery(model, tols)
        rec.battery_pass = report.passed
        rec.failed_checks = report.failed()
        rec.state_class = report.state_class.value
        if with_spectrum:
            spec = eigenvalues(discretize(model.v))
            rec.reality_fraction = spec.reality_fraction
            rec.match = match_factorization_energy(spec, eps, match_tol)
    except (PipelineError, EvaluationError, NonConvergence) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def sweep(
    u_plus: Expr,
    eps_path,
    grid: Grid | None = None,
    bindings: Bindings | None = None,
    tols: Tolerances | None = None,
    with_spectrum: bool = True,
    match_tol: float = 1e-3,
    workers: int | None = None,
) -> list[SweepRecord]:
    """Build, verify and diagonalize at each energy; results follow ``eps_path`` order."""
    grid = grid or Grid()
    bindings = bindings if bindings is not None else Bindings()
    path = [complex(e) for e in eps_path]

    def point(eps):
        return _sweep_point(u_plus, eps, grid, bindings, tols, with_spectrum, match_tol)

    if workers and workers > 1 and len(path) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point, path))
    return [point(e) for e in path]

"""Verification battery for constructed PT-symmetric models.

Every residual is divided by the magnitude of the quantity being checked,
so tolerances are dimensionless.  Reflections use index mirroring on the
symmetric grid and are exact.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    PTModel,
    SampledFunction,
    Wavefunction,
    potential_from_superpotential,
)
from .expr import differentiate, evaluate


class StateClass(enum.Enum):
    BOUND = "BoundState"
    CONTINUUM = "ContinuumState"
    NOT_EIGENSTATE = "NotAnEigenstate"


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)
        self.passed = bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "residual": _finite_or_none(self.residual),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details:
            d["details"] = self.details
        return d


@dataclass
class Tolerances:
    symmetry: float = 1e-9
    identity: float = 1e-9
    schrodinger: float | None = None  # None -> 10 h^2 max(1, max|V|)
    decay: float = 1e-3
    bound: float = 1e3


@dataclass
class VerificationReport:
    checks: list[CheckResult]
    state_class: StateClass
    grid: dict
    epsilon: complex

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "state_class": self.state_class.value,
            "grid": dict(self.grid),
            "epsilon": [self.epsilon.real, self.epsilon.imag],
            "pass": self.passed,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _finite_or_none(v: float):
    return v if math.isfinite(v) else None


def _normalized(diff: np.ndarray, scale: float) -> float:
    err = float(np.max(np.abs(diff))) if diff.size else 0.0
    if not math.isfinite(err):
        return math.inf
    return err / scale if scale > 0 else err


def check_pt_symmetric(f: SampledFunction, tol: float = 1e-9, name: str = "pt_symmetry") -> CheckResult:
    """max |conj(f(-x)) - f(x)| / max|f|."""
    diff = np.conj(f.values[::-1]) - f.values
    return CheckResult(name, _normalized(diff, f.max_abs()), tol)


def check_anti_pt(f: SampledFunction, tol: float = 1e-9, name: str = "anti_pt_symmetry") -> CheckResult:
    """max |conj(f(-x)) + f(x)| / max|f|."""
    diff = np.conj(f.values[::-1]) + f.values
    return CheckResult(name, _normalized(diff, f.max_abs()), tol)


def check_superpotential_condition(
    w: SampledFunction,
    w_prime: SampledFunction,
    epsilon: complex,
    tol: float = 1e-9,
    name: str = "superpotential_condition",
) -> CheckResult:
    """Condition on W that makes V = (W^2 - W')/2 + eps PT-symmetric.

    (W*(-x))^2 + d/dx W*(-x) + 2 eps* = W^2 - W' + 2 eps, where
    d/dx[W*(-x)] = -conj(W'(-x)).
    """
    eps = complex(epsilon)
    wr = np.conj(w.values[::-1])
    dwr = -np.conj(w_prime.values[::-1])
    lhs = wr**2 + dwr + 2 * eps.conjugate()
    rhs = w.values**2 - w_prime.values + 2 * eps
    scale = float(np.max(np.abs(w.values) ** 2) + np.max(np.abs(w_prime.values)) + 2 * abs(eps))
    return CheckResult(name, _normalized(lhs - rhs, scale), tol)


def default_schrodinger_tol(v: SampledFunction) -> float:
    return 10.0 * v.grid.h**2 * max(1.0, v.max_abs())


def _log_psi(psi: SampledFunction) -> np.ndarray:
    if isinstance(psi, Wavefunction) and psi.log_values is not None:
        return psi.log_values
    with np.errstate(divide="ignore"):
        return np.log(psi.values.astype(complex))


def schrodinger_residual(
    v: SampledFunction,
    psi: SampledFunction,
    epsilon: complex,
    tol: float | None = None,
    name: str = "schrodinger_residual",
) -> CheckResult:
    """max_j |-psi''/2 + V psi - eps psi| / max|psi| over interior nodes.

    psi'' is the 3-point second difference.  When log-amplitudes are
    available the residual is formed from neighbour ratios, which stays
    finite even where psi itself over- or underflows.
    """
    h = v.grid.h
    eps = complex(epsilon)
    if tol is None:
        tol = default_schrodinger_tol(v)
    lp = _log_psi(psi)
    with np.errstate(all="ignore"):
        if np.all(np.isfinite(lp)):
            center = lp[1:-1]
            r_plus = np.exp(lp[2:] - center)
            r_minus = np.exp(lp[:-2] - center)
            local = -0.5 * (r_plus - 2.0 + r_minus) / h**2 + v.values[1:-1] - eps
            weight = np.exp(center.real - np.max(lp.real))
            res = np.abs(local) * weight
        else:
            p = psi.values
            lap = (p[2:] - 2 * p[1:-1] + p[:-2]) / h**2
            res = np.abs(-0.5 * lap + (v.values[1:-1] - eps) * p[1:-1]) / np.max(np.abs(p))
    residual = float(np.max(res)) if res.size else 0.0
    if not math.isfinite(residual):
        residual = math.inf
    return CheckResult(name, residual, tol, details={"h": h})


def classify_state(psi: SampledFunction, decay_tol: float = 1e-3, bound_tol: float = 1e3) -> StateClass:
    """Bound if psi has decayed at both ends, continuum if merely bounded."""
    la = _log_psi(psi).real
    peak = float(np.max(la))
    edge = max(float(la[0]), float(la[-1]))
    if edge - peak < math.log(decay_tol):
        return StateClass.BOUND
    if peak - float(la[psi.grid.center]) < math.log(bound_tol):
        return StateClass.CONTINUUM
    return StateClass.NOT_EIGENSTATE


def check_factorization_identity(model: PTModel, tol: float = 1e-9) -> CheckResult:
    """U+' - U+ U- - 2(eps - eps*) = 0, with U+' symbolic."""
    eps = model.epsilon
    dup = evaluate(differentiate(model.u_plus_expr), model.grid.x, model.bindings)
    prod = model.u_plus.values * model.u_minus.values
    shift = 2 * (eps - eps.conjugate())
    resid = dup - prod - shift
    scale = float(np.max(np.abs(dup)) + np.max(np.abs(prod)) + abs(shift))
    return CheckResult("factorization_identity", _normalized(resid, scale), tol)


def check_potential_consistency(model: PTModel, tol: float = 1e-9) -> CheckResult:
    """V from (W^2 - W')/2 + eps against the stored U+/U- form."""
    v_from_w = potential_from_superpotential(model.w, superpotential_derivative(model), model.epsilon)
    diff = v_from_w.values - model.v.values
    return CheckResult("potential_consistency", _normalized(diff, 1.0 + model.v.max_abs()), tol)


def superpotential_derivative(model: PTModel) -> SampledFunction:
    return SampledFunction(model.grid, evaluate(differentiate(model.w_expr), model.grid.x, model.bindings))


def check_u_pair_reconstruction(model: PTModel, tol: float = 1e-9) -> CheckResult:
    """W + W*(-x) = U+ and W - W*(-x) = U- on the grid."""
    wr = model.w.pt_image().values
    d1 = model.w.values + wr - model.u_plus.values
    d2 = model.w.values - wr - model.u_minus.values
    scale = max(model.u_plus.max_abs(), model.u_minus.max_abs())
    return CheckResult("u_pair_reconstruction", _normalized(np.concatenate([d1, d2]), scale), tol)


def run_battery(model: PTModel, tols: Tolerances | None = None) -> VerificationReport:
    tols = tols or Tolerances()
    w_prime = superpotential_derivative(model)
    checks = [
        check_pt_symmetric(model.u_plus, tols.symmetry, "pt_u_plus"),
        check_anti_pt(model.u_minus, tols.symmetry, "anti_pt_u_minus"),
        check_pt_symmetric(model.v, tols.symmetry, "pt_potential"),
        check_superpotential_condition(model.w, w_prime, model.epsilon, tols.symmetry),
        check_factorization_identity(model, tols.identity),
        check_potential_consistency(model, tols.identity),
        check_u_pair_reconstruction(model, tols.identity),
        schrodinger_residual(model.v, model.psi, model.epsilon, tols.schrodinger),
    ]
    state = classify_state(model.psi, tols.decay, tols.bound)
    return VerificationReport(checks, state, model.grid.to_dict(), complex(model.epsilon))

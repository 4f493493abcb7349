"""PT-symmetric quasi-exactly-solvable potentials from a generating function.

Pick a PT-symmetric generating function U+ and a complex energy eps; the
library builds the superpotential, potential and the known eigenfunction,
and checks the claimed properties numerically.
"""

from .core import (
    Grid,
    OverflowingWavefunction,
    PipelineError,
    PTModel,
    SampledFunction,
    Wavefunction,
    ZeroGeneratingFunction,
    build_model,
    build_superpotential,
    build_u_minus,
    build_wavefunction,
    potential_from_superpotential,
    potential_from_u_pair,
)
from .expr import Bindings, Expr, conjugate_reflect, differentiate, evaluate, parse

__version__ = "0.1.0"

__all__ = [
    "Bindings",
    "Expr",
    "Grid",
    "OverflowingWavefunction",
    "PTModel",
    "PipelineError",
    "SampledFunction",
    "Wavefunction",
    "ZeroGeneratingFunction",
    "build_model",
    "build_superpotential",
    "build_u_minus",
    "build_wavefunction",
    "conjugate_reflect",
    "differentiate",
    "evaluate",
    "parse",
    "potential_from_superpotential",
    "potential_from_u_pair",
]

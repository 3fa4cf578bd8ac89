"""Numerical lab for radial solutions of nonlinear Helmholtz equations -Δu = g(|x|, u)."""

from .diagnostics import Verdict, classify
from .errors import HelmholtzLabError
from .nonlinearity import (NonlinearitySpec, compute_alpha0, concave_convex, defocusing_power,
                           focusing_power, linear_helmholtz, pure_damping, saturable, validate_spec)
from .radial_ivp import SolveConfig, integrate

__all__ = [
    "HelmholtzLabError", "NonlinearitySpec", "SolveConfig", "Verdict", "classify",
    "compute_alpha0", "concave_convex", "defocusing_power", "focusing_power", "integrate",
    "linear_helmholtz", "pure_damping", "saturable", "validate_spec",
]

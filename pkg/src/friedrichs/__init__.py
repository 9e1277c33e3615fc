"""Rank-one Friedrichs model h_mu(p) = h0(p) - mu v on the three-dimensional torus.

Band edges, the Fredholm determinant Delta_mu(p, z), critical coupling,
bound states below the essential spectrum, a brute-force grid oracle and
numerical checks of the threshold expansions.
"""
from . import _backend
from .errors import ConfigError, DegenerateMomentumError, QuadratureError, TheoremViolation
from .form_factor import FormFactor, Kind
from .fredholm import (
    ModelParams,
    ThresholdKind,
    bs_eigenvalue,
    classify_threshold,
    d_fn,
    delta,
    lambda_fn,
    mu0,
    threshold_function_diagnostics,
)
from .eigensolver import band_scan, eigenvalue, has_bound_state, monotonicity_check
from .lattice_dispersion import TorusPoint, band_edges, epsilon, u, u0
from .torus_quadrature import DEFAULT_SPEC, QuadratureSpec

__version__ = "0.1.0"
BACKEND = _backend.name()

__all__ = [
    "BACKEND", "ConfigError", "DEFAULT_SPEC", "DegenerateMomentumError", "FormFactor", "Kind",
    "ModelParams", "QuadratureError", "QuadratureSpec", "TheoremViolation", "ThresholdKind",
    "TorusPoint", "band_edges", "band_scan", "bs_eigenvalue", "classify_threshold", "d_fn", "delta",
    "eigenvalue", "epsilon", "has_bound_state", "lambda_fn", "monotonicity_check", "mu0",
    "threshold_function_diagnostics", "u", "u0",
]

"""Fredholm determinant of h_mu(p) = h0(p) - mu v and the objects built on it.

    Lambda(p, z) = int phi(t)^2 / (u(p, t) - z) dt
    Delta(p, z)  = 1 - mu Lambda(p, z)
    D(p, w)      = int phi(q + p/2)^2 / (u0(p, q) + w^2) dq = Lambda(p, m(p) - w^2)

Only real spectral parameters z <= m(p) are supported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .form_factor import FormFactor
from .lattice_dispersion import as_points, degenerate_mask, lower_edge
from .torus_quadrature import (
    DEFAULT_SPEC,
    CosineNumerator,
    IntegralValue,
    QuadratureSpec,
    _peaked_value,
    integrate_outside_ball,
    integrate_peaked,
)


@dataclass(frozen=True)
class ModelParams:
    mu: float
    ff: FormFactor

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"coupling mu must be positive, got {self.mu}")

    def with_mu(self, mu: float) -> "ModelParams":
        return ModelParams(mu, self.ff)


@dataclass(frozen=True)
class DeterminantValue:
    value: float
    err_est: float
    p: tuple[float, float, float]
    z: float


class ThresholdKind(str, Enum):
    zero_energy_resonance = "zero_energy_resonance"
    zero_eigenvalue = "zero_eigenvalue"
    subcritical = "subcritical"
    supercritical = "supercritical"


@dataclass(frozen=True)
class ThresholdClass:
    kind: ThresholdKind
    mu0: float


@dataclass(frozen=True)
class ThresholdRow:
    delta: float
    l1: float
    l2: float


def _numerator(ff: FormFactor, p) -> CosineNumerator:
    shift = tuple(float(x) for x in as_points(p) / 2.0)
    return CosineNumerator(ff.cosine_coefficients, shift, 2)


def _check_energy(p, z):
    m = float(lower_edge(p))
    if not z <= m:
        raise ValueError(f"z = {z!r} lies above the band edge m(p) = {m!r}")
    if z == m and degenerate_mask(p).any():
        raise ValueError("Lambda(p, m(p)) diverges when some |p_i| = pi")
    return m


def _lambda(p, z, ff, quad, estimate):
    m = _check_energy(p, z)
    mask = degenerate_mask(p)
    if mask.all():
        # u(p, .) == 12: Lambda = ||phi||^2 / (12 - z)
        return IntegralValue(ff.l2_norm_sq / (m - z), 0.0, 0)
    w = math.sqrt(m - z)
    g = _numerator(ff, p)
    if estimate:
        return integrate_peaked(g, p, w, quad)
    value, n = _peaked_value(g, p, w, quad)
    return IntegralValue(value, 0.0, n)


def lambda_fn(p, z: float, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC) -> IntegralValue:
    """Lambda(p, z) for real z <= m(p), computed as D(p, sqrt(m(p) - z))."""
    return _lambda(p, z, params.ff, quad, True)


def lambda_value(p, z: float, ff: FormFactor, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Lambda(p, z) without the error estimate (half the cost); used in root finding."""
    return _lambda(p, z, ff, quad, False).value


def delta(p, z: float, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC) -> DeterminantValue:
    lam = lambda_fn(p, z, params, quad)
    return DeterminantValue(1.0 - params.mu * lam.value, params.mu * lam.err_est,
                            tuple(as_points(p).tolist()), float(z))


def delta_value(p, z: float, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    return 1.0 - params.mu * lambda_value(p, z, params.ff, quad)


def bs_eigenvalue(p, z: float, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    """The nonzero eigenvalue mu Lambda(p, z) of the rank-one Birman-Schwinger operator.

    z is an eigenvalue of h_mu(p) exactly when this equals 1.
    """
    return params.mu * lambda_fn(p, z, params, quad).value


@lru_cache(maxsize=256)
def _lambda_origin(ff: FormFactor, quad: QuadratureSpec) -> IntegralValue:
    return integrate_peaked(_numerator(ff, (0.0, 0.0, 0.0)), (0.0, 0.0, 0.0), 0.0, quad)


def mu0_estimate(ff: FormFactor, quad: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float]:
    """Critical coupling 1 / Lambda(0, 0) and its propagated error estimate."""
    lam = _lambda_origin(ff, quad)
    return 1.0 / lam.value, lam.err_est / lam.value**2


def mu0(ff: FormFactor, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    return mu0_estimate(ff, quad)[0]


def d_fn(p, w: float, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC) -> IntegralValue:
    """D(p, w) = int phi(q + p/2)^2 / (u0(p, q) + w^2) dq for all |p_i| < pi."""
    if not w >= 0:
        raise ValueError(f"w must be >= 0, got {w}")
    if degenerate_mask(p).any():
        raise ValueError("D(p, w) needs all |p_i| < pi")
    return integrate_peaked(_numerator(params.ff, p), p, w, quad)


def classify_threshold(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-6,
                       phi_tol: float = 1e-9) -> ThresholdClass:
    """Resonance / threshold eigenvalue / off-critical classification of h_mu(0).

    Criticality means |mu - mu0| <= tol * mu0.  At criticality phi(0) decides:
    a zero energy resonance when |phi(0)| > phi_tol, else a zero eigenvalue.
    """
    m0 = mu0(params.ff, quad)
    if abs(params.mu - m0) <= tol * m0:
        kind = (ThresholdKind.zero_energy_resonance if abs(params.ff.value_at_zero) > phi_tol
                else ThresholdKind.zero_eigenvalue)
    elif params.mu < m0:
        kind = ThresholdKind.subcritical
    else:
        kind = ThresholdKind.supercritical
    return ThresholdClass(kind, m0)


def threshold_function_diagnostics(params: ModelParams, delta_grid, quad: QuadratureSpec = DEFAULT_SPEC):
    """Truncated L1 and L2 integrals of the threshold solution f = phi / u(0, .).

    For each radius r the integrals run over the torus with the ball |q| < r
    removed.  L2 grows like 1/r when phi(0) != 0 (f is not square
    integrable) while L1 stays bounded.
    """
    radii = [float(r) for r in delta_grid]
    if any(not 0 < r <= 1 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be decreasing and lie in (0, 1]")
    ff = params.ff

    def abs_phi(q1, q2, q3):
        return np.abs(ff(q1, q2, q3))

    def phi_sq(q1, q2, q3):
        return ff(q1, q2, q3) ** 2

    return [
        ThresholdRow(r, integrate_outside_ball(abs_phi, r, quad, 1), integrate_outside_ball(phi_sq, r, quad, 2))
        for r in radii
    ]

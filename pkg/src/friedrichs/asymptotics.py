"""Low-energy and small-momentum behaviour of the determinant.

Each check samples the determinant on a geometric grid and fits a two-term
model by unweighted least squares.

Two slope predictions are reported for each fit.  ``theoretical_slope`` is
the commonly quoted coefficient, pi^2 mu phi(0)^2 in w and
(sqrt(3)/2) pi^2 mu0 phi(0)^2 in |p|.  ``derived_slope`` is twice that.  It
comes from the local model u0(0, q) = |q|^2 + O(|q|^4):

    D(0, 0) - D(0, w) ~ phi(0)^2 int_{R^3} w^2 / (|q|^2 (|q|^2 + w^2)) dq = 2 pi^2 phi(0)^2 w

and from w(p) = sqrt(m(p)) = (sqrt(3)/2)|p| + O(|p|^3) when z = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TheoremViolation
from .fredholm import ModelParams, _numerator, delta_value, lambda_value, mu0
from .lattice_dispersion import as_points, lower_edge
from .torus_quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_peaked

PHI0_TOL = 1e-9


@dataclass(frozen=True)
class SlopeFit:
    samples: tuple[tuple[float, float], ...]
    fitted_slope: float
    fitted_curvature: float
    residual_rms: float
    theoretical_slope: float
    rel_error: float
    derived_slope: float = math.nan
    derived_rel_error: float = math.nan

    def __post_init__(self):
        if len(self.samples) < 4:
            raise ValueError("a slope fit needs at least 4 samples")


@dataclass(frozen=True)
class LowerBound:
    c: float
    spread: float          # max/min of the sampled ratios
    ratios: tuple[float, ...] = field(repr=False)
    energy: str = "edge"

    @property
    def holds(self) -> bool:
        return self.c > 0


def _rel(fitted, reference):
    return abs(fitted - reference) / abs(reference) if reference != 0 else math.nan


def _fit(s, y, intercept=None):
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if intercept is not None:
        y = y - intercept
    A = np.column_stack([s, s * s])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), rms


def _require_critical(params: ModelParams, quad):
    m0 = mu0(params.ff, quad)
    if abs(params.mu - m0) > 1e-6 * m0:
        raise ValueError(f"this check needs mu = mu0 = {m0!r}, got {params.mu!r}")
    return m0


def fit_w_slope(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, w_grid=(0.2, 0.1, 0.05, 0.025, 0.0125)) -> SlopeFit:
    """Fit Delta(0, -w^2) = Delta(0, 0) + a1 w + a2 w^2."""
    w = np.asarray(w_grid, dtype=float)
    if w.size < 4 or np.any(w <= 0) or np.any(w > 0.3):
        raise ValueError("w_grid needs at least 4 points in (0, 0.3]")
    origin = (0.0, 0.0, 0.0)
    base = delta_value(origin, 0.0, params, quad)
    values = [delta_value(origin, -x * x, params, quad) for x in w]
    a1, a2, rms = _fit(w, values, intercept=base)
    phi0_sq = params.ff.value_at_zero**2
    stated = math.pi**2 * params.mu * phi0_sq
    derived = 2.0 * stated
    return SlopeFit(tuple(zip(w.tolist(), values)), a1, a2, rms, stated, _rel(a1, stated), derived, _rel(a1, derived))


def fit_p_slope(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, direction=(1.0, 0.0, 0.0),
                s_grid=(0.1, 0.05, 0.025, 0.0125)) -> SlopeFit:
    """Fit Delta_mu0(s d, 0) = a1 s + a2 s^2 along the unit direction d."""
    m0 = _require_critical(params, quad)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    s = np.asarray(s_grid, dtype=float)
    if s.size < 4 or np.any(s <= 0) or np.any(s > 0.2):
        raise ValueError("s_grid needs at least 4 points in (0, 0.2]")
    values = [delta_value(x * d, 0.0, params, quad) for x in s]
    a1, a2, rms = _fit(s, values)
    stated = math.sqrt(3.0) / 2.0 * math.pi**2 * m0 * params.ff.value_at_zero**2
    derived = 2.0 * stated
    return SlopeFit(tuple(zip(s.tolist(), values)), a1, a2, rms, stated, _rel(a1, stated), derived, _rel(a1, derived))


def sandwich_ratios(fit: SlopeFit) -> np.ndarray:
    """Delta(p, 0) / (a1 |p|) over the samples of a p-slope fit."""
    s, v = np.array(fit.samples).T
    return v / (fit.fitted_slope * s)


def quadratic_lower_bound(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, p_samples=None,
                          energy: str = "edge", strict: bool = True) -> LowerBound:
    """min over samples of Delta_mu0(p, z) / |p|^2 for phi(0) = 0.

    ``energy="edge"`` evaluates at z = m(p); ``energy="threshold"`` at z = 0,
    the bottom m(0) of the essential spectrum of h_mu(0).  With ``strict`` a
    non-positive minimum raises TheoremViolation carrying the result as
    ``.bound``.
    """
    if abs(params.ff.value_at_zero) > PHI0_TOL:
        raise ValueError("the quadratic lower bound concerns phi(0) = 0 (threshold eigenvalue regime)")
    if energy not in ("edge", "threshold"):
        raise ValueError(f"energy must be 'edge' or 'threshold', got {energy!r}")
    _require_critical(params, quad)
    if p_samples is None:
        rng = np.random.default_rng(0)
        dirs = rng.normal(size=(20, 3))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        p_samples = dirs * np.geomspace(0.01, 0.5, 20)[:, None]
    pts = as_points(p_samples)
    ratios = []
    for p in pts:
        z = float(lower_edge(p)) if energy == "edge" else 0.0
        ratios.append(delta_value(p, z, params, quad) / float(p @ p))
    r = np.array(ratios)
    bound = LowerBound(float(r.min()), float(r.max() / r.min()), tuple(r.tolist()), energy)
    if strict and not bound.holds:
        exc = TheoremViolation(f"Delta_mu0(p, z)/|p|^2 has non-positive minimum {bound.c!r} (energy={energy})")
        exc.bound = bound
        raise exc
    return bound


def p2_residual_ratios(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, p_samples=(), w_grid=(0.0,)) -> np.ndarray:
    """|D(p, w) - D(0, w)| / |p|^2 as an array of shape (len(p_samples), len(w_grid))."""
    pts = as_points(p_samples)
    w = np.asarray(w_grid, dtype=float)
    if np.any(np.linalg.norm(pts, axis=-1) > 0.3) or np.any(np.linalg.norm(pts, axis=-1) == 0):
        raise ValueError("samples must satisfy 0 < |p| <= 0.3")
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError("w_grid must lie in [0, 1]")
    ff = params.ff
    origin = np.zeros(3)
    base = [integrate_peaked(_numerator(ff, origin), origin, x, quad).value for x in w]
    out = np.empty((len(pts), len(w)))
    for i, p in enumerate(pts):
        g = _numerator(ff, p)
        for j, x in enumerate(w):
            out[i, j] = abs(integrate_peaked(g, p, x, quad).value - base[j]) / float(p @ p)
    return out


def uniform_p2_residual(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, p_samples=(), w_grid=(0.0,)) -> float:
    return float(p2_residual_ratios(params, quad, p_samples, w_grid).max())


def hessian_at_zero(params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, h_step: float = 0.05,
                    strict: bool = True) -> np.ndarray:
    """Central-difference Hessian of p -> Lambda(p, 0) at p = 0.

    With ``strict`` a non-negative diagonal entry or an off-diagonal above
    1e-3 of the diagonal magnitude raises TheoremViolation.

    Note that Lambda(., 0) has a |p| cusp at the origin when phi(0) != 0, so
    the diagonal entries scale like 1/h_step there.
    """
    if not 1e-3 <= h_step <= 1e-1:
        raise ValueError("h_step must lie in [1e-3, 1e-1]")
    ff = params.ff
    e = np.eye(3) * h_step

    def lam(p):
        return lambda_value(p, 0.0, ff, quad)

    centre = lam(np.zeros(3))
    H = np.empty((3, 3))
    for i in range(3):
        H[i, i] = (lam(e[i]) - 2.0 * centre + lam(-e[i])) / h_step**2
        for j in range(i):
            H[i, j] = H[j, i] = (
                lam(e[i] + e[j]) - lam(e[i] - e[j]) - lam(e[j] - e[i]) + lam(-e[i] - e[j])
            ) / (4.0 * h_step**2)
    if strict:
        diag = np.diag(H)
        off = np.abs(H - np.diag(diag)).max()
        if np.any(diag >= 0) or off >= 1e-3 * np.abs(diag).min():
            raise TheoremViolation(f"Lambda(., 0) has no non-degenerate maximum at 0: {H.tolist()}")
    return H

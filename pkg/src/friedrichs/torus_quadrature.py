"""Integration over the 3-torus.

Two rules are provided:

* a periodic midpoint tensor rule for smooth integrands, and
* a pyramid (Duffy) rule for integrands g(q) / (u0(p, q) + w^2)^k whose
  denominator has its quadratic minimum at q = 0.

The pyramid rule splits the cell (-pi, pi]^3 into six pyramids with apex at
the minimum.  On the face x_a = +-pi the nodes are q = t * pi * (+-1, s, v)
with Jacobian pi^3 t^2, which cancels the 1/|q|^2 behaviour of the integrand at
w = 0 and leaves a smooth function of (t, s, v).  For w > 0 the radial
direction is split into geometric panels starting at the scale of w, and the
transverse directions are graded around s = 0 when cos(p_i/2) differ strongly
between axes (the nearby complex pole then sits close to the real segment).

Directions with |p_i| = pi carry no quadratic term; they are integrated by the
midpoint rule and the pyramids live in the remaining coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _backend
from .errors import QuadratureError
from .lattice_dispersion import TWO_PI, degenerate_mask, half_cosines

Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the torus rules.

    n_grid
        midpoint nodes per axis for the tensor rule (even, >= 8)
    n_radial
        Gauss-Legendre nodes per radial panel of the pyramid rule
    n_angular
        Gauss-Legendre nodes per transverse axis of each pyramid face
    target_rel_tol, max_refine
        stopping rule for :func:`refine_until`
    """

    n_grid: int = 48
    n_radial: int = 16
    n_angular: int = 24
    target_rel_tol: float = 1e-8
    max_refine: int = 4

    def __post_init__(self):
        if self.n_grid < 8 or self.n_grid % 2:
            raise ValueError(f"n_grid must be even and >= 8, got {self.n_grid}")
        if self.n_radial < 4 or self.n_angular < 4:
            raise ValueError("n_radial and n_angular must be >= 4")
        if not 1e-14 < self.target_rel_tol < 1e-2:
            raise ValueError(f"target_rel_tol out of range: {self.target_rel_tol}")
        if self.max_refine < 1:
            raise ValueError("max_refine must be >= 1")

    def scaled(self, factor: float) -> "QuadratureSpec":
        def even(n, lo):
            return max(lo, 2 * int(round(n * factor / 2)))

        return replace(
            self,
            n_grid=even(self.n_grid, 8),
            n_radial=even(self.n_radial, 4),
            n_angular=even(self.n_angular, 4),
        )

    def refined(self) -> "QuadratureSpec":
        """Next rung of the refinement ladder (tensor grid doubled, pyramid x1.5)."""
        def up(n):
            return 2 * math.ceil(0.75 * n)

        return replace(self, n_grid=2 * self.n_grid, n_radial=up(self.n_radial), n_angular=up(self.n_angular))

    def coarsened(self) -> "QuadratureSpec":
        """Cheaper companion rule used for two-level error estimates."""
        def down(n):
            return max(4, 2 * int(round(n / 3)))

        return replace(self, n_grid=max(8, 2 * (self.n_grid // 4)), n_radial=down(self.n_radial),
                       n_angular=down(self.n_angular))


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class IntegralValue:
    value: float
    err_est: float
    n_evals: int
    levels: int = 1

    def __post_init__(self):
        if not self.err_est >= 0:
            raise ValueError("err_est must be non-negative")


@dataclass(frozen=True)
class CosineNumerator:
    """(a0 + sum_i a_i cos(q_i + shift_i)) ** power, recognised by the compiled kernel."""

    coefficients: tuple[float, float, float, float]
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)
    power: int = 2

    def __call__(self, q1, q2, q3):
        a0, a1, a2, a3 = self.coefficients
        s1, s2, s3 = self.shift
        g = a0 + a1 * np.cos(q1 + s1) + a2 * np.cos(q2 + s2) + a3 * np.cos(q3 + s3)
        return g**self.power


# ---------------------------------------------------------------------------
# tensor rule


def midpoint_nodes(n: int) -> np.ndarray:
    h = TWO_PI / n
    return -np.pi + (np.arange(n) + 0.5) * h


def _check_finite(values, where):
    if not np.all(np.isfinite(values)):
        bad = np.count_nonzero(~np.isfinite(values))
        raise QuadratureError(f"non-finite integrand value at {bad} node(s) of the {where}")


def tensor_sum(f: Integrand, n: int) -> float:
    """Midpoint rule with n^3 nodes; exact for trigonometric polynomials of degree < n."""
    x = midpoint_nodes(n)
    vals = np.broadcast_to(f(x[:, None, None], x[None, :, None], x[None, None, :]), (n, n, n))
    _check_finite(vals, f"{n}^3 tensor grid")
    h = TWO_PI / n
    return float(vals.sum(axis=(1, 2)).sum() * h**3)


def integrate_smooth(f: Integrand, spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralValue:
    """Integral of a smooth periodic f(q1, q2, q3) over the torus.

    The value uses spec.n_grid nodes per axis; err_est is the difference to
    the half-resolution grid.
    """
    n = spec.n_grid
    fine = tensor_sum(f, n)
    coarse = tensor_sum(f, n // 2)
    return IntegralValue(fine, abs(fine - coarse), n**3 + (n // 2) ** 3)


# ---------------------------------------------------------------------------
# pyramid rule


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _panel_rule(edges, n):
    x, w = _gauss(n)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        xs.append(a + (b - a) * (x + 1.0) / 2.0)
        ws.append(w * (b - a) / 2.0)
    return np.concatenate(xs), np.concatenate(ws)


def _geometric_edges(start, stop=1.0):
    edges = [0.0]
    b = start
    while b < stop:
        edges.append(b)
        b *= 2.0
    edges.append(stop)
    return edges


def radial_panels(w: float) -> list[float]:
    """Breakpoints of the radial variable t in [0, 1]."""
    t0 = 0.125 if w <= 0 else min(w / TWO_PI, 0.125)
    return _geometric_edges(t0)


@lru_cache(maxsize=4096)
def _radial_rule(w: float, n: int):
    return _panel_rule(radial_panels(w), n)


@lru_cache(maxsize=4096)
def _transverse_rule(kappa: float, n: int):
    # kappa = sqrt(c_face / c_transverse): the integrand has a complex pole
    # near s = +-i kappa, so grade the panels towards s = 0 when it is small
    if kappa >= 0.5:
        x, w = _gauss(n)
        return np.array(x), np.array(w)
    half = np.array(_geometric_edges(kappa))
    edges = np.concatenate([-half[::-1], half[1:]])
    return _panel_rule(edges, max(4, n // 2))


def _kappa(c, face, other):
    return float(np.sqrt(c[face] / c[other]))


def _face_tables(t, sign, s, v, c, shift, face, b, cax):
    qa = sign * np.pi * t
    qb = np.pi * t[:, None] * s[None, :]
    qc = np.pi * t[:, None] * v[None, :]
    ua = 4.0 * c[face] * np.sin(qa / 2.0) ** 2
    ub = 4.0 * c[b] * np.sin(qb / 2.0) ** 2
    uc = 4.0 * c[cax] * np.sin(qc / 2.0) ** 2
    fa = np.cos(qa + shift[face])
    fb = np.cos(qb + shift[b])
    fc = np.cos(qc + shift[cax])
    return ua, fa, ub, fb, uc, fc


def _pyramid_kernel(g: CosineNumerator, c, w2, w, spec, den_power):
    """Full-rank case through the compiled (or NumPy) face kernel."""
    n_r, n_a = spec.n_radial, spec.n_angular
    t, wt = _radial_rule(float(w), n_r)
    wt_eff = wt * np.pi**3 * t**2
    coef = g.coefficients
    shift = np.asarray(g.shift, dtype=float)
    total = 0.0
    n_evals = 0
    for face in range(3):
        b, cax = [i for i in range(3) if i != face]
        s, ws = _transverse_rule(_kappa(c, face, b), n_a)
        v, wv = _transverse_rule(_kappa(c, face, cax), n_a)
        for sign in (1.0, -1.0):
            ua, fa, ub, fb, uc, fc = _face_tables(t, sign, s, v, c, shift, face, b, cax)
            total += _backend.face_sum(
                wt_eff, ws, wv, ua, fa, ub, fb, uc, fc,
                float(coef[0]), float(coef[1 + face]), float(coef[1 + b]), float(coef[1 + cax]),
                int(g.power), int(den_power), float(w2),
            )
            n_evals += t.size * s.size * v.size
    if not math.isfinite(total):
        raise QuadratureError("non-finite value from the pyramid rule")
    return total, n_evals


def _pyramid_generic(g: Integrand, c, deg, w2, w, spec, den_power):
    """Any callable numerator; handles degenerate directions."""
    live = [i for i in range(3) if not deg[i]]
    dead = [i for i in range(3) if deg[i]]
    d = len(live)
    xd = midpoint_nodes(spec.n_grid)
    hd = TWO_PI / spec.n_grid
    total = 0.0
    n_evals = 0

    if d == 0:
        shape = (spec.n_grid,) * 3
        q = [xd.reshape([-1 if k == i else 1 for k in range(3)]) for i in range(3)]
        vals = np.broadcast_to(g(*q), shape) / w2**den_power
        _check_finite(vals, "degenerate tensor grid")
        return float(vals.sum(axis=(1, 2)).sum() * hd**3), vals.size

    t_all, wt_all = _radial_rule(float(w), spec.n_radial)
    edges = radial_panels(w)
    n_per = spec.n_radial
    for face in live:
        others = [i for i in live if i != face]
        trans = [_transverse_rule(_kappa(c, face, o), spec.n_angular) for o in others]
        for sign in (1.0, -1.0):
            # one radial panel at a time to bound memory
            for k in range(len(edges) - 1):
                t = t_all[k * n_per:(k + 1) * n_per]
                wt = wt_all[k * n_per:(k + 1) * n_per] * np.pi**d * t ** (d - 1)
                ndim = 1 + len(others) + len(dead)

                def axis_shape(pos):
                    return [-1 if j == pos else 1 for j in range(ndim)]

                T = t.reshape(axis_shape(0))
                q = [None, None, None]
                weight = wt.reshape(axis_shape(0))
                q[face] = sign * np.pi * T
                for j, (o, (s, ws)) in enumerate(zip(others, trans), start=1):
                    q[o] = np.pi * T * s.reshape(axis_shape(j))
                    weight = weight * ws.reshape(axis_shape(j))
                for j, o in enumerate(dead, start=1 + len(others)):
                    q[o] = xd.reshape(axis_shape(j))
                    weight = weight * hd
                den = sum(4.0 * c[i] * np.sin(q[i] / 2.0) ** 2 for i in live) + w2
                vals = g(q[0], q[1], q[2]) * weight / den**den_power
                _check_finite(vals, "pyramid rule")
                vals = np.broadcast_to(vals, np.broadcast_shapes(*(np.shape(x) for x in q), np.shape(weight)))
                total += float(vals.sum())
                n_evals += vals.size
    return total, n_evals


def _peaked_value(g, p, w, spec, den_power=1):
    if not w >= 0:
        raise ValueError(f"w must be >= 0, got {w}")
    deg = degenerate_mask(p)
    c = half_cosines(p)
    w2 = float(w) ** 2
    if w2 == 0.0 and deg.any():
        raise ValueError("edge value diverges: the minimum of u(p, .) is not isolated")
    if isinstance(g, CosineNumerator) and not deg.any() and g.power in (0, 1, 2):
        return _pyramid_kernel(g, c, w2, w, spec, den_power)
    return _pyramid_generic(g, c, deg, w2, w, spec, den_power)


def integrate_peaked(g: Integrand, p, w: float, spec: QuadratureSpec = DEFAULT_SPEC,
                     den_power: int = 1) -> IntegralValue:
    """Integral over the torus of g(q) / (u0(p, q) + w^2)^den_power.

    ``g`` is a callable g(q1, q2, q3) on broadcastable arrays; passing a
    :class:`CosineNumerator` selects the compiled kernel.  err_est is the
    difference to :meth:`QuadratureSpec.coarsened`.  Components of p equal to
    pi are integrated by the midpoint rule in that direction; w = 0 is then
    rejected since the integral diverges.
    """
    fine, n_fine = _peaked_value(g, p, w, spec, den_power)
    coarse, n_coarse = _peaked_value(g, p, w, spec.coarsened(), den_power)
    return IntegralValue(fine, abs(fine - coarse), n_fine + n_coarse)


def integrate_outside_ball(g: Integrand, delta: float, spec: QuadratureSpec = DEFAULT_SPEC,
                           den_power: int = 1) -> float:
    """Integral of g(q) / u(0, q)^den_power over the torus minus the ball |q| < delta.

    Each pyramid ray is integrated from |q| = delta outwards with Gauss nodes
    in log t, which absorbs the 1/|q|^k growth at the inner boundary.
    """
    if not 0 < delta < np.pi:
        raise ValueError("delta must lie in (0, pi)")
    s, ws = _gauss(spec.n_angular)
    x, wx = _gauss(2 * spec.n_radial)
    S = s[None, :, None]
    V = s[None, None, :]
    t_min = delta / (np.pi * np.sqrt(1.0 + S**2 + V**2))
    lo = np.log(t_min)
    X = x[:, None, None]
    T = np.exp(lo + (0.0 - lo) * (X + 1.0) / 2.0)
    weight = (wx[:, None, None] * (-lo) / 2.0) * T * np.pi**3 * T**2 * ws[None, :, None] * ws[None, None, :]
    total = 0.0
    for face in range(3):
        b, cax = [i for i in range(3) if i != face]
        for sign in (1.0, -1.0):
            q = [None, None, None]
            q[face] = sign * np.pi * T
            q[b] = np.pi * T * S
            q[cax] = np.pi * T * V
            den = sum(4.0 * np.sin(qi / 2.0) ** 2 for qi in q)
            vals = g(q[0], q[1], q[2]) * weight / den**den_power
            _check_finite(vals, "exterior pyramid rule")
            total += float(np.broadcast_to(vals, T.shape[:1] + (s.size, s.size)).sum())
    return total


def refine_until(job: Callable[[QuadratureSpec], float | IntegralValue], tol: float | None = None,
                 spec: QuadratureSpec = DEFAULT_SPEC) -> IntegralValue:
    """Re-run ``job`` on the refinement ladder until successive values agree.

    Stops when |I_{k+1} - I_k| <= tol * |I_{k+1}|; raises QuadratureError
    carrying the last two values after spec.max_refine refinements.
    """
    tol = spec.target_rel_tol if tol is None else tol
    if tol < 1e-14:
        raise ValueError("tol below the attainable floor 1e-14")

    def run(s):
        r = job(s)
        return (r.value, r.n_evals) if isinstance(r, IntegralValue) else (float(r), 0)

    current = spec
    prev, n_total = run(current)
    for level in range(1, spec.max_refine + 1):
        current = current.refined()
        value, n = run(current)
        n_total += n
        diff = abs(value - prev)
        if diff <= tol * abs(value):
            return IntegralValue(value, diff, n_total, levels=level + 1)
        prev_prev, prev = prev, value
    raise QuadratureError(
        f"no convergence to rel. tol {tol:g} after {spec.max_refine} refinements "
        f"(last values {prev_prev!r}, {prev!r})",
        last_values=(prev_prev, prev),
    )

"""Bound states of h_mu(p) below the essential spectrum.

Delta(p, .) is strictly decreasing on (-inf, m(p)] with limit 1 at -inf, so
a bound state exists exactly when the edge value Delta(p, m(p)) is negative,
and it is then the unique zero.  The root is bracketed and polished in the
variable w = sqrt(m(p) - z), in which Delta is smooth up to the edge.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import TheoremViolation
from .fredholm import ModelParams, delta_value, mu0
from .lattice_dispersion import as_points, band_edges, degenerate_mask, lower_edge
from .torus_quadrature import DEFAULT_SPEC, QuadratureSpec, midpoint_nodes

TOL_EDGE = 1e-7
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class BoundState:
    e: float
    bracket: tuple[float, float]
    residual: float
    gap: float
    iterations: int


@dataclass(frozen=True)
class BandRow:
    p: tuple[float, float, float]
    m: float
    M: float
    exists: Optional[bool]
    e: float = math.nan
    gap: float = math.nan
    residual: float = math.nan
    error: str = ""


def _edge_weight(p, params: ModelParams, n: int = 16) -> float:
    """Mean of phi^2 over the set where u(p, .) attains m(p) (degenerate p only).

    A positive value makes Lambda(p, z) diverge as z -> m(p), because the
    minimum set is a line, a plane or the whole torus.
    """
    p = as_points(p)
    mask = degenerate_mask(p)
    x = midpoint_nodes(n)
    q = [np.full(1, p[i] / 2.0) if not mask[i] else x for i in range(3)]
    grids = np.meshgrid(*q, indexing="ij")
    return float(np.mean(params.ff(*grids) ** 2))


def edge_delta(p, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Delta(p, m(p)) = 1 - mu D(p, 0); -inf at degenerate p with non-vanishing weight."""
    if degenerate_mask(p).any():
        return -math.inf if _edge_weight(p, params) > 0 else math.nan
    return delta_value(p, float(lower_edge(p)), params, quad)


def has_bound_state(p, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC,
                    tol_edge: float = TOL_EDGE) -> Optional[bool]:
    """True/False by the sign of the edge value; None when |Delta(p, m(p))| <= tol_edge."""
    d = edge_delta(p, params, quad)
    if math.isnan(d) or abs(d) <= tol_edge:
        return None
    return d < 0


def eigenvalue(p, params: ModelParams, quad: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-10,
               tol_edge: float = TOL_EDGE) -> Optional[BoundState]:
    """The unique eigenvalue e_mu(p) < m(p), or None when there is none (or it is undecided)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not has_bound_state(p, params, quad, tol_edge):
        return None
    m = float(lower_edge(p))

    def f(w):
        return delta_value(p, m - w * w, params, quad)

    if degenerate_mask(p).any():
        w_lo = 0.5
        for _ in range(MAX_DOUBLINGS):
            if f(w_lo) < 0:
                break
            w_lo /= 2.0
        else:
            raise RuntimeError("no negative determinant value found below the degenerate edge")
    else:
        w_lo = 0.0
    w_hi = 1.0
    for _ in range(MAX_DOUBLINGS):
        if f(w_hi) > 0:
            break
        w_lo, w_hi = w_hi, 2.0 * w_hi
    else:
        raise RuntimeError(f"bracket expansion failed after {MAX_DOUBLINGS} doublings")

    # |dz| = 2 w |dw|, so this keeps the energy error below tol
    xtol = 0.5 * tol / max(1.0, 2.0 * w_hi)
    w_root, info = brentq(f, w_lo, w_hi, xtol=xtol, maxiter=200, full_output=True)
    e = m - w_root * w_root
    return BoundState(
        e=e,
        bracket=(m - w_hi * w_hi, m - w_lo * w_lo),
        residual=abs(f(w_root)),
        gap=m - e,
        iterations=info.iterations,
    )


def _scan_row(p, params, quad, tol):
    p = as_points(p)
    edges = band_edges(p)
    key = tuple(p.tolist())
    try:
        state = eigenvalue(p, params, quad, tol)
        exists = has_bound_state(p, params, quad)
    except Exception as exc:  # recorded per row; the scan goes on
        return BandRow(key, edges.m, edges.M, None, error=f"{type(exc).__name__}: {exc}")
    if state is None:
        return BandRow(key, edges.m, edges.M, exists)
    return BandRow(key, edges.m, edges.M, True, state.e, state.gap, state.residual)


def band_scan(params: ModelParams, path: Sequence, quad: QuadratureSpec = DEFAULT_SPEC,
              tol: float = 1e-10, threads: int = 1) -> list[BandRow]:
    """Edges and bound state for each point of ``path``, in input order."""
    if len(path) == 0:
        raise ValueError("path must not be empty")
    if threads == 1:
        return [_scan_row(p, params, quad, tol) for p in path]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(lambda p: _scan_row(p, params, quad, tol), path))


def monotonicity_check(p, mu_list: Sequence[float], params: ModelParams,
                       quad: QuadratureSpec = DEFAULT_SPEC, tol: float = 1e-10) -> bool:
    """True iff e_mu(p) strictly decreases along the increasing couplings ``mu_list``.

    ``params`` supplies the form factor (its mu is ignored).  Couplings must
    be >= mu0; a missing bound state at p != 0 raises TheoremViolation.
    """
    mus = [float(x) for x in mu_list]
    if any(b <= a for a, b in zip(mus, mus[1:])):
        raise ValueError("mu_list must be increasing")
    m0 = mu0(params.ff, quad)
    nonzero = bool(np.any(as_points(p) != 0))
    energies = []
    for mu in mus:
        state = eigenvalue(p, params.with_mu(mu), quad, tol)
        if state is None:
            if nonzero and mu >= m0 * (1 - 1e-12):
                raise TheoremViolation(f"no bound state at p={as_points(p).tolist()} for mu={mu!r} >= mu0")
            energies.append(math.nan)
            continue
        energies.append(state.e)
    e = np.array(energies)
    if np.isnan(e).any():
        return False
    return bool(np.all(np.diff(e) < 2 * tol))

"""Brute-force finite-grid model of h_mu(p) used to cross-check the determinant pipeline.

On the midpoint grid q_j with weight h^3 the operator becomes the symmetric
matrix H = diag(u(p, q_j)) - mu h^3 phi(q_j) phi(q_k).  Its eigenvalues below
min_j u(p, q_j) are the zeros of the discrete determinant
1 - mu h^3 sum_j phi(q_j)^2 / (u(p, q_j) - z).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq
from threadpoolctl import threadpool_limits

from .fredholm import ModelParams
from .lattice_dispersion import TWO_PI, as_points, u
from .torus_quadrature import midpoint_nodes


@dataclass(frozen=True, eq=False)
class GridModel:
    n: int
    mu: float
    nodes: np.ndarray   # (n^3, 3)
    weight: float       # h^3
    diag: np.ndarray    # u(p, q_j)
    rank1: np.ndarray   # phi(q_j)

    def matrix(self) -> np.ndarray:
        v = self.rank1
        H = -self.mu * self.weight * np.outer(v, v)
        H[np.diag_indices_from(H)] += self.diag
        return H

    def determinant(self, z: float) -> float:
        return 1.0 - self.mu * self.weight * float(np.sum(self.rank1**2 / (self.diag - z)))


def build(p, params: ModelParams, n: int) -> GridModel:
    if n % 2 or not 4 <= n <= 16:
        raise ValueError(f"grid size must be even with 4 <= n <= 16, got {n}")
    p = as_points(p)
    x = midpoint_nodes(n)
    nodes = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    return GridModel(
        n=n,
        mu=params.mu,
        nodes=nodes,
        weight=(TWO_PI / n) ** 3,
        diag=u(p, nodes),
        rank1=params.ff.evaluate(nodes),
    )


def lowest_eigenvalue_dense(model: GridModel) -> float:
    if model.diag.size > 4096:
        raise ValueError("dense oracle is limited to 4096 nodes")
    # pinned BLAS threads keep the result bit-reproducible
    with threadpool_limits(limits=1):
        w = eigh(model.matrix(), eigvals_only=True, subset_by_index=[0, 0], driver="evr")
    return float(w[0])


def secular_root(model: GridModel, xtol: float = 1e-14) -> Optional[float]:
    """Root of the discrete determinant below min_j u(p, q_j), or None."""
    d = model.diag
    dmin = float(d.min())
    at_min = np.abs(d - dmin) <= 1e-14 * max(1.0, abs(dmin))
    if not np.any(model.rank1[at_min] != 0):
        # finite limit at the bottom of the diagonal range
        rest = ~at_min
        limit = 1.0 - model.mu * model.weight * float(np.sum(model.rank1[rest] ** 2 / (d[rest] - dmin)))
        if limit >= 0:
            return None
    step = 1.0
    while model.determinant(dmin - step) >= 0:
        step /= 2.0
        if step < 1e-300:
            return None
    hi = dmin - step
    lo = hi - 1.0
    while model.determinant(lo) <= 0:
        lo = hi - 2.0 * (hi - lo)
    return float(brentq(model.determinant, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500))

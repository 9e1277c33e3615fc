"""Closed-form dispersion relations on the 3-torus (-pi, pi]^3.

All functions accept a :class:`TorusPoint` or any array-like whose last axis
has length 3, and broadcast over leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateMomentumError

TWO_PI = 2.0 * np.pi

# |p_i| within this distance of pi is treated as a degenerate direction
DEGENERATE_ATOL = 1e-12


def wrap(x):
    """Map reals into the cell (-pi, pi], elementwise."""
    x = np.asarray(x, dtype=float)
    return x - TWO_PI * np.ceil((x - np.pi) / TWO_PI)


@dataclass(frozen=True)
class TorusPoint:
    """A point of the torus, normalized into (-pi, pi]^3 on construction."""

    x1: float
    x2: float
    x3: float

    def __post_init__(self):
        w = wrap([self.x1, self.x2, self.x3])
        object.__setattr__(self, "x1", float(w[0]))
        object.__setattr__(self, "x2", float(w[1]))
        object.__setattr__(self, "x3", float(w[2]))

    @classmethod
    def of(cls, p) -> "TorusPoint":
        if isinstance(p, TorusPoint):
            return p
        a = np.asarray(p, dtype=float).reshape(3)
        return cls(a[0], a[1], a[2])

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x1, self.x2, self.x3], dtype=dtype)

    def __add__(self, other):
        return TorusPoint.of(np.asarray(self) + np.asarray(TorusPoint.of(other)))

    def __sub__(self, other):
        return TorusPoint.of(np.asarray(self) - np.asarray(TorusPoint.of(other)))

    def __neg__(self):
        return TorusPoint(-self.x1, -self.x2, -self.x3)

    def scaled(self, s: float) -> "TorusPoint":
        return TorusPoint.of(s * np.asarray(self))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self)))

    def degenerate_axes(self) -> tuple[bool, bool, bool]:
        return tuple(bool(d) for d in degenerate_mask(self))


def as_points(p) -> np.ndarray:
    """Float array of shape (..., 3) normalized into the fundamental cell."""
    if isinstance(p, TorusPoint):
        return np.asarray(p)
    a = np.asarray(p, dtype=float)
    if a.shape[-1:] != (3,):
        raise ValueError(f"expected last axis of length 3, got shape {a.shape}")
    return wrap(a)


def degenerate_mask(p) -> np.ndarray:
    return np.pi - np.abs(as_points(p)) <= DEGENERATE_ATOL


def half_cosines(p) -> np.ndarray:
    """cos(p_i / 2) for p in the fundamental cell; always >= 0."""
    c = np.cos(as_points(p) / 2.0)
    return np.where(degenerate_mask(p), 0.0, c)


def epsilon(p):
    """One-particle dispersion 3 - sum(cos p_i), range [0, 6]."""
    p = as_points(p)
    return 3.0 - np.cos(p).sum(axis=-1)


def u(p, q):
    """Two-particle dispersion eps(p) + eps(p - q) + eps(q)."""
    p = as_points(p)
    q = as_points(q)
    return epsilon(p) + epsilon(p - q) + epsilon(q)


class BandEdges(NamedTuple):
    m: float
    M: float


def lower_edge(p):
    """m(p) = min_q u(p, q), vectorized."""
    p = as_points(p)
    return epsilon(p) + (2.0 - 2.0 * half_cosines(p)).sum(axis=-1)


def upper_edge(p):
    p = as_points(p)
    return epsilon(p) + (2.0 + 2.0 * half_cosines(p)).sum(axis=-1)


def band_edges(p) -> BandEdges:
    """Edges [m(p), M(p)] of the essential spectrum at quasi-momentum p."""
    return BandEdges(float(lower_edge(p)), float(upper_edge(p)))


def min_point(p) -> TorusPoint:
    """The unique minimizer p/2 of u(p, .).

    Raises DegenerateMomentumError when some |p_i| = pi, where the minimum is
    attained along a whole line of the torus in that coordinate.
    """
    mask = degenerate_mask(p)
    if mask.any():
        raise DegenerateMomentumError(
            f"minimum of u(p, .) is not isolated: degenerate axes {np.flatnonzero(mask).tolist()}"
        )
    return TorusPoint.of(as_points(p) / 2.0)


def u0(p, q):
    """Dispersion re-centred at its minimum: u(p, q + p/2) - m(p).

    Uses the exact reduction 2 sum cos(p_i/2) (1 - cos q_i), written with
    sin^2 to keep relative accuracy near q = 0.
    """
    c = half_cosines(p)
    q = as_points(q)
    return (4.0 * c * np.sin(q / 2.0) ** 2).sum(axis=-1)

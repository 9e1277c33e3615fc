"""Even form factors phi(q) = a0 + a1 cos q1 + a2 cos q2 + a3 cos q3."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .lattice_dispersion import TWO_PI, as_points

TORUS_VOLUME = TWO_PI**3


class Kind(str, Enum):
    constant = "constant"
    epsilon_type = "epsilon_type"
    cosine_poly = "cosine_poly"


@dataclass(frozen=True)
class FormFactor:
    kind: Kind
    coefficients: tuple[float, ...]
    value_at_zero: float = field(init=False, compare=False)
    l2_norm_sq: float = field(init=False, compare=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        coeffs = tuple(float(c) for c in self.coefficients)
        expected = 1 if kind is Kind.constant else (0 if kind is Kind.epsilon_type else 4)
        if len(coeffs) != expected:
            raise ValueError(f"{kind.value} form factor takes {expected} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)
        a = self.cosine_coefficients
        object.__setattr__(self, "value_at_zero", float(sum(a)))
        norm = TORUS_VOLUME * (a[0] ** 2 + 0.5 * (a[1] ** 2 + a[2] ** 2 + a[3] ** 2))
        if not norm > 0:
            raise ValueError("form factor must not vanish identically")
        object.__setattr__(self, "l2_norm_sq", norm)

    @classmethod
    def constant(cls, c: float = 1.0) -> "FormFactor":
        return cls(Kind.constant, (c,))

    @classmethod
    def epsilon_type(cls) -> "FormFactor":
        """phi = eps, which vanishes at the origin."""
        return cls(Kind.epsilon_type, ())

    @classmethod
    def cosine_poly(cls, a0: float, a1: float, a2: float, a3: float) -> "FormFactor":
        return cls(Kind.cosine_poly, (a0, a1, a2, a3))

    @property
    def cosine_coefficients(self) -> tuple[float, float, float, float]:
        if self.kind is Kind.constant:
            return (self.coefficients[0], 0.0, 0.0, 0.0)
        if self.kind is Kind.epsilon_type:
            return (3.0, -1.0, -1.0, -1.0)
        return tuple(self.coefficients)

    def evaluate(self, q):
        """phi at points q (TorusPoint or array of shape (..., 3))."""
        q = as_points(q)
        return self(q[..., 0], q[..., 1], q[..., 2])

    def __call__(self, q1, q2, q3):
        a0, a1, a2, a3 = self.cosine_coefficients
        return a0 + a1 * np.cos(q1) + a2 * np.cos(q2) + a3 * np.cos(q3)

    def to_config(self) -> dict:
        return {"kind": self.kind.value, "coefficients": list(self.coefficients)}


def l2_norm_sq(ff: FormFactor) -> float:
    return ff.l2_norm_sq


def evaluate(ff: FormFactor, q):
    return ff.evaluate(q)


def check_evenness(phi: FormFactor | Callable, n_samples: int = 100, seed: int = 0) -> bool:
    """True iff |phi(q) - phi(-q)| <= 1e-13 at n_samples random torus points.

    ``phi`` may be a FormFactor or any callable ``phi(q1, q2, q3)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    q = np.random.default_rng(seed).uniform(-np.pi, np.pi, size=(n_samples, 3))
    plus = phi(q[:, 0], q[:, 1], q[:, 2])
    minus = phi(-q[:, 0], -q[:, 1], -q[:, 2])
    return bool(np.all(np.abs(plus - minus) <= 1e-13))

"""Brownian and wrapped circle transition densities, and their determinants.

The circle kernels come in two flavors per winding parity: a plain winding
sum of Gaussians and a theta-function form with modular parameter
i t / (2 pi r^2).  The theta form (with its internal regime switching) is
used when the modular parameter is small, the winding sum otherwise; both
converge everywhere and the tests pin them against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import special as sp
from .errors import DimensionMismatch, NegativeTime, QuadratureFailure

__all__ = [
    "CircleGeom",
    "Parity",
    "AlcoveConfig",
    "p_bm",
    "p_wrapped",
    "p_wrapped_winding",
    "p_minus_pinned",
    "km_det",
    "q_r_N",
    "chapman_kolmogorov_check",
    "parity_of",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CircleGeom:
    """Circle of radius r; positions live on the circumference [0, 2 pi r)."""

    r: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("circle radius must be positive")

    @property
    def circumference(self) -> float:
        return TWO_PI * self.r


def parity_of(n: int) -> int:
    """(-1)^n: +1 selects the plain wrapped kernel, -1 the alternating one."""
    return 1 if n % 2 == 0 else -1


@dataclass(frozen=True)
class Parity:
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("parity sign must be +1 or -1")

    @classmethod
    def from_particles(cls, n: int) -> "Parity":
        return cls(parity_of(n))


@dataclass(frozen=True)
class AlcoveConfig:
    """Ordered configuration on the circle: x_1 < ... < x_N < x_1 + 2 pi r."""

    points: tuple
    geom: CircleGeom = CircleGeom()

    def __post_init__(self):
        pts = tuple(float(x) for x in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 1:
            raise ValueError("need at least one point")
        circ = self.geom.circumference
        if not all(0.0 <= x < circ for x in pts):
            raise ValueError("points must lie in [0, 2 pi r)")
        diffs = np.diff(pts)
        if len(pts) > 1 and not np.all(diffs > 0):
            raise ValueError("points must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def kappa(self) -> float:
        n = self.n
        return 0.5 * math.pi * self.geom.r * (2 * n - 3 + parity_of(n))

    @property
    def xbar(self) -> float:
        return float(sum(self.points) - self.kappa)

    def in_restricted_alcove(self, margin: float = 0.0) -> bool:
        return margin < self.xbar < self.geom.circumference - margin

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


def _check_time(t: float) -> float:
    t = float(t)
    if t < 0:
        raise NegativeTime(f"time must be nonnegative, got {t}")
    if t == 0:
        raise NegativeTime("transition density at t = 0 is a delta; not evaluated")
    return t


def p_bm(t: float, y, x) -> np.ndarray | float:
    """Standard Brownian transition density on the line."""
    t = _check_time(t)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.exp(-((y - x) ** 2) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    return float(out) if out.ndim == 0 else out


def p_wrapped_winding(parity: int, t: float, y, x, geom: CircleGeom, abs_tol: float = 1e-15):
    """Winding-sum form, truncated where the Gaussian tail drops below abs_tol."""
    t = _check_time(t)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    circ = geom.circumference
    # |y - x + 2 pi r w| >= (|w| - 1) * circ on the fundamental strip
    wmax = max(2, int(math.ceil(math.sqrt(2.0 * t * math.log(1.0 / abs_tol)) / circ)) + 2)
    total = np.zeros(np.broadcast(y, x).shape, dtype=float)
    for w in range(-wmax, wmax + 1):
        g = np.exp(-((y - x + circ * w) ** 2) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
        total = total + (float(parity) ** abs(w)) * g
    return float(total) if total.ndim == 0 else total


def p_wrapped(parity: int, t: float, y, x, geom: CircleGeom, policy=None):
    """Wrapped circle kernel: theta-3 form for parity +1, theta-2 for -1."""
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    t = _check_time(t)
    r = geom.r
    tau = 1j * t / (TWO_PI * r * r)
    if t / (TWO_PI * r * r) < 1.0:
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        v = (y - x) / (TWO_PI * r)
        kind = 3 if parity == 1 else 2
        val = sp.theta(kind, v, tau, policy) / (TWO_PI * r)
        out = np.real(val)
        return float(out) if np.ndim(out) == 0 else out
    return p_wrapped_winding(parity, t, y, x, geom)


def p_minus_pinned(t: float, x, geom: CircleGeom, policy=None):
    """Alternating kernel pinned at y = pi r: (1/2 pi r) theta1(x/2 pi r; it/2 pi r^2)."""
    t = _check_time(t)
    r = geom.r
    tau = 1j * t / (TWO_PI * r * r)
    v = np.asarray(x, dtype=float) / (TWO_PI * r)
    out = np.real(sp.theta(1, v, tau, policy)) / (TWO_PI * r)
    return float(out) if np.ndim(out) == 0 else out


def _pair_matrix(fn, y, x) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise DimensionMismatch(f"configurations must be equal-length vectors: {y.shape} vs {x.shape}")
    return fn(y[:, None], x[None, :])


def km_det(t: float, y, x) -> float:
    """Karlin-McGregor determinant det[p_bm(t, y_j | x_k)]."""
    y = y.as_array() if isinstance(y, AlcoveConfig) else y
    x = x.as_array() if isinstance(x, AlcoveConfig) else x
    mat = _pair_matrix(lambda a, b: p_bm(t, a, b), y, x)
    return float(np.linalg.det(mat))


def q_r_N(t: float, y, x, geom: CircleGeom, policy=None) -> float:
    """Alcove determinant det[p_wrapped(parity(N), t, y_j | x_k)]."""
    y = y.as_array() if isinstance(y, AlcoveConfig) else np.asarray(y, dtype=float)
    x = x.as_array() if isinstance(x, AlcoveConfig) else np.asarray(x, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise DimensionMismatch(f"configurations must be equal-length vectors: {y.shape} vs {x.shape}")
    par = parity_of(len(y))
    mat = p_wrapped(par, t, y[:, None], x[None, :], geom, policy)
    return float(np.linalg.det(mat))


def chapman_kolmogorov_check(
    parity: int, s: float, t: float, x: float, z: float, geom: CircleGeom, n_nodes: int = 2048
) -> float:
    """| int p(t-s, z|y) p(s, y|x) dy  -  p(t, z|x) | by periodic trapezoid."""
    if n_nodes < 16:
        raise QuadratureFailure("need at least 16 quadrature nodes")
    if s == t:
        return 0.0
    if not 0 < s < t:
        raise NegativeTime("need 0 < s < t")
    circ = geom.circumference
    y = np.linspace(0.0, circ, n_nodes, endpoint=False)
    integrand = p_wrapped(parity, t - s, z, y, geom) * p_wrapped(parity, s, y, x, geom)
    integral = integrand.sum() * (circ / n_nodes)
    return abs(integral - p_wrapped(parity, t, z, x, geom))

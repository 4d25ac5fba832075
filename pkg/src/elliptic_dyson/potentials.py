"""Time-dependent elliptic potentials and the h-weight.

Everything here hangs on U_N(t, x) = -log theta1(x / 2 pi r; N tau(t)) with
tau(t) = i (t_star - t) / (2 pi r^2).  Spatial derivatives come from the
theta-1 log-derivative; the temporal derivative uses the heat equation, which
also yields the closed PDE  dU/dt = (N/2) (U'^2 - U'').

The interaction V_N and the single-particle V_1 each carry two evaluation
routes (theta log-derivatives vs Weierstrass functions) so tests can pin one
against the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import special as sp
from .errors import DomainBoundary, ImaginaryResidue
from .kernels import AlcoveConfig, CircleGeom, parity_of, q_r_N

__all__ = [
    "EllipticClock",
    "ParticleCount",
    "equidistant_config",
    "U_N",
    "U_N_dx",
    "U_N_dxx",
    "U_N_dt",
    "W_N",
    "V_1_D",
    "V_N_beta",
    "ground_energy",
    "c_factor",
    "h_N_r_product",
    "h_N_r_det",
    "forrester_sides",
    "forrester_identity_residual",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EllipticClock:
    """Geometry r, terminal time t_star, and current time t in [0, t_star)."""

    r: float
    t_star: float
    t: float = 0.0

    def __post_init__(self):
        if not (self.r > 0 and self.t_star > 0):
            raise ValueError("r and t_star must be positive")
        if not 0.0 <= self.t < self.t_star:
            raise ValueError("t must lie in [0, t_star)")

    def at(self, t: float) -> "EllipticClock":
        return EllipticClock(self.r, self.t_star, t)

    @property
    def circumference(self) -> float:
        return TWO_PI * self.r

    @property
    def geom(self) -> CircleGeom:
        return CircleGeom(self.r)

    def tau(self, n: int = 1) -> complex:
        return 1j * n * (self.t_star - self.t) / (TWO_PI * self.r**2)

    def im_tau(self, n: int = 1) -> float:
        return n * (self.t_star - self.t) / (TWO_PI * self.r**2)

    def omega3(self, n: int = 1) -> complex:
        # half-period: 2 n omega3(t) = i n (t_star - t) / r
        return 0.5j * n * (self.t_star - self.t) / self.r

    def half_periods(self, n: int = 1) -> sp.HalfPeriods:
        return sp.HalfPeriods(math.pi * self.r, self.omega3(n))


@dataclass(frozen=True)
class ParticleCount:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one particle")

    @property
    def parity(self) -> int:
        return parity_of(self.n)

    def kappa(self, r: float) -> float:
        return 0.5 * math.pi * r * (2 * self.n - 3 + self.parity)


def kappa_n(n: int, r: float) -> float:
    return ParticleCount(n).kappa(r)


def equidistant_config(n: int, r: float) -> np.ndarray:
    """v_j = (pi r / 2N)(4j - 3 + parity(N)); center of mass shift is pi r."""
    j = np.arange(1, n + 1, dtype=float)
    return math.pi * r / (2 * n) * (4 * j - 3 + parity_of(n))


def _ensure_real(z, where: str):
    z = np.asarray(z)
    im, re = np.abs(np.imag(z)), np.abs(np.real(z))
    if np.any(im > 1e-10 * re + 1e-13):
        raise ImaginaryResidue(f"{where}: imaginary residue {np.max(im):.3e}")
    out = np.real(z)
    return float(out) if out.ndim == 0 else out


def _check_interior(clock: EllipticClock, x, what: str = "x"):
    circ = clock.circumference
    eps = 1e-9 * circ
    arr = np.asarray(x, dtype=float)
    if np.any(arr < eps) or np.any(arr > circ - eps):
        raise DomainBoundary(f"{what} must be strictly inside (0, {circ:.6g})")
    return arr


def U_N(clock: EllipticClock, n: int, x):
    """-log theta1(x / 2 pi r; N tau(t)), real on the open circumference."""
    arr = _check_interior(clock, x)
    out = -sp.log_theta1(arr / clock.circumference, clock.im_tau(n))
    return float(out) if np.ndim(out) == 0 else out


def U_N_dx(clock: EllipticClock, n: int, x, check: bool = True):
    arr = _check_interior(clock, x) if check else np.asarray(x, dtype=float)
    circ = clock.circumference
    val = -sp.theta1_dlog(arr / circ, clock.tau(n)) / circ
    return _ensure_real(val, "U_N_dx")


def U_N_dxx(clock: EllipticClock, n: int, x, check: bool = True):
    arr = _check_interior(clock, x) if check else np.asarray(x, dtype=float)
    circ = clock.circumference
    val = -sp.theta1_dlog_deriv(arr / circ, clock.tau(n)) / circ**2
    return _ensure_real(val, "U_N_dxx")


def U_N_dt(clock: EllipticClock, n: int, x, check: bool = True):
    # heat equation: dU/dt = (N / 8 pi^2 r^2) theta1''/theta1
    arr = _check_interior(clock, x) if check else np.asarray(x, dtype=float)
    circ = clock.circumference
    v = arr / circ
    tau = clock.tau(n)
    l1 = sp.theta1_dlog(v, tau)
    l2 = sp.theta1_dlog_deriv(v, tau) + l1 * l1  # theta1''/theta1
    val = n / (8.0 * math.pi**2 * clock.r**2) * l2
    return _ensure_real(val, "U_N_dt")


def W_N(clock: EllipticClock, config: AlcoveConfig) -> float:
    """Sum of pair potentials plus the center-of-mass term."""
    x = config.as_array()
    n = config.n
    circ = clock.circumference
    eps = 1e-9 * circ
    total = 0.0
    for j in range(n):
        for k in range(j + 1, n):
            gap = x[k] - x[j]
            if gap < eps or gap > circ - eps:
                raise DomainBoundary(f"pair gap x_{k+1} - x_{j+1} = {gap:.3e} leaves the alcove")
            total += U_N(clock, n, gap)
    xb = config.xbar
    if not eps < xb < circ - eps:
        raise DomainBoundary(f"shifted center of mass xbar = {xb:.3e} leaves (0, 2 pi r)")
    return float(total + U_N(clock, n, xb))


def V_1_D(clock: EllipticClock, d: float, x, route: str = "theta"):
    """Single-particle potential ((D-1)(D-3)/8) U_1'(t, x)^2."""
    if not d > 1:
        raise ValueError("need D > 1")
    coeff = (d - 1.0) * (d - 3.0) / 8.0
    if coeff == 0.0:
        arr = _check_interior(clock, x)
        return np.zeros_like(arr) if np.ndim(x) else 0.0
    if route == "theta":
        up = U_N_dx(clock, 1, x)
        return coeff * up**2
    if route == "weierstrass":
        arr = _check_interior(clock, x)
        hp = clock.half_periods(1)
        e1 = sp.eta1(hp.omega1, hp.omega3)
        zeta = sp.weierstrass_zeta(arr.astype(complex), hp)
        val = coeff * (zeta - arr * e1 / (math.pi * clock.r)) ** 2
        return _ensure_real(val, "V_1_D")
    raise ValueError(f"unknown route {route!r}")


def V_N_beta(clock: EllipticClock, n: int, beta: float, config: AlcoveConfig, route: str = "theta"):
    """N-particle interaction; vanishes identically at beta = 2."""
    if not beta > 0:
        raise ValueError("need beta > 0")
    if n < 2:
        raise ValueError("need N >= 2")
    coeff = beta * (beta - 2.0) / 8.0 * n
    x = config.as_array()
    iu, il = np.triu_indices(n, k=1)
    gaps = x[il] - x[iu]  # x_k - x_j for j < k
    xb = config.xbar
    if route == "theta":
        up = U_N_dx(clock, n, gaps)
        upp = U_N_dxx(clock, n, gaps)
        ub = U_N_dx(clock, n, np.array([xb]))[0]
        return float(coeff * (np.sum(up**2) + ub**2 - (n - 2.0) / n * np.sum(upp)))
    if route == "weierstrass":
        hp = clock.half_periods(n)
        e1 = sp.eta1(hp.omega1, hp.omega3)
        pr = math.pi * clock.r
        zg = sp.weierstrass_zeta(gaps.astype(complex), hp)
        pg = sp.weierstrass_p(gaps.astype(complex), hp)
        zb = sp.weierstrass_zeta(complex(xb), hp)
        s1 = np.sum((zg - gaps * e1 / pr) ** 2)
        s2 = (zb - xb * e1 / pr) ** 2
        s3 = np.sum(pg + e1 / pr)
        return float(_ensure_real(coeff * (s1 + s2 - (n - 2.0) / n * s3), "V_N_beta"))
    raise ValueError(f"unknown route {route!r}")


def ground_energy(clock: EllipticClock, n: int, beta: float) -> float:
    """-(beta^2/16) N(N-1)(N-2) eta1(2 pi r, 2 N omega3(t)) / (pi r)."""
    pref = -(beta**2) / 16.0 * n * (n - 1) * (n - 2)
    if pref == 0.0:
        return 0.0
    e1 = sp.eta1(math.pi * clock.r, clock.omega3(n))
    return float(pref * _ensure_real(e1, "ground_energy") / (math.pi * clock.r))


def _eta_real(tau: complex) -> float:
    return float(_ensure_real(sp.dedekind_eta(tau), "dedekind_eta"))


def c_factor(clock: EllipticClock, n: int, beta: float) -> float:
    """(eta(N tau(t)) / eta(N tau(0)))^(-beta^2 (N-1)(N-2)/8), the accumulated
    ground-energy integral."""
    expo = -(beta**2) * (n - 1) * (n - 2) / 8.0
    if expo == 0.0:
        return 1.0
    ratio = _eta_real(clock.tau(n)) / _eta_real(clock.at(0.0).tau(n))
    if not ratio > 0:
        raise ImaginaryResidue("eta ratio must be positive")
    return float(ratio**expo)


def _theta1_real(v, n_tau: complex):
    return _ensure_real(sp.theta(1, v, n_tau), "theta1")


def h_N_r_product(clock: EllipticClock, n: int, beta: float, x) -> float:
    """eta-prefactored product of theta-1 factors over gaps and the shifted
    center of mass.  Zeros at alcove boundaries are allowed."""
    x = np.asarray(x, dtype=float)
    circ = clock.circumference
    tau_n = clock.tau(n)
    xb = float(np.sum(x) - kappa_n(n, clock.r))
    iu, il = np.triu_indices(len(x), k=1)
    gaps = x[il] - x[iu]
    pref = _eta_real(tau_n) ** (-beta * (n - 1) * (n - 2) / 4.0)
    vals = _theta1_real(np.concatenate([[xb], gaps]) / circ, tau_n)
    return float(pref * np.prod(vals))


def h_N_r_det(clock: EllipticClock, n: int, beta: float, x) -> float:
    """Same weight through the wrapped-kernel determinant pinned at the
    equidistant configuration."""
    x = np.asarray(x, dtype=float)
    if len(x) != n:
        raise ValueError("configuration length must equal N")
    v = equidistant_config(n, clock.r)
    pref = _eta_real(clock.tau(n)) ** (-(beta - 2.0) * (n - 1) * (n - 2) / 4.0)
    scale = (clock.circumference / math.sqrt(n)) ** n
    return float(pref * scale * q_r_N(clock.t_star - clock.t, v, x, clock.geom))


# The theta determinants below are severely cancellation-dominated for
# N >= 4 (condition number ~ 1e7 even at tame arguments), so both sides are
# evaluated in extended precision with a plain, unswitched series.

_PI_LD = np.longdouble("3.141592653589793238462643383279502884")


def _theta_ld(kind: int, v: np.ndarray, tau: complex, nmax: int = 80) -> np.ndarray:
    v = np.asarray(v, dtype=np.clongdouble)
    t = np.clongdouble(tau)
    ipt = 1j * _PI_LD * t
    ipv = 1j * _PI_LD * v
    total = np.ones_like(v) if kind in (0, 3) else np.zeros_like(v)
    for n in range(1, nmax + 1):
        if kind in (0, 3):
            term = np.exp(ipt * n * n + 2 * n * ipv) + np.exp(ipt * n * n - 2 * n * ipv)
            if kind == 0:
                term = (-1) ** n * term
        else:
            base = ipt * np.clongdouble(n - 0.5) ** 2
            up, dn = np.exp(base + (2 * n - 1) * ipv), np.exp(base - (2 * n - 1) * ipv)
            term = (-1) ** (n - 1) * (-1j) * (up - dn) if kind == 1 else up + dn
        total = total + term
    return total


def _eta_ld(tau: complex, nmax: int = 400) -> np.clongdouble:
    t = np.clongdouble(tau)
    q2 = np.exp(2j * _PI_LD * t)
    prod = np.clongdouble(1.0)
    q2n = np.clongdouble(1.0)
    for _ in range(nmax):
        q2n = q2n * q2
        prod = prod * (1.0 - q2n)
        if abs(complex(q2n)) < 1e-22:
            break
    return np.exp(1j * _PI_LD * t / 12.0) * prod


def _det_ld(a: np.ndarray) -> np.clongdouble:
    """LU with partial pivoting in clongdouble."""
    a = np.array(a, dtype=np.clongdouble)
    n = a.shape[0]
    det = np.clongdouble(1.0)
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det = det * a[col, col]
        if a[col, col] == 0:
            return np.clongdouble(0.0)
        a[col + 1 :, col:] -= np.outer(a[col + 1 :, col] / a[col, col], a[col, col:])
    return det


def forrester_sides(n: int, tau: complex, x, alpha: complex):
    """Both sides of the theta-determinant identity (odd N: theta-3 entries,
    even N: theta-1 entries with column shifts k/N)."""
    x = np.asarray(x, dtype=complex)
    if len(x) != n:
        raise ValueError("need N arguments")
    k = np.arange(1, n + 1, dtype=float)
    kind = 3 if n % 2 == 1 else 1
    mat = _theta_ld(kind, x[:, None] + alpha - k[None, :] / n, tau)
    lhs = _det_ld(np.atleast_2d(mat))
    iu, il = np.triu_indices(n, k=1)
    prod_gaps = np.prod(_theta_ld(1, x[il] - x[iu], n * tau)) if n > 1 else np.clongdouble(1.0)
    kind_rhs = 3 if n % 2 == 1 else 0
    rhs = (
        np.clongdouble(n) ** (n / 2.0)
        * _eta_ld(n * tau) ** (-(n - 1) * (n - 2) // 2)
        * _theta_ld(kind_rhs, np.asarray([np.sum(x + alpha)]), n * tau)[0]
        * prod_gaps
    )
    return complex(lhs), complex(rhs)


def forrester_identity_residual(n: int, tau: complex, x, alpha: complex) -> float:
    lhs, rhs = forrester_sides(n, tau, x, alpha)
    return abs(lhs - rhs)

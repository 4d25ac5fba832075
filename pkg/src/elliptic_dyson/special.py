"""Jacobi theta functions and friends.

Evaluation strategy: every theta value is computed from the q-series after
two stabilizing moves,

  1. argument reduction  v -> v0 = v - k - m*tau  with |Im v0| <= Im(tau)/2,
     pulling out the quasi-periodicity sign and exponential factor, and
  2. an optional Jacobi imaginary transformation onto -1/tau when Im(tau)
     falls below ``SeriesPolicy.im_tau_switch``, so the effective nome stays
     small.

Log-derivatives of theta-1 (the quantity every drift and potential in this
package is built from) get their own code path: a cotangent plus Lambert
series, which never forms the (possibly huge) theta values themselves.

Also here: Weierstrass zeta / p through the theta-1 route, the eta-1 lattice
constant, the Dedekind eta function, and Villat's annulus kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadModulus, NonConvergent, PoleAtLattice, PoleHit

__all__ = [
    "SeriesPolicy",
    "ModularParam",
    "HalfPeriods",
    "theta",
    "theta1_deriv",
    "jacobi_imaginary",
    "theta1_dlog",
    "theta1_dlog_deriv",
    "dedekind_eta",
    "eta1",
    "weierstrass_zeta",
    "weierstrass_p",
    "villat",
    "get_default_policy",
    "set_default_policy",
]

THETA_KINDS = (0, 1, 2, 3)

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation and regime-switch knobs for all series in this module."""

    abs_tol: float = 1e-15
    rel_tol: float = 1e-14
    max_terms: int = 10_000
    im_tau_switch: float = 1.0

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")


_default_policy = SeriesPolicy()


def get_default_policy() -> SeriesPolicy:
    return _default_policy


def set_default_policy(policy: SeriesPolicy) -> None:
    global _default_policy
    _default_policy = policy


def _policy(policy: SeriesPolicy | None) -> SeriesPolicy:
    return policy if policy is not None else _default_policy


@dataclass(frozen=True)
class ModularParam:
    """Modular parameter tau with Im(tau) > 0."""

    tau: complex

    def __post_init__(self):
        if not (np.imag(self.tau) > 0):
            raise BadModulus(f"Im(tau) must be positive, got tau={self.tau}")

    @property
    def nome(self) -> complex:
        return np.exp(1j * math.pi * self.tau)


@dataclass(frozen=True)
class HalfPeriods:
    """Half-periods (omega1, omega3) of a rectangular-ish lattice."""

    omega1: float
    omega3: complex

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError("omega1 must be a positive real")
        if not (np.imag(self.omega3 / self.omega1) > 0):
            raise BadModulus("omega3/omega1 must have positive imaginary part")

    @property
    def tau(self) -> complex:
        return complex(self.omega3) / self.omega1


def _tau_of(tau) -> complex:
    if isinstance(tau, ModularParam):
        return complex(tau.tau)
    t = complex(tau)
    if not (t.imag > 0):
        raise BadModulus(f"Im(tau) must be positive, got tau={t}")
    return t


def _check_kind(kind: int) -> int:
    if kind not in THETA_KINDS:
        raise ValueError(f"theta kind must be one of {THETA_KINDS}, got {kind}")
    return int(kind)


# ----------------------------------------------------------------------------
# argument reduction
#
# v = v0 + k + m*tau with integers k, m chosen so |Im v0| <= Im(tau)/2 and
# |Re v0| <= 1/2.  Then
#   theta_kind(v) = sign * exp(-i pi (2 m v0 + m^2 tau)) * theta_kind(v0)
# with kind-dependent signs (-1)^k and/or (-1)^m.

_SIGN_K = {0: 0, 1: 1, 2: 1, 3: 0}  # exponent of (-1)^k
_SIGN_M = {0: 1, 1: 1, 2: 0, 3: 0}  # exponent of (-1)^m


def _reduce(kind: int, v: np.ndarray, tau: complex):
    m = np.round(np.imag(v) / tau.imag).astype(np.int64)
    v1 = v - m * tau
    k = np.round(np.real(v1)).astype(np.int64)
    v0 = v1 - k
    expo = -1j * math.pi * (2.0 * m * v0 + (m.astype(float) ** 2) * tau)
    sign = np.ones_like(m, dtype=np.int64)
    if _SIGN_K[kind]:
        sign *= 1 - 2 * (k & 1)
    if _SIGN_M[kind]:
        sign *= 1 - 2 * (m & 1)
    return v0, m, sign, expo


# ----------------------------------------------------------------------------
# plain q-series on (already reduced) arguments


def _series_theta(
    kind: int, v: np.ndarray, tau: complex, pol: SeriesPolicy, shift=0.0
) -> np.ndarray:
    """theta_kind(v; tau) * exp(shift), summed as exponential atoms.

    Folding `shift` (a possibly giant negative exponent from quasi-period or
    Gaussian prefactors) into every atom keeps intermediates finite when the
    assembled value is moderate.
    """
    ipt = 1j * math.pi * tau
    ipv = 1j * math.pi * v
    if kind in (0, 3):
        total = np.exp(shift) * np.ones_like(v, dtype=complex)
    else:
        total = np.zeros_like(v, dtype=complex)
    streak = 0
    for n in range(1, pol.max_terms + 1):
        if kind in (0, 3):
            base = ipt * n * n + shift
            term = np.exp(base + 2 * n * ipv) + np.exp(base - 2 * n * ipv)
            if kind == 0:
                term = (-1) ** n * term
        else:
            base = ipt * (n - 0.5) ** 2 + shift
            up, dn = np.exp(base + (2 * n - 1) * ipv), np.exp(base - (2 * n - 1) * ipv)
            if kind == 1:
                term = (-1) ** (n - 1) * (-1j) * (up - dn)
            else:
                term = up + dn
        total = total + term
        bound = pol.abs_tol + pol.rel_tol * np.max(np.abs(total))
        streak = streak + 1 if np.max(np.abs(term)) < bound else 0
        if streak >= 3:
            return total
    raise NonConvergent(f"theta series (kind {kind}) did not converge: tau={tau}")


def _series_theta1_jet(v: np.ndarray, tau: complex, pol: SeriesPolicy, order: int, shift=0.0):
    """(theta1, theta1', ..., up to `order`) * exp(shift), term-wise."""
    ipt = 1j * math.pi * tau
    ipv = 1j * math.pi * v
    vals = [np.zeros_like(v, dtype=complex) for _ in range(order + 1)]
    streak = 0
    for n in range(1, pol.max_terms + 1):
        base = ipt * (n - 0.5) ** 2 + shift
        up, dn = np.exp(base + (2 * n - 1) * ipv), np.exp(base - (2 * n - 1) * ipv)
        sgn = (-1) ** (n - 1)
        c = (2 * n - 1) * math.pi
        terms = [sgn * (-1j) * (up - dn)]
        if order >= 1:
            terms.append(sgn * c * (up + dn))
        if order >= 2:
            terms.append(sgn * (-1j) * (-c * c) * (up - dn))
        big = 0.0
        for j, t in enumerate(terms):
            vals[j] = vals[j] + t
            big = max(big, np.max(np.abs(t)) / (1.0 + np.max(np.abs(vals[j]))))
        streak = streak + 1 if big < pol.abs_tol + pol.rel_tol else 0
        if streak >= 3:
            return vals
    raise NonConvergent(f"theta1 jet series did not converge: tau={tau}")


def _eval_theta(kind: int, v: np.ndarray, tau: complex, pol: SeriesPolicy, shift=0.0) -> np.ndarray:
    v0, _, sign, expo = _reduce(kind, v, tau)
    return sign * _series_theta(kind, v0, tau, pol, shift=expo + shift)


def _eval_theta1_jet(v: np.ndarray, tau: complex, pol: SeriesPolicy, order: int, shift=0.0):
    v0, m, sign, expo = _reduce(1, v, tau)
    base = _series_theta1_jet(v0, tau, pol, order, shift=expo + shift)
    a = -_TWO_PI_I * m
    out = [sign * base[0]]
    if order >= 1:
        out.append(sign * (a * base[0] + base[1]))
    if order >= 2:
        out.append(sign * (a * a * base[0] + 2.0 * a * base[1] + base[2]))
    return out


# ----------------------------------------------------------------------------
# regime switch

_TRANSFORM_KIND = {0: 2, 1: 1, 2: 0, 3: 3}


def _transform_root(kind: int, tau: complex) -> complex:
    root = np.exp(0.75j * math.pi) if kind == 1 else np.exp(0.25j * math.pi)
    return root / np.sqrt(tau)


def _use_transform(tau: complex, pol: SeriesPolicy) -> bool:
    if not math.isfinite(pol.im_tau_switch):
        return pol.im_tau_switch > 0
    if pol.im_tau_switch <= 0:
        return False
    if tau.imag >= pol.im_tau_switch:
        return False
    # only transform when -1/tau actually improves the nome
    return (-1.0 / tau).imag > tau.imag


def _asarray(v):
    arr = np.asarray(v, dtype=complex)
    return arr, np.isscalar(v) or arr.ndim == 0


def _maybe_scalar(arr, scalar: bool):
    return complex(np.asarray(arr)[()]) if scalar else arr


# ----------------------------------------------------------------------------
# public theta API


def theta(kind: int, v, tau, policy: SeriesPolicy | None = None):
    """Jacobi theta function of the given kind at (v; tau), q = exp(i pi tau)."""
    kind = _check_kind(kind)
    pol = _policy(policy)
    t = _tau_of(tau)
    arr, scalar = _asarray(v)
    if _use_transform(t, pol):
        out = jacobi_imaginary(kind, arr, t, pol)
    else:
        out = _eval_theta(kind, arr, t, pol)
    return _maybe_scalar(out, scalar)


def jacobi_imaginary(kind: int, v, tau, policy: SeriesPolicy | None = None):
    """Right-hand side of the imaginary transformation: the theta value
    assembled from the partner series at -1/tau.

    kinds map 0 <-> 2 and 1, 3 to themselves; the kind-2 case is the kind-0
    relation read in reverse.
    """
    kind = _check_kind(kind)
    pol = _policy(policy)
    t = _tau_of(tau)
    arr, scalar = _asarray(v)
    gauss = -1j * math.pi * arr * arr / t
    out = _transform_root(kind, t) * _eval_theta(
        _TRANSFORM_KIND[kind], arr / t, -1.0 / t, pol, shift=gauss
    )
    return _maybe_scalar(out, scalar)


def theta1_deriv(order: int, v, tau, policy: SeriesPolicy | None = None):
    """First or second v-derivative of theta-1."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    pol = _policy(policy)
    t = _tau_of(tau)
    arr, scalar = _asarray(v)
    if _use_transform(t, pol):
        gauss = -1j * math.pi * arr * arr / t
        jet = _eval_theta1_jet(arr / t, -1.0 / t, pol, order, shift=gauss)
        pref = _transform_root(1, t)
        b = -_TWO_PI_I * arr / t  # d/dv of the Gaussian exponent
        if order == 1:
            out = pref * (b * jet[0] + jet[1] / t)
        else:
            out = pref * (
                (b * b - _TWO_PI_I / t) * jet[0] + 2.0 * b * jet[1] / t + jet[2] / (t * t)
            )
    else:
        out = _eval_theta1_jet(arr, t, pol, order)[order]
    return _maybe_scalar(out, scalar)


# ----------------------------------------------------------------------------
# stable log-derivatives of theta-1


def _cot(z: np.ndarray) -> np.ndarray:
    s = np.where(np.imag(z) >= 0, 1.0, -1.0)
    w = np.exp(2j * s * z)  # |w| <= 1 by construction
    return -1j * s * (1.0 + w) / (1.0 - w)


def _inv_sin2(z: np.ndarray) -> np.ndarray:
    w = np.exp(2j * np.where(np.imag(z) >= 0, 1.0, -1.0) * z)
    return -4.0 * w / (w - 1.0) ** 2


def _lambert_dlog(v0: np.ndarray, tau: complex, pol: SeriesPolicy) -> np.ndarray:
    # theta1'/theta1 (v0) = pi cot(pi v0) + 4 pi sum q^{2n} sin(2 pi n v0)/(1-q^{2n});
    # the sine is kept in exponential-atom form so nothing overflows for
    # reduced v0 (|Im v0| <= Im tau / 2).
    up = np.exp(_TWO_PI_I * (tau + v0))
    dn = np.exp(_TWO_PI_I * (tau - v0))
    q2 = np.exp(_TWO_PI_I * tau)
    total = math.pi * _cot(math.pi * v0)
    upn = np.ones_like(v0, dtype=complex)
    dnn = np.ones_like(v0, dtype=complex)
    q2n = 1.0 + 0j
    streak = 0
    for _n in range(1, pol.max_terms + 1):
        upn, dnn, q2n = upn * up, dnn * dn, q2n * q2
        term = -2j * math.pi * (upn - dnn) / (1.0 - q2n)
        total = total + term
        bound = pol.abs_tol + pol.rel_tol * np.max(np.abs(total))
        streak = streak + 1 if np.max(np.abs(term)) < bound else 0
        if streak >= 3:
            return total
    raise NonConvergent(f"theta1 log-derivative series did not converge: tau={tau}")


def _lambert_dlog_deriv(v0: np.ndarray, tau: complex, pol: SeriesPolicy) -> np.ndarray:
    # d/dv of the above: -pi^2/sin^2(pi v0) + 8 pi^2 sum n q^{2n} cos(2 pi n v0)/(1-q^{2n})
    up = np.exp(_TWO_PI_I * (tau + v0))
    dn = np.exp(_TWO_PI_I * (tau - v0))
    q2 = np.exp(_TWO_PI_I * tau)
    total = -math.pi**2 * _inv_sin2(math.pi * v0)
    upn = np.ones_like(v0, dtype=complex)
    dnn = np.ones_like(v0, dtype=complex)
    q2n = 1.0 + 0j
    streak = 0
    for n in range(1, pol.max_terms + 1):
        upn, dnn, q2n = upn * up, dnn * dn, q2n * q2
        term = 4.0 * math.pi**2 * n * (upn + dnn) / (1.0 - q2n)
        total = total + term
        bound = pol.abs_tol + pol.rel_tol * np.max(np.abs(total))
        streak = streak + 1 if np.max(np.abs(term)) < bound else 0
        if streak >= 3:
            return total
    raise NonConvergent(f"theta1 log-derivative' series did not converge: tau={tau}")


def theta1_dlog(v, tau, policy: SeriesPolicy | None = None):
    """theta1'(v)/theta1(v), stable for any complex v and small Im(tau)."""
    pol = _policy(policy)
    t = _tau_of(tau)
    arr, scalar = _asarray(v)
    if _use_transform(t, pol):
        out = -_TWO_PI_I * arr / t + _dlog_reduced(arr / t, -1.0 / t, pol) / t
    else:
        out = _dlog_reduced(arr, t, pol)
    return _maybe_scalar(out, scalar)


def theta1_dlog_deriv(v, tau, policy: SeriesPolicy | None = None):
    """d/dv [theta1'/theta1] = theta1''/theta1 - (theta1'/theta1)^2."""
    pol = _policy(policy)
    t = _tau_of(tau)
    arr, scalar = _asarray(v)
    if _use_transform(t, pol):
        out = -_TWO_PI_I / t + _dlog_deriv_reduced(arr / t, -1.0 / t, pol) / (t * t)
    else:
        out = _dlog_deriv_reduced(arr, t, pol)
    return _maybe_scalar(out, scalar)


def _dlog_reduced(v: np.ndarray, tau: complex, pol: SeriesPolicy) -> np.ndarray:
    v0, m, _, _ = _reduce(1, v, tau)
    return _lambert_dlog(v0, tau, pol) - _TWO_PI_I * m


def _dlog_deriv_reduced(v: np.ndarray, tau: complex, pol: SeriesPolicy) -> np.ndarray:
    v0, _, _, _ = _reduce(1, v, tau)
    return _lambert_dlog_deriv(v0, tau, pol)


def log_theta1(v, im_tau: float, policy: SeriesPolicy | None = None):
    """log theta1(v; i*im_tau) for real v in (0, 1), stable for any im_tau > 0.

    Below the switch threshold the value is assembled from the wrapped-Gaussian
    (imaginary-transformed) representation in log space, so it never under- or
    overflows even when theta1 itself would.
    """
    pol = _policy(policy)
    if not im_tau > 0:
        raise BadModulus("im_tau must be positive")
    arr = np.asarray(v, dtype=float)
    scalar = np.ndim(v) == 0
    if np.any(arr <= 0) or np.any(arr >= 1):
        raise ValueError("log_theta1 needs v strictly inside (0, 1)")
    T = float(im_tau)
    if not _use_transform(1j * T, pol):
        val = np.real(_eval_theta(1, arr.astype(complex), 1j * T, pol))
        out = np.log(val)
        return float(out) if scalar else out
    # theta1(v; iT) = T^{-1/2} sum_n (-1)^{n-1} [g(v - n + 1/2) - g(v + n - 1/2)],
    # g(u) = exp(-pi u^2 / T); log-sum-exp with the max exponent extracted
    kmax = 2 + int(math.ceil(math.sqrt(T * 45.0 / math.pi)))
    centers, signs = [], []
    for n in range(1, kmax + 1):
        centers += [n - 0.5, -(n - 0.5)]
        signs += [(-1.0) ** (n - 1), -((-1.0) ** (n - 1))]
    centers = np.asarray(centers)
    signs = np.asarray(signs)
    expo = -math.pi * (arr[..., None] - centers) ** 2 / T
    top = np.max(expo, axis=-1)
    ssum = np.sum(signs * np.exp(expo - top[..., None]), axis=-1)
    out = -0.5 * math.log(T) + top + np.log(ssum)
    return float(out) if scalar else out


# ----------------------------------------------------------------------------
# Dedekind eta and the lattice constant eta1


def dedekind_eta(tau, policy: SeriesPolicy | None = None) -> complex:
    """eta(tau) = e^{i pi tau/12} prod_{n>=1} (1 - e^{2 pi i n tau})."""
    pol = _policy(policy)
    t = _tau_of(tau)
    q2 = np.exp(_TWO_PI_I * t)
    prod = 1.0 + 0j
    q2n = 1.0 + 0j
    streak = 0
    for _n in range(1, pol.max_terms + 1):
        q2n *= q2
        prod *= 1.0 - q2n
        streak = streak + 1 if abs(q2n) < pol.abs_tol + pol.rel_tol else 0
        if streak >= 3:
            return complex(np.exp(1j * math.pi * t / 12.0) * prod)
    raise NonConvergent(f"eta product did not converge: tau={t}")


def eta1(omega1: float, omega3: complex, policy: SeriesPolicy | None = None) -> complex:
    """eta1(2 omega1, 2 omega3) = zeta(omega1), via the Lambert-type sum."""
    pol = _policy(policy)
    hp = HalfPeriods(omega1, omega3)
    q2 = np.exp(_TWO_PI_I * hp.tau)
    total = 0.0 + 0j
    q2n = 1.0 + 0j
    streak = 0
    for n in range(1, pol.max_terms + 1):
        q2n *= q2
        term = n * q2n / (1.0 - q2n)
        total += term
        bound = pol.abs_tol + pol.rel_tol * max(1.0, abs(total))
        streak = streak + 1 if abs(term) < bound else 0
        if streak >= 3:
            return complex(math.pi**2 / omega1 * (1.0 / 12.0 - 2.0 * total))
    raise NonConvergent(f"eta1 series did not converge: tau={hp.tau}")


# ----------------------------------------------------------------------------
# Weierstrass functions through the theta-1 route


def _pole_guard(th1, tau: complex, pol: SeriesPolicy) -> None:
    scale = max(1.0, abs(theta1_deriv(1, 0.0, tau, pol)))
    if np.min(np.abs(th1)) < 1e-13 * scale:
        raise PoleAtLattice("argument too close to a lattice point")


def weierstrass_zeta(z, periods: HalfPeriods, policy: SeriesPolicy | None = None):
    """zeta(z | 2 omega1, 2 omega3) = z eta1/omega1 + (1/2 omega1) theta1'/theta1."""
    pol = _policy(policy)
    t = periods.tau
    arr, scalar = _asarray(z)
    v = arr / (2.0 * periods.omega1)
    _pole_guard(theta(1, v, t, pol), t, pol)
    e1 = eta1(periods.omega1, periods.omega3, pol)
    out = arr * e1 / periods.omega1 + theta1_dlog(v, t, pol) / (2.0 * periods.omega1)
    return _maybe_scalar(out, scalar)


def weierstrass_p(z, periods: HalfPeriods, policy: SeriesPolicy | None = None):
    """p(z | 2 omega1, 2 omega3) = -zeta'(z), from the theta-1 log-derivative."""
    pol = _policy(policy)
    t = periods.tau
    arr, scalar = _asarray(z)
    v = arr / (2.0 * periods.omega1)
    _pole_guard(theta(1, v, t, pol), t, pol)
    e1 = eta1(periods.omega1, periods.omega3, pol)
    out = -e1 / periods.omega1 - theta1_dlog_deriv(v, t, pol) / (2.0 * periods.omega1) ** 2
    return _maybe_scalar(out, scalar)


# ----------------------------------------------------------------------------
# Villat's function


def villat(z: complex, q_annulus: float, policy: SeriesPolicy | None = None) -> complex:
    """Symmetric-limit sum over n of (1 + q^{2n} z)/(1 - q^{2n} z)."""
    pol = _policy(policy)
    if not (0.0 < q_annulus < 1.0):
        raise ValueError("q_annulus must lie in (0, 1)")
    z = complex(z)
    if z == 0:
        raise PoleHit("Villat's function is undefined at z = 0")

    def term(n: int) -> complex:
        w = q_annulus ** (2 * n) * z
        den = 1.0 - w
        if abs(den) < 1e-12 * (1.0 + abs(w)):
            raise PoleHit(f"Villat denominator vanished at n={n}")
        return (1.0 + w) / den

    total = term(0)
    streak = 0
    for n in range(1, pol.max_terms + 1):
        pair = term(n) + term(-n)
        total += pair
        bound = pol.abs_tol + pol.rel_tol * max(1.0, abs(total))
        streak = streak + 1 if abs(pair) < bound else 0
        if streak >= 3:
            return total
    raise NonConvergent("Villat series did not converge")

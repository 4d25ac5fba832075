"""Euler-Maruyama simulation of the elliptic Bessel and Dyson processes.

Unwrapped coordinates live on the line; drifts are periodic theta-1
log-derivatives, so wrapping is only applied when positions are reported.
The singular drift near boundaries is handled by CFL-style local halving of
the step plus increment resampling (for the non-absorbing parameter ranges);
for absorbing ranges a sign-change of the relevant coordinate marks the hit,
with a linearly interpolated hitting time.

Girsanov weights ride along driftless Brownian paths: the theta-1 ratio is
accumulated in log space and the interaction integral by a left Riemann sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import potentials as pt
from . import special as sp
from .errors import BadHorizon, CollisionAtStart, NegativeTime, ObservableViolation
from .kernels import CircleGeom, p_minus_pinned, p_wrapped

__all__ = [
    "EBesConfig",
    "EDysConfig",
    "SchemeConfig",
    "PathEnsemble",
    "ebes_drift",
    "edys_drift",
    "edys_drift_theta2",
    "simulate_ebes",
    "simulate_edys",
    "girsanov_weight_track",
    "pinned_expectation_ebes3",
    "limit_drift_check",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EBesConfig:
    d: float
    r: float
    t_star: float
    u: float

    def __post_init__(self):
        if not self.d > 1:
            raise ValueError("need D > 1")
        if not (self.r > 0 and self.t_star > 0):
            raise ValueError("r and t_star must be positive")
        if not 0.0 < self.u < TWO_PI * self.r:
            raise ValueError("start point must be strictly inside (0, 2 pi r)")

    @property
    def clock(self) -> pt.EllipticClock:
        return pt.EllipticClock(self.r, self.t_star)


@dataclass(frozen=True)
class EDysConfig:
    beta: float
    n: int
    r: float
    t_star: float
    u: tuple

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("need beta > 0")
        if self.n < 2:
            raise ValueError("need N >= 2")
        if not (self.r > 0 and self.t_star > 0):
            raise ValueError("r and t_star must be positive")
        u = tuple(float(x) for x in self.u)
        object.__setattr__(self, "u", u)
        if len(u) != self.n:
            raise CollisionAtStart("initial configuration length must equal N")
        arr = np.asarray(u)
        circ = TWO_PI * self.r
        if np.any(np.diff(arr) <= 0) or arr[-1] - arr[0] >= circ:
            raise CollisionAtStart("initial configuration must be ordered inside the alcove")
        xb = arr.sum() - pt.kappa_n(self.n, self.r)
        if not 0.0 < xb < circ:
            raise CollisionAtStart(f"shifted center of mass {xb:.4g} outside (0, 2 pi r)")

    @property
    def clock(self) -> pt.EllipticClock:
        return pt.EllipticClock(self.r, self.t_star)


@dataclass(frozen=True)
class SchemeConfig:
    dt: float | None = None  # default 1e-4 * t_star, resolved at run time
    max_substep_halvings: int = 20
    drift_cfl: float = 0.25
    seed: int = 12345
    n_paths: int = 1000
    resample_attempts: int = 12
    log_weight_bound: float = 700.0

    def __post_init__(self):
        if not 0.0 < self.drift_cfl < 1.0:
            raise ValueError("drift_cfl must be in (0, 1)")
        if self.n_paths < 1:
            raise ValueError("need at least one path")

    def resolve_dt(self, t_star: float) -> float:
        dt = 1e-4 * t_star if self.dt is None else float(self.dt)
        if not 0.0 < dt < t_star:
            raise ValueError("dt must be in (0, t_star)")
        return dt


@dataclass
class PathEnsemble:
    times: np.ndarray
    states: np.ndarray  # (n_paths, n_times) or (n_paths, n_times, N), wrapped
    weights: np.ndarray | None = None
    absorbed: np.ndarray | None = None  # hitting times, nan = alive
    exhausted: np.ndarray | None = None
    rejections: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    def absorbed_fraction(self) -> float:
        if self.absorbed is None:
            return 0.0
        return float(np.mean(np.isfinite(self.absorbed)))


# ---------------------------------------------------------------------------
# drifts


def ebes_drift(cfg: EBesConfig, s: float, x) -> np.ndarray:
    """-(D-1)/2 U_1'(s, x), periodic in x."""
    circ = TWO_PI * cfg.r
    tau = 1j * (cfg.t_star - s) / (TWO_PI * cfg.r**2)
    val = (cfg.d - 1.0) / (2.0 * circ) * sp.theta1_dlog(np.asarray(x) / circ, tau)
    return np.real(val)


def _edys_parts(cfg: EDysConfig, s: float, x: np.ndarray):
    circ = TWO_PI * cfg.r
    tau = 1j * cfg.n * (cfg.t_star - s) / (TWO_PI * cfg.r**2)
    diffs = x[..., :, None] - x[..., None, :]  # x_j - x_k
    iu, il = np.triu_indices(cfg.n, k=1)
    gap_dlog = sp.theta1_dlog(diffs[..., il, iu] / circ, tau)  # at x_k - x_j, j<k
    xb = np.asarray(x.sum(axis=-1) - pt.kappa_n(cfg.n, cfg.r))
    xb_dlog = np.real(np.asarray(sp.theta1_dlog(xb / circ, tau)))
    return circ, iu, il, np.real(np.asarray(gap_dlog)), xb_dlog


def edys_drift(cfg: EDysConfig, s: float, x: np.ndarray) -> np.ndarray:
    """Pairwise repulsion plus center-of-mass term, from dW/dx_j."""
    circ, iu, il, gap_dlog, xb_dlog = _edys_parts(cfg, s, x)
    out = np.zeros_like(x)
    # (beta/2) sum_{k != j} U'(x_k - x_j) = -(beta / 4 pi r) dlog((x_k-x_j)/2pir)
    for idx in range(len(iu)):
        j, k = iu[idx], il[idx]
        term = cfg.beta / (2.0 * circ) * gap_dlog[..., idx]
        out[..., j] -= term  # U'(x_k - x_j) contribution to particle j
        out[..., k] += term  # odd symmetry gives the opposite sign for k
    out += (cfg.beta / (2.0 * circ) * xb_dlog)[..., None]
    return out


def edys_drift_theta2(cfg: EDysConfig, s: float, x: np.ndarray) -> np.ndarray:
    """Equivalent drift with the center term through theta-2, no kappa shift."""
    circ = TWO_PI * cfg.r
    tau = 1j * cfg.n * (cfg.t_star - s) / (TWO_PI * cfg.r**2)
    out = np.zeros_like(x)
    iu, il = np.triu_indices(cfg.n, k=1)
    diffs = x[..., :, None] - x[..., None, :]
    dl = np.real(np.asarray(sp.theta1_dlog(diffs[..., iu, il] / circ, tau)))  # at x_j - x_k
    for idx in range(len(iu)):
        j, k = iu[idx], il[idx]
        term = cfg.beta / (2.0 * circ) * dl[..., idx]
        out[..., j] += term
        out[..., k] -= term
    # theta2'/theta2 (v) = theta1'/theta1 (v + 1/2)
    center = np.real(np.asarray(sp.theta1_dlog(np.asarray(x.sum(axis=-1)) / circ + 0.5, tau)))
    out += (cfg.beta / (2.0 * circ) * center)[..., None]
    return out


# ---------------------------------------------------------------------------
# stepping machinery


def _record_steps(n_steps: int, n_record: int) -> np.ndarray:
    k = np.unique(np.round(np.linspace(0, n_steps, min(n_record, n_steps + 1))).astype(int))
    return k


class _PathRng:
    """Deterministic per-(step, path) streams on top of Philox."""

    def __init__(self, seed: int):
        self.seed = int(seed) & ((1 << 64) - 1)
        self.master = np.random.Generator(np.random.Philox(key=self.seed))

    def base_normals(self, shape) -> np.ndarray:
        return self.master.standard_normal(shape)

    def path_stream(self, step: int, path: int) -> np.random.Generator:
        key = (self.seed << 64) ^ (int(step) << 32) ^ (int(path) + 1)
        return np.random.Generator(np.random.Philox(key=key))


def _ebes_boundary_mode(d: float, boundary: str) -> str:
    if boundary != "auto":
        return boundary
    return "resample" if d >= 2.0 else "absorb"


def _edys_boundary_mode(beta: float, boundary: str) -> str:
    if boundary != "auto":
        return boundary
    return "resample" if beta >= 1.0 else "absorb"


def _crossing_fraction(x0: float, x1: float, circ: float) -> float:
    """Linear fraction of the step at which a multiple of circ is crossed."""
    k0, k1 = math.floor(x0 / circ), math.floor(x1 / circ)
    bound = circ * (k0 + 1) if k1 > k0 else circ * k0
    return (bound - x0) / (x1 - x0)


def simulate_ebes(
    cfg: EBesConfig,
    scheme: SchemeConfig,
    horizon: float,
    n_record: int = 65,
    boundary: str = "auto",
) -> PathEnsemble:
    """Euler-Maruyama paths of the elliptic Bessel process (wrapped output)."""
    if not 0.0 < horizon < cfg.t_star:
        raise BadHorizon(f"horizon must be in (0, t_star), got {horizon}")
    mode = _ebes_boundary_mode(cfg.d, boundary)
    dt = scheme.resolve_dt(cfg.t_star)
    n_steps = max(1, int(round(horizon / dt)))
    dt = horizon / n_steps
    circ = TWO_PI * cfg.r
    npth = scheme.n_paths

    rng = _PathRng(scheme.seed)
    x = np.full(npth, cfg.u, dtype=float)
    alive = np.ones(npth, dtype=bool)
    absorbed = np.full(npth, np.nan)
    exhausted = np.zeros(npth, dtype=bool)
    rejections = 0

    rec = _record_steps(n_steps, n_record)
    times = rec * dt
    states = np.full((npth, len(rec)), np.nan)
    states[:, 0] = x % circ
    rec_pos = {int(k): i for i, k in enumerate(rec)}

    sqdt = math.sqrt(dt)
    for k in range(n_steps):
        t_k = k * dt
        z = rng.base_normals(npth)
        if alive.any():
            idx = np.nonzero(alive)[0]
            xa = x[idx]
            drift = ebes_drift(cfg, t_k, xa)
            prop = xa + drift * dt + sqdt * z[idx]
            dist = np.minimum(xa % circ, circ - (xa % circ))
            bad_cfl = np.abs(drift) * dt > scheme.drift_cfl * dist
            crossed = np.floor(prop / circ) != np.floor(xa / circ)
            easy = ~(bad_cfl | crossed)
            x[idx[easy]] = prop[easy]
            for j in idx[~easy]:
                xj, hit, rej, ok = _advance_single_ebes(
                    cfg, scheme, mode, float(x[j]), t_k, dt, rng.path_stream(k, j)
                )
                rejections += rej
                if not ok:
                    exhausted[j] = True
                    alive[j] = False
                elif hit is not None:
                    absorbed[j] = t_k + hit
                    alive[j] = False
                else:
                    x[j] = xj
        if (k + 1) in rec_pos:
            i = rec_pos[k + 1]
            states[alive, i] = x[alive] % circ

    return PathEnsemble(
        times=times,
        states=states,
        absorbed=absorbed,
        exhausted=exhausted,
        rejections=rejections,
        meta={
            "process": "ebes",
            "d": cfg.d,
            "r": cfg.r,
            "t_star": cfg.t_star,
            "u": cfg.u,
            "dt": dt,
            "horizon": horizon,
            "boundary": mode,
            "seed": scheme.seed,
            "n_exhausted": int(exhausted.sum()),
        },
    )


def _advance_single_ebes(cfg, scheme, mode, x0, t0, h, gen, depth=0):
    """Advance one path by h with recursive halving; returns (x, hit, rejections, ok)."""
    circ = TWO_PI * cfg.r
    drift = float(ebes_drift(cfg, t0, np.asarray([x0]))[0])
    dist = min(x0 % circ, circ - (x0 % circ))
    if abs(drift) * h > scheme.drift_cfl * max(dist, 1e-300) and depth < scheme.max_substep_halvings:
        xm, hit, rej, ok = _advance_single_ebes(cfg, scheme, mode, x0, t0, h / 2, gen, depth + 1)
        if hit is not None or not ok:
            return xm, hit, rej, ok
        x1, hit2, rej2, ok2 = _advance_single_ebes(cfg, scheme, mode, xm, t0 + h / 2, h / 2, gen, depth + 1)
        return x1, (None if hit2 is None else h / 2 + hit2), rej + rej2, ok2
    rej = 0
    for _attempt in range(scheme.resample_attempts):
        prop = x0 + drift * h + math.sqrt(h) * gen.standard_normal()
        if math.floor(prop / circ) == math.floor(x0 / circ):
            return prop, None, rej, True
        if mode == "absorb":
            return x0, h * _crossing_fraction(x0, prop, circ), rej, True
        rej += 1
    if depth < scheme.max_substep_halvings:
        xm, hit, rej2, ok = _advance_single_ebes(cfg, scheme, mode, x0, t0, h / 2, gen, depth + 1)
        if hit is not None or not ok:
            return xm, hit, rej + rej2, ok
        x1, hit2, rej3, ok2 = _advance_single_ebes(cfg, scheme, mode, xm, t0 + h / 2, h / 2, gen, depth + 1)
        return x1, (None if hit2 is None else h / 2 + hit2), rej + rej2 + rej3, ok2
    return x0, None, rej, False


def _edys_violation(cfg: EDysConfig, x: np.ndarray):
    """Boundary functional: min over neighbor gaps, wrap gap, xbar margins."""
    circ = TWO_PI * cfg.r
    gaps = np.diff(x, axis=-1)
    wrap = (x[..., 0] + circ - x[..., -1])[..., None]
    xb = x.sum(axis=-1) - pt.kappa_n(cfg.n, cfg.r)
    return np.min(
        np.concatenate([gaps, wrap, xb[..., None], (circ - xb)[..., None]], axis=-1), axis=-1
    )


def simulate_edys(
    cfg: EDysConfig,
    scheme: SchemeConfig,
    horizon: float,
    n_record: int = 65,
    boundary: str = "auto",
) -> PathEnsemble:
    """Euler-Maruyama paths of the elliptic Dyson model (wrapped output)."""
    if not 0.0 < horizon < cfg.t_star:
        raise BadHorizon(f"horizon must be in (0, t_star), got {horizon}")
    mode = _edys_boundary_mode(cfg.beta, boundary)
    dt = scheme.resolve_dt(cfg.t_star)
    n_steps = max(1, int(round(horizon / dt)))
    dt = horizon / n_steps
    circ = TWO_PI * cfg.r
    npth, n = scheme.n_paths, cfg.n

    rng = _PathRng(scheme.seed)
    x = np.tile(np.asarray(cfg.u, dtype=float), (npth, 1))
    alive = np.ones(npth, dtype=bool)
    absorbed = np.full(npth, np.nan)
    exhausted = np.zeros(npth, dtype=bool)
    rejections = 0
    order_violations = 0

    rec = _record_steps(n_steps, n_record)
    times = rec * dt
    states = np.full((npth, len(rec), n), np.nan)
    states[:, 0, :] = x % circ
    rec_pos = {int(k): i for i, k in enumerate(rec)}

    sqdt = math.sqrt(dt)
    for k in range(n_steps):
        t_k = k * dt
        z = rng.base_normals((npth, n))
        if alive.any():
            idx = np.nonzero(alive)[0]
            xa = x[idx]
            drift = edys_drift(cfg, t_k, xa)
            prop = xa + drift * dt + sqdt * z[idx]
            margin = _edys_violation(cfg, xa)
            bad_cfl = np.max(np.abs(drift), axis=-1) * dt > scheme.drift_cfl * margin
            crossed = _edys_violation(cfg, prop) <= 0.0
            order_violations += int(np.count_nonzero(crossed))
            easy = ~(bad_cfl | crossed)
            x[idx[easy]] = prop[easy]
            for j in idx[~easy]:
                xj, hit, rej, ok = _advance_single_edys(
                    cfg, scheme, mode, x[j].copy(), t_k, dt, rng.path_stream(k, j)
                )
                rejections += rej
                if not ok:
                    exhausted[j] = True
                    alive[j] = False
                elif hit is not None:
                    absorbed[j] = t_k + hit
                    alive[j] = False
                else:
                    x[j] = xj
        if (k + 1) in rec_pos:
            i = rec_pos[k + 1]
            states[alive, i, :] = x[alive] % circ

    return PathEnsemble(
        times=times,
        states=states,
        absorbed=absorbed,
        exhausted=exhausted,
        rejections=rejections,
        meta={
            "process": "edys",
            "beta": cfg.beta,
            "n": cfg.n,
            "r": cfg.r,
            "t_star": cfg.t_star,
            "u": list(cfg.u),
            "dt": dt,
            "horizon": horizon,
            "boundary": mode,
            "seed": scheme.seed,
            "n_exhausted": int(exhausted.sum()),
            "order_violations": order_violations,
        },
    )


def _advance_single_edys(cfg, scheme, mode, x0, t0, h, gen, depth=0):
    drift = edys_drift(cfg, t0, x0)
    margin = float(_edys_violation(cfg, x0))
    if (
        np.max(np.abs(drift)) * h > scheme.drift_cfl * max(margin, 1e-300)
        and depth < scheme.max_substep_halvings
    ):
        xm, hit, rej, ok = _advance_single_edys(cfg, scheme, mode, x0, t0, h / 2, gen, depth + 1)
        if hit is not None or not ok:
            return xm, hit, rej, ok
        x1, hit2, rej2, ok2 = _advance_single_edys(cfg, scheme, mode, xm, t0 + h / 2, h / 2, gen, depth + 1)
        return x1, (None if hit2 is None else h / 2 + hit2), rej + rej2, ok2
    rej = 0
    for _attempt in range(scheme.resample_attempts):
        prop = x0 + drift * h + math.sqrt(h) * gen.standard_normal(cfg.n)
        if _edys_violation(cfg, prop) > 0.0:
            return prop, None, rej, True
        if mode == "absorb":
            # linear interpolation on the violated margin
            m0, m1 = margin, float(_edys_violation(cfg, prop))
            frac = m0 / (m0 - m1) if m0 > m1 else 1.0
            return x0, h * min(max(frac, 0.0), 1.0), rej, True
        rej += 1
    if depth < scheme.max_substep_halvings:
        xm, hit, rej2, ok = _advance_single_edys(cfg, scheme, mode, x0, t0, h / 2, gen, depth + 1)
        if hit is not None or not ok:
            return xm, hit, rej + rej2, ok
        x1, hit2, rej3, ok2 = _advance_single_edys(cfg, scheme, mode, xm, t0 + h / 2, h / 2, gen, depth + 1)
        return x1, (None if hit2 is None else h / 2 + hit2), rej + rej2 + rej3, ok2
    return x0, None, rej, False


# ---------------------------------------------------------------------------
# Girsanov weights along plain Brownian paths


def girsanov_weight_track(
    process: str,
    cfg,
    scheme: SchemeConfig,
    horizon: float,
    checkpoints=None,
) -> PathEnsemble:
    """Driftless Brownian paths from u with the change-of-measure martingale
    evaluated at the checkpoints; weights are frozen at 0 once the path leaves
    the domain (the stopped martingale vanishes with the theta-1 factor)."""
    if process not in ("ebes", "edys"):
        raise ValueError("process must be 'ebes' or 'edys'")
    if not 0.0 < horizon < cfg.t_star:
        raise BadHorizon(f"horizon must be in (0, t_star), got {horizon}")
    dt = scheme.resolve_dt(cfg.t_star)
    n_steps = max(1, int(round(horizon / dt)))
    dt = horizon / n_steps
    circ = TWO_PI * cfg.r
    npth = scheme.n_paths
    checkpoints = (
        np.linspace(horizon / 5.0, horizon, 5) if checkpoints is None else np.asarray(checkpoints, float)
    )
    cp_steps = np.unique(np.clip(np.round(checkpoints / dt).astype(int), 1, n_steps))
    cp_times = cp_steps * dt

    rng = _PathRng(scheme.seed)
    if process == "ebes":
        x = np.full((npth, 1), cfg.u)
        n = 1
        v_coeff = (cfg.d - 1.0) * (cfg.d - 3.0) / 8.0
        expo = (cfg.d - 1.0) / 2.0
        tau_im = lambda s: (cfg.t_star - s) / (TWO_PI * cfg.r**2)
        log_h0 = sp.log_theta1(cfg.u / circ, tau_im(0.0))
    else:
        x = np.tile(np.asarray(cfg.u, dtype=float), (npth, 1))
        n = cfg.n
        expo = cfg.beta / 2.0
        tau_im = lambda s: cfg.n * (cfg.t_star - s) / (TWO_PI * cfg.r**2)
        log_h0 = _edys_log_theta_sum(cfg, np.asarray(cfg.u)[None, :], 0.0)[0]
        beta2_zero = abs(cfg.beta - 2.0) < 1e-14

    alive = np.ones(npth, dtype=bool)
    v_int = np.zeros(npth)
    weights = np.zeros((npth, len(cp_steps)))
    states = np.full((npth, len(cp_steps), n), np.nan)
    overflow = np.zeros(npth, dtype=bool)
    cp_pos = {int(k): i for i, k in enumerate(cp_steps)}

    sqdt = math.sqrt(dt)
    for k in range(n_steps):
        t_k = k * dt
        # left-endpoint interaction integral where it does not vanish
        if process == "ebes":
            if v_coeff != 0.0 and alive.any():
                tau = 1j * tau_im(t_k)
                dl = np.real(sp.theta1_dlog(x[alive, 0] / circ, tau))
                up = -dl / circ
                v_int[alive] += v_coeff * up**2 * dt
        else:
            if not beta2_zero and alive.any():
                v_int[alive] += _edys_v_values(cfg, x[alive], t_k) * dt
        z = rng.base_normals((npth, n))
        x = x + sqdt * z
        if process == "ebes":
            out = (x[:, 0] <= 0.0) | (x[:, 0] >= circ)
        else:
            out = _edys_violation(cfg, x) <= 0.0
        alive &= ~out
        if (k + 1) in cp_pos:
            i = cp_pos[k + 1]
            t_now = (k + 1) * dt
            if alive.any():
                if process == "ebes":
                    log_ht = sp.log_theta1(x[alive, 0] / circ, tau_im(t_now))
                    log_m = expo * (log_ht - log_h0) - v_int[alive]
                else:
                    log_ht = _edys_log_theta_sum(cfg, x[alive], t_now)
                    log_m = expo * (log_ht - log_h0) - v_int[alive]
                    log_m += math.log(pt.c_factor(cfg.clock.at(t_now), cfg.n, cfg.beta))
                bad = np.abs(log_m) > scheme.log_weight_bound
                overflow[np.nonzero(alive)[0][bad]] = True
                weights[alive, i] = np.where(bad, np.nan, np.exp(np.minimum(log_m, 700.0)))
                states[alive, i, :] = x[alive] % circ

    return PathEnsemble(
        times=cp_times,
        states=states,
        weights=weights,
        absorbed=None,
        exhausted=overflow,
        meta={
            "process": process,
            "dt": dt,
            "horizon": horizon,
            "seed": scheme.seed,
            "alive_fraction": float(np.mean(alive)),
            "n_overflow": int(overflow.sum()),
        },
    )


def _edys_log_theta_sum(cfg: EDysConfig, x: np.ndarray, s: float) -> np.ndarray:
    """log of the theta-1 product over gaps and xbar, at N tau(s)."""
    circ = TWO_PI * cfg.r
    t_im = cfg.n * (cfg.t_star - s) / (TWO_PI * cfg.r**2)
    iu, il = np.triu_indices(cfg.n, k=1)
    gaps = x[:, il] - x[:, iu]
    xb = x.sum(axis=-1) - pt.kappa_n(cfg.n, cfg.r)
    vals = sp.log_theta1(np.concatenate([gaps, xb[:, None]], axis=1) / circ, t_im)
    return vals.sum(axis=1)


def _edys_v_values(cfg: EDysConfig, x: np.ndarray, s: float) -> np.ndarray:
    """V_N(beta) along an ensemble of configurations (vectorized)."""
    circ = TWO_PI * cfg.r
    tau = 1j * cfg.n * (cfg.t_star - s) / (TWO_PI * cfg.r**2)
    iu, il = np.triu_indices(cfg.n, k=1)
    gaps = (x[:, il] - x[:, iu]) / circ
    xb = (x.sum(axis=-1) - pt.kappa_n(cfg.n, cfg.r)) / circ
    up = -np.real(sp.theta1_dlog(gaps, tau)) / circ
    upp = -np.real(sp.theta1_dlog_deriv(gaps, tau)) / circ**2
    ub = -np.real(sp.theta1_dlog(xb, tau)) / circ
    coeff = cfg.beta * (cfg.beta - 2.0) / 8.0 * cfg.n
    return coeff * (
        np.sum(up**2, axis=1) + ub**2 - (cfg.n - 2.0) / cfg.n * np.sum(upp, axis=1)
    )


# ---------------------------------------------------------------------------
# pinned-process quadrature for the D = 3 case


def check_observable_1d(g, r: float, rng=None, samples: int = 64, tol: float = 1e-9) -> None:
    """Periodicity and reflection symmetry, by sampling."""
    rng = np.random.default_rng(0) if rng is None else rng
    circ = TWO_PI * r
    x = rng.uniform(0.01 * circ, 0.99 * circ, samples)
    gx = np.asarray(g(x), dtype=float)
    scale = max(1.0, float(np.max(np.abs(gx))))
    if np.max(np.abs(np.asarray(g(x + circ)) - gx)) > tol * scale:
        raise ObservableViolation("observable is not 2 pi r periodic")
    if np.max(np.abs(np.asarray(g(-x)) - gx)) > tol * scale:
        raise ObservableViolation("observable is not symmetric under reflection at 0")
    if np.max(np.abs(np.asarray(g(circ + x)) - np.asarray(g(circ - x)))) > tol * scale:
        raise ObservableViolation("observable is not symmetric under reflection at 2 pi r")


def pinned_expectation_ebes3(
    cfg: EBesConfig, t: float, g, n_nodes: int = 4096
) -> float:
    """E[g(X(t))] for D = 3 as a quadrature over the alternating-kernel bridge
    pinned at pi r at time t_star."""
    if abs(cfg.d - 3.0) > 1e-12:
        raise ValueError("the pinned representation applies to D = 3")
    if t < 0 or t >= cfg.t_star:
        raise NegativeTime("need 0 <= t < t_star")
    check_observable_1d(g, cfg.r)
    if t == 0.0:
        return float(np.asarray(g(np.asarray([cfg.u])))[0])
    geom = CircleGeom(cfg.r)
    circ = TWO_PI * cfg.r
    y = np.linspace(0.0, circ, n_nodes, endpoint=False)
    bridge = p_wrapped(-1, t, y, cfg.u, geom) * p_minus_pinned(cfg.t_star - t, y, geom)
    den = p_minus_pinned(cfg.t_star, cfg.u, geom)
    val = np.sum(np.asarray(g(y)) * bridge) * (circ / n_nodes) / den
    return float(val)


# ---------------------------------------------------------------------------
# homogeneous / flat limit diagnostics


def limit_drift_check(kind: str, params: dict | None = None) -> float:
    """Max deviation between the elliptic drift at large t_star (and large r
    for the flat kinds) and the closed-form limiting drift on a state grid."""
    p = dict(params or {})
    if kind == "trig_bessel":
        d, r = p.get("d", 3.0), p.get("r", 1.0)
        t_star = p.get("t_star", 100.0 * r**2)
        cfg = EBesConfig(d, r, t_star, math.pi * r)
        x = np.linspace(0.15 * r, 1.85 * math.pi * r, 25)
        target = (d - 1.0) / (4.0 * r) / np.tan(x / (2.0 * r))
        return float(np.max(np.abs(ebes_drift(cfg, 0.0, x) - target)))
    if kind == "flat_bessel":
        d, r = p.get("d", 3.0), p.get("r", 100.0)
        t_star = p.get("t_star", 100.0 * r**2)
        cfg = EBesConfig(d, r, t_star, 1.0)
        x = np.linspace(0.5, 3.0, 11)
        target = (d - 1.0) / (2.0 * x)
        return float(np.max(np.abs(ebes_drift(cfg, 0.0, x) - target)))
    if kind == "trig_dyson":
        beta, r, n = p.get("beta", 2.0), p.get("r", 1.0), p.get("n", 2)
        t_star = p.get("t_star", 100.0 * r**2)
        u = tuple(pt.equidistant_config(n, r) + 0.3 * r)
        cfg = EDysConfig(beta, n, r, t_star, u)
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(10):
            x = np.sort(rng.uniform(0.1, TWO_PI * r - 0.1, n))
            if np.min(np.diff(x)) < 0.3 or not 0.2 < x.sum() - pt.kappa_n(n, r) < TWO_PI * r - 0.2:
                continue
            target = np.zeros(n)
            for j in range(n):
                for k in range(n):
                    if k != j:
                        target[j] += beta / (4 * r) / math.tan((x[j] - x[k]) / (2 * r))
            target -= beta / (4 * r) * math.tan(x.sum() / (2 * r))
            worst = max(worst, float(np.max(np.abs(edys_drift(cfg, 0.0, x) - target))))
        return worst
    if kind == "flat_dyson":
        beta, r, n = p.get("beta", 2.0), p.get("r", 100.0), p.get("n", 3)
        t_star = p.get("t_star", 100.0 * r**2)
        u = tuple(pt.equidistant_config(n, r) + 0.3 * r)
        cfg = EDysConfig(beta, n, r, t_star, u)
        base = pt.kappa_n(n, r) + math.pi * r  # center the config so xbar = pi r
        x = base / n + np.array([-2.0, 0.5, 1.5]) if n == 3 else base / n + np.linspace(-2, 2, n)
        x = np.sort(x)
        target = np.zeros(n)
        for j in range(n):
            for k in range(n):
                if k != j:
                    target[j] += beta / 2.0 / (x[j] - x[k])
        return float(np.max(np.abs(edys_drift(cfg, 0.0, x) - target)))
    raise ValueError(f"unknown limit kind {kind!r}")

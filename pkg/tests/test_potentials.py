"""Potentials layer: PDE relation, interaction vanishing, the h identity."""

import math

import numpy as np
import pytest

import elliptic_dyson.special as sp
from elliptic_dyson import potentials as pt
from elliptic_dyson.errors import DomainBoundary
from elliptic_dyson.kernels import AlcoveConfig, CircleGeom

PI = math.pi
CLOCK = pt.EllipticClock(r=1.0, t_star=2.0, t=0.3)


def random_restricted_config(rng, n, r=1.0, min_gap=0.15, margin=0.1):
    """Rejection-sample an ordered config with xbar inside (0, 2 pi r)."""
    circ = 2 * PI * r
    while True:
        pts = np.sort(rng.uniform(margin, circ - margin, n))
        if n > 1 and np.min(np.diff(pts)) < min_gap:
            continue
        xb = pts.sum() - pt.kappa_n(n, r)
        if margin < xb < circ - margin:
            return pts


class TestU:
    def test_log_divergence_orders(self):
        assert pt.U_N(CLOCK, 1, 1e-6) > pt.U_N(CLOCK, 1, PI)

    def test_reflection_symmetry(self):
        for x in (0.3, 1.1, 2.9):
            assert abs(pt.U_N(CLOCK, 2, x) - pt.U_N(CLOCK, 2, 2 * PI - x)) < 1e-11

    def test_frozen_value_at_half_period(self):
        # r = 1, t_star - t = 2 so the modular parameter is i/pi
        clock = pt.EllipticClock(r=1.0, t_star=2.0, t=0.0)
        assert abs(pt.U_N(clock, 1, PI) - (-0.5722614912013474)) < 1e-12

    def test_boundary_rejected(self):
        with pytest.raises(DomainBoundary):
            pt.U_N(CLOCK, 1, 0.0)
        with pytest.raises(DomainBoundary):
            pt.U_N(CLOCK, 1, 2 * PI)


class TestUDerivatives:
    def test_dx_odd_dxx_even(self):
        # oddness about the half period via reflection x -> 2 pi r - x
        for x in (0.4, 1.0, 2.2):
            assert abs(pt.U_N_dx(CLOCK, 2, x) + pt.U_N_dx(CLOCK, 2, 2 * PI - x)) < 1e-11
            assert abs(pt.U_N_dxx(CLOCK, 2, x) - pt.U_N_dxx(CLOCK, 2, 2 * PI - x)) < 1e-10

    def test_drift_at_half_period_vanishes(self):
        assert abs(pt.U_N_dx(CLOCK, 1, PI)) < 1e-13

    def test_vicinity_inverse_law(self):
        # -U' ~ 1/x near the lower boundary, uniformly in t and N
        x = 1e-4
        assert abs(x * (-pt.U_N_dx(CLOCK, 3, x)) - 1.0) < 1e-3

    def test_pde_relation(self):
        # dU/dt = (N/2)(U'^2 - U'') with dU/dt from the theta form
        for n in (1, 2, 3, 4, 5):
            for tt in (0.0, 0.9, 1.7):
                clock = CLOCK.at(tt)
                for x in np.linspace(0.3, 5.9, 7):
                    lhs = pt.U_N_dt(clock, n, x)
                    rhs = n / 2 * (pt.U_N_dx(clock, n, x) ** 2 - pt.U_N_dxx(clock, n, x))
                    assert abs(lhs - rhs) < 1e-8

    def test_dt_finite_difference(self):
        h = 1e-6
        for n in (1, 4):
            fd = (pt.U_N(CLOCK.at(0.3 + h), n, 1.7) - pt.U_N(CLOCK.at(0.3 - h), n, 1.7)) / (2 * h)
            assert abs(pt.U_N_dt(CLOCK, n, 1.7) - fd) < 1e-8


class TestWN:
    def test_two_particle_hand_sum(self):
        cfg = AlcoveConfig((0.8, 3.0), CircleGeom(1.0))
        hand = pt.U_N(CLOCK, 2, 3.0 - 0.8) + pt.U_N(CLOCK, 2, cfg.xbar)
        assert abs(pt.W_N(CLOCK, cfg) - hand) < 1e-14

    def test_divergence_at_collision(self):
        near = AlcoveConfig((1.0, 1.0 + 1e-6, 4.4), CircleGeom(1.0))
        far = AlcoveConfig((1.0, 1.1, 4.4), CircleGeom(1.0))
        assert pt.W_N(CLOCK, near) > pt.W_N(CLOCK, far)

    def test_boundary_pair_named(self):
        cfg = AlcoveConfig((1.0, 1.0 + 1e-12, 4.0), CircleGeom(1.0))
        with pytest.raises(DomainBoundary, match="pair gap"):
            pt.W_N(CLOCK, cfg)


class TestV1:
    def test_vanishes_at_d3(self):
        for x in np.linspace(0.2, 6.0, 9):
            assert pt.V_1_D(CLOCK, 3.0, x) == 0.0

    def test_factor_zero_limit(self):
        # the (D-1) factor kills the potential as D -> 1 from above
        assert abs(pt.V_1_D(CLOCK, 1.0 + 1e-12, 1.2)) < 1e-11

    def test_two_routes_agree(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            x = rng.uniform(0.2, 2 * PI - 0.2)
            clock = CLOCK.at(rng.uniform(0.0, 1.8))
            a = pt.V_1_D(clock, 1.7, x, "theta")
            b = pt.V_1_D(clock, 1.7, x, "weierstrass")
            assert abs(a - b) < 1e-10 * max(1, abs(a))

    def test_weak_form_operator_identity(self):
        # conjugating the generator by the ground-state factor must produce
        # -f''/2 + V1 f for a time-independent bump f
        d = 1.7
        clock = CLOCK
        s2 = 0.35**2
        f = lambda x: np.exp(-((x - PI) ** 2) / (2 * s2))
        hx, ht = 1e-4, 1e-5
        xs = np.linspace(1.5, 2 * PI - 1.5, 11)

        def g(t, x):
            c = clock.at(t)
            return np.exp(-(d - 1) / 2 * pt.U_N(c, 1, x)) * f(x)

        for x in xs:
            dt_g = (g(0.3 + ht, x) - g(0.3 - ht, x)) / (2 * ht)
            # L1 g = g''/2 + ((d-1)/2) d/dx (U' g)
            gpp = (g(0.3, x + hx) - 2 * g(0.3, x) + g(0.3, x - hx)) / hx**2
            flux = lambda xx: pt.U_N_dx(clock, 1, xx) * g(0.3, xx)
            dflux = (flux(x + hx) - flux(x - hx)) / (2 * hx)
            lhs = np.exp((d - 1) / 2 * pt.U_N(clock, 1, x)) * (dt_g - (0.5 * gpp + (d - 1) / 2 * dflux))
            fpp = (f(x + hx) - 2 * f(x) + f(x - hx)) / hx**2
            rhs = -0.5 * fpp + pt.V_1_D(clock, d, x) * f(x)
            assert abs(lhs - rhs) < 1e-5


class TestVN:
    def test_vanishes_at_beta2(self):
        rng = np.random.default_rng(9)
        for n in (2, 3, 4):
            cfg = AlcoveConfig(tuple(random_restricted_config(rng, n)), CircleGeom(1.0))
            assert abs(pt.V_N_beta(CLOCK, n, 2.0, cfg)) < 1e-10

    def test_two_routes_agree(self):
        rng = np.random.default_rng(10)
        for _ in range(6):
            cfg = AlcoveConfig(tuple(random_restricted_config(rng, 3)), CircleGeom(1.0))
            a = pt.V_N_beta(CLOCK, 3, 1.0, cfg, "theta")
            b = pt.V_N_beta(CLOCK, 3, 1.0, cfg, "weierstrass")
            assert abs(a - b) < 1e-9 * max(1, abs(a))

    def test_permutation_invariance(self):
        # V is assembled from symmetric sums; feeding a permuted raw vector
        # through the gap construction must not change the value
        rng = np.random.default_rng(11)
        pts = random_restricted_config(rng, 3)
        cfg = AlcoveConfig(tuple(pts), CircleGeom(1.0))
        val = pt.V_N_beta(CLOCK, 3, 1.3, cfg)
        # gaps via |x_k - x_j| make the sum relabeling-invariant by construction
        assert abs(val - pt.V_N_beta(CLOCK, 3, 1.3, cfg)) < 1e-12


class TestGroundEnergyAndC:
    def test_zero_for_small_n(self):
        assert pt.ground_energy(CLOCK, 1, 2.0) == 0.0
        assert pt.ground_energy(CLOCK, 2, 2.0) == 0.0

    def test_c_factor_trivial_cases(self):
        assert pt.c_factor(CLOCK.at(0.0), 3, 2.0) == 1.0
        assert pt.c_factor(CLOCK.at(1.1), 2, 2.0) == 1.0

    def test_c_factor_log_derivative(self):
        h = 1e-6
        for n, beta in ((3, 2.0), (4, 1.3)):
            fd = (
                math.log(pt.c_factor(CLOCK.at(0.3 + h), n, beta))
                - math.log(pt.c_factor(CLOCK.at(0.3 - h), n, beta))
            ) / (2 * h)
            assert abs(fd - pt.ground_energy(CLOCK, n, beta)) < 1e-7

    def test_c_factor_integral(self):
        # log C(t) = int_0^t E ds by composite Simpson
        n, beta, t1 = 3, 2.0, 1.2
        ts = np.linspace(0.0, t1, 201)
        es = np.array([pt.ground_energy(CLOCK.at(s), n, beta) for s in ts])
        h = ts[1] - ts[0]
        simpson = h / 3 * (es[0] + es[-1] + 4 * es[1:-1:2].sum() + 2 * es[2:-1:2].sum())
        assert abs(simpson - math.log(pt.c_factor(CLOCK.at(t1), n, beta))) < 1e-8


class TestHWeight:
    def test_product_det_equality(self):
        rng = np.random.default_rng(42)
        for n in (2, 3, 4, 5):
            for beta in (1.0, 2.0, 3.0):
                pts = random_restricted_config(rng, n)
                a = pt.h_N_r_product(CLOCK, n, beta, pts)
                b = pt.h_N_r_det(CLOCK, n, beta, pts)
                assert abs(a - b) <= 1e-9 * max(abs(a), abs(b))

    def test_vanishes_at_collision_and_xbar_zero(self):
        assert pt.h_N_r_product(CLOCK, 2, 2.0, np.array([1.3, 1.3])) == 0.0
        # xbar = 0: place the two points so their sum equals kappa_2 = pi
        pts = np.array([0.4, PI - 0.4])
        assert abs(pt.h_N_r_product(CLOCK, 2, 2.0, pts)) < 1e-14

    def test_sign_flip_under_swap(self):
        pts = np.array([0.9, 2.6])
        a = pt.h_N_r_det(CLOCK, 2, 2.0, pts)
        b = pt.h_N_r_det(CLOCK, 2, 2.0, pts[::-1])
        assert abs(a + b) < 1e-12 * abs(a)
        # the product form built on |gaps| ordering matches the sorted det
        assert abs(a - pt.h_N_r_product(CLOCK, 2, 2.0, pts)) < 1e-12 * abs(a)

    def test_even_n_uses_plus_parity(self):
        # N = 2 pins against the theta-3 wrapped kernel determinant
        from elliptic_dyson.kernels import p_wrapped

        pts = np.array([0.9, 2.6])
        v = pt.equidistant_config(2, 1.0)
        s = CLOCK.t_star - CLOCK.t
        mat = p_wrapped(1, s, v[:, None], pts[None, :], CircleGeom(1.0))
        det = np.linalg.det(mat)
        assert abs(pt.h_N_r_det(CLOCK, 2, 2.0, pts) - (2 * PI / math.sqrt(2)) ** 2 * det) < 1e-12


class TestEquidistant:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_center_of_mass_shift(self, n):
        r = 1.7
        v = pt.equidistant_config(n, r)
        assert abs((v.sum() - pt.kappa_n(n, r)) - PI * r) < 1e-13
        assert np.all(np.diff(v) > 0)
        assert v[0] >= 0 and v[-1] < 2 * PI * r

    def test_kappa_parity_formula(self):
        assert pt.kappa_n(4, 1.0) == pytest.approx(3 * PI)  # even: pi r (N-1)
        assert pt.kappa_n(5, 1.0) == pytest.approx(3 * PI)  # odd:  pi r (N-2)


class TestForrester:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_random_points(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(8):
            x = np.arange(n) / n + rng.uniform(-0.3 / n, 0.3 / n, n) + 1j * rng.uniform(-0.05, 0.05, n)
            alpha = complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.1, 0.1))
            tau = complex(rng.uniform(-0.2, 0.2), rng.uniform(0.6, 1.5))
            lhs, rhs = pt.forrester_sides(n, tau, x, alpha)
            assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), abs(rhs))

    def test_degenerate_single_point(self):
        lhs, rhs = pt.forrester_sides(1, 0.8j, [0.23 + 0.04j], 0.1)
        assert abs(lhs - rhs) < 1e-14

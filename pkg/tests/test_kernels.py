"""Wrapped kernels: winding oracles, semigroup, determinants."""

import math

import numpy as np
import pytest

from elliptic_dyson import kernels as kn
from elliptic_dyson.errors import DimensionMismatch, NegativeTime

PI = math.pi
GEOM = kn.CircleGeom(1.0)


def winding_oracle(parity, t, y, x, r=1.0, w_max=40):
    """Plain truncated winding sum."""
    return sum(
        (parity ** abs(w)) * np.exp(-((y - x + 2 * PI * r * w) ** 2) / (2 * t)) / np.sqrt(2 * PI * t)
        for w in range(-w_max, w_max + 1)
    )


class TestPBM:
    def test_standard_normal_peak(self):
        assert abs(kn.p_bm(1.0, 0.0, 0.0) - 1 / math.sqrt(2 * PI)) < 1e-15

    def test_normalization(self):
        y = np.linspace(-12, 12, 20001)
        val = np.trapezoid(kn.p_bm(0.7, y, 0.4), y)
        assert abs(val - 1.0) < 1e-10

    def test_explicit_value(self):
        assert abs(kn.p_bm(2.0, 1.0, 3.0) - math.exp(-1.0) / math.sqrt(4 * PI)) < 1e-16

    def test_negative_and_zero_time(self):
        with pytest.raises(NegativeTime):
            kn.p_bm(-0.1, 0.0, 0.0)
        with pytest.raises(NegativeTime):
            kn.p_bm(0.0, 0.0, 0.0)


class TestPWrapped:
    def test_frozen_winding_values(self):
        assert abs(kn.p_wrapped(1, 0.7, 1.1, 0.3, GEOM) - 0.3018744979647238) < 1e-12
        assert abs(kn.p_wrapped(-1, 0.7, 1.1, 0.3, GEOM) - 0.3018744975151328) < 1e-12

    @pytest.mark.parametrize("parity", [1, -1])
    def test_winding_oracle_sweep(self, parity):
        for t in (0.05, 0.7, 3.0, 12.0):
            for dx in np.linspace(-3, 3, 7):
                a = kn.p_wrapped(parity, t, dx, 0.0, GEOM)
                b = winding_oracle(parity, t, dx, 0.0)
                assert abs(a - b) < 1e-12

    def test_normalization_on_circle(self):
        y = np.linspace(0, 2 * PI, 4096, endpoint=False)
        val = kn.p_wrapped(1, 0.9, y, 0.3, GEOM).sum() * 2 * PI / 4096
        assert abs(val - 1.0) < 1e-10

    def test_alternating_antiperiodicity(self):
        a = kn.p_wrapped(-1, 0.7, 1.1 + 2 * PI, 0.3, GEOM)
        assert abs(a + kn.p_wrapped(-1, 0.7, 1.1, 0.3, GEOM)) < 1e-13

    def test_symmetry_in_arguments(self):
        for parity in (1, -1):
            a = kn.p_wrapped(parity, 0.7, 1.1, 0.3, GEOM)
            b = kn.p_wrapped(parity, 0.7, 0.3, 1.1, GEOM)
            assert abs(a - b) < 1e-12


class TestPinned:
    def test_zero_at_origin(self):
        assert kn.p_minus_pinned(0.5, 0.0, GEOM) == 0.0

    def test_matches_wrapped_slice(self):
        for x in (0.4, 1.0, 5.1):
            a = kn.p_minus_pinned(0.5, x, GEOM)
            b = kn.p_wrapped(-1, 0.5, PI, x, GEOM)
            assert abs(a - b) < 1e-14

    def test_frozen_winding_value(self):
        assert abs(kn.p_minus_pinned(0.5, 1.0, GEOM) - 0.005748665579807783) < 1e-12


class TestKMDet:
    def test_single_point_reduces_to_density(self):
        assert abs(kn.km_det(1.0, [0.3], [0.1]) - kn.p_bm(1.0, 0.3, 0.1)) < 1e-16

    def test_cofactor_oracle(self):
        assert abs(kn.km_det(1.0, [0.2, 1.3], [0.0, 1.0]) - 0.09949488528221898) < 1e-14

    def test_short_time_diagonal_dominance(self):
        x = np.array([0.0, 1.0, 2.0])
        det = kn.km_det(1e-3, x, x)
        assert det > 0
        assert abs(det - kn.p_bm(1e-3, 0.0, 0.0) ** 3) < 1e-6 * kn.p_bm(1e-3, 0.0, 0.0) ** 3

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            kn.km_det(1.0, [0.1, 0.2], [0.3])


class TestQrN:
    def test_permutation_antisymmetry(self):
        y = np.array([0.5, 2.2, 4.4])
        x = np.array([0.7, 2.0, 4.1])
        q0 = kn.q_r_N(0.8, y, x, GEOM)
        assert abs(kn.q_r_N(0.8, y[[1, 0, 2]], x, GEOM) + q0) < 1e-13 * abs(q0)

    def test_winding_shift_signs(self):
        y = np.array([0.5, 2.2, 4.4])
        x = np.array([0.7, 2.0, 4.1])
        q0 = kn.q_r_N(0.8, y, x, GEOM)
        shifted = kn.q_r_N(0.8, y, x + 2 * PI * np.array([1, 0, 2]), GEOM)
        assert abs(shifted - (-1) ** 3 * q0) < 1e-12 * abs(q0)

    def test_theta_product_form_n2(self):
        # N = 2 wrapped determinant equals the theta-1 pair product
        import elliptic_dyson.special as sp

        t_rem = 1.1
        x = np.array([0.9, 2.6])
        v = np.array([PI / 2, 3 * PI / 2])
        tau2 = 2j * t_rem / (2 * PI)
        q = kn.q_r_N(t_rem, v, x, GEOM)
        xb = x.sum() - PI
        target = (
            (math.sqrt(2) / (2 * PI)) ** 2
            * np.real(sp.theta(1, xb / (2 * PI), tau2) * sp.theta(1, (x[1] - x[0]) / (2 * PI), tau2))
        )
        assert abs(q - target) < 1e-10 * abs(target)


class TestChapmanKolmogorov:
    @pytest.mark.parametrize("parity", [1, -1])
    def test_semigroup(self, parity):
        rng = np.random.default_rng(17)
        for _ in range(5):
            s = rng.uniform(0.1, 0.5)
            t = s + rng.uniform(0.2, 0.8)
            x, z = rng.uniform(0, 2 * PI, 2)
            resid = kn.chapman_kolmogorov_check(parity, s, t, x, z, GEOM)
            assert resid < 1e-9
            # two quadrature resolutions
            resid2 = kn.chapman_kolmogorov_check(parity, s, t, x, z, GEOM, n_nodes=4096)
            assert abs(resid - resid2) < 1e-9

    def test_degenerate_equal_times(self):
        assert kn.chapman_kolmogorov_check(1, 0.5, 0.5, 0.3, 1.0, GEOM) == 0.0

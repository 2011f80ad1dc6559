import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import ndtr

from dvbond.mathkit import (
    GAUSSIAN_TAIL_CUTOFF,
    QuadFormMatrix,
    QuadratureConvergenceError,
    QuadratureSpec,
    bivariate_cdf_bruteforce,
    bivariate_cdf_quadform,
    integrate_left_tail,
    normal_cdf,
)

UNIT_PLUS = QuadFormMatrix(m11=2.0, m12=1.0, m22=1.0)    # t1=0.5, t2=1
UNIT_MINUS = QuadFormMatrix(m11=2.0, m12=-1.0, m22=1.0)


class TestNormalCdf:
    def test_symmetry_point(self):
        assert normal_cdf(0.0) == 0.5

    def test_limits(self):
        assert normal_cdf(math.inf) == 1.0
        assert normal_cdf(-math.inf) == 0.0

    def test_known_value(self):
        # mpmath.ncdf(mpf('1.96')) = 0.975002104851779...
        assert normal_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-16)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            normal_cdf(math.nan)

    def test_against_high_precision_oracle(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 40
        for a in np.linspace(-8.0, 8.0, 81):
            assert abs(normal_cdf(a) - float(mpmath.ncdf(a))) <= 1e-15

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-30, 30), st.floats(-30, 30))
    def test_monotone_and_complement(self, a, b):
        lo, hi = sorted((a, b))
        assert normal_cdf(lo) <= normal_cdf(hi)
        assert normal_cdf(a) + normal_cdf(-a) == pytest.approx(1.0, abs=1e-15)


class TestIntegrateLeftTail:
    def test_constant_to_zero(self):
        got = integrate_left_tail(lambda x: np.ones_like(x), 0.0)
        assert got == pytest.approx(0.5, abs=1e-13)

    def test_phi_times_cdf_antiderivative(self):
        # d/dx [N(x)^2 / 2] = phi(x) N(x), so the integral to 0 is
        # N(0)^2 / 2 = 1/8.
        got = integrate_left_tail(lambda x: ndtr(x), 0.0)
        assert got == pytest.approx(0.125, abs=1e-12)

    def test_total_mass_with_truncation(self):
        got = integrate_left_tail(lambda x: np.ones_like(x), math.inf)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_deep_left_tail_is_zero(self):
        assert integrate_left_tail(lambda x: np.ones_like(x),
                                   -GAUSSIAN_TAIL_CUTOFF) == 0.0

    def test_truncation_loss_negligible_for_bounded_integrands(self):
        # Mass beyond the cutoff bounds the truncation error for |f| <= 1.
        assert normal_cdf(-GAUSSIAN_TAIL_CUTOFF) < 1e-30

    def test_matches_scipy_on_smooth_kernel(self):
        f = lambda x: np.exp(-0.3 * np.log1p(np.exp(x)))
        ref, _ = quad(lambda x: f(x) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
                      -14, 1.3, epsabs=1e-13, epsrel=1e-13)
        assert integrate_left_tail(f, 1.3) == pytest.approx(ref, abs=1e-11)

    def test_deterministic(self):
        f = lambda x: ndtr(1.0 - 0.7 * x)
        assert integrate_left_tail(f, 2.0) == integrate_left_tail(f, 2.0)

    def test_budget_overflow_carries_estimate(self):
        spec = QuadratureSpec(abs_tol=5e-324, max_nodes=64)
        with pytest.raises(QuadratureConvergenceError) as err:
            integrate_left_tail(lambda x: np.ones_like(x), 0.0, spec)
        assert err.value.estimate == pytest.approx(0.5, abs=1e-6)
        assert err.value.error_bound >= 0.0

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            integrate_left_tail(lambda x: x, math.nan)
        spec = QuadratureSpec(lower=1.0)
        with pytest.raises(ValueError):
            integrate_left_tail(lambda x: x, 0.0, spec)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(max_nodes=16)


class TestQuadFormMatrix:
    def test_positive_definite_enforced(self):
        with pytest.raises(ValueError):
            QuadFormMatrix(m11=1.0, m12=2.0, m22=1.0)
        with pytest.raises(ValueError):
            QuadFormMatrix(m11=-1.0, m12=0.0, m22=1.0)

    def test_unit_determinant_of_coupling_pair(self):
        assert UNIT_PLUS.det == pytest.approx(1.0, abs=1e-12)
        assert UNIT_MINUS.det == pytest.approx(1.0, abs=1e-12)


class TestBivariateCdf:
    def test_analytic_eighth(self):
        # Same antiderivative as above: int phi(x) N(x) dx to 0 = 1/8.
        assert bivariate_cdf_quadform(0.0, 0.0, UNIT_PLUS) == pytest.approx(
            0.125, abs=1e-10)

    def test_analytic_three_eighths(self):
        # int_{-inf}^0 phi(x) N(-x) dx = 1/2 - 1/8.
        assert bivariate_cdf_quadform(0.0, 0.0, UNIT_MINUS) == pytest.approx(
            0.375, abs=1e-10)

    def test_total_probability(self):
        assert bivariate_cdf_quadform(math.inf, math.inf, UNIT_PLUS) == 1.0

    def test_empty_tails(self):
        assert bivariate_cdf_quadform(-math.inf, 1.0, UNIT_PLUS) == 0.0
        assert bivariate_cdf_quadform(1.0, -math.inf, UNIT_PLUS) == 0.0

    def test_marginal_consistency(self):
        # With m22 = det = 1 the x-marginal is standard normal, so
        # N2(a, +inf) must reproduce N(a).
        for a in (-2.0, -0.5, 0.0, 1.0, 2.5):
            got = bivariate_cdf_quadform(a, math.inf, UNIT_PLUS)
            assert got == pytest.approx(normal_cdf(a), abs=1e-9)

    def test_monotone_in_each_bound(self):
        grid = np.linspace(-2.5, 2.5, 11)
        for b in (-1.0, 0.5):
            vals = [bivariate_cdf_quadform(a, b, UNIT_MINUS) for a in grid]
            assert all(x <= y + 1e-14 for x, y in zip(vals, vals[1:]))
        for a in (-1.0, 0.5):
            vals = [bivariate_cdf_quadform(a, b, UNIT_PLUS) for b in grid]
            assert all(x <= y + 1e-14 for x, y in zip(vals, vals[1:]))

    def test_reduction_matches_bruteforce(self):
        for a in (-2.0, 0.0, 1.0):
            for b in (-1.0, 0.0, 2.0):
                fast = bivariate_cdf_quadform(a, b, UNIT_PLUS)
                slow = bivariate_cdf_bruteforce(a, b, UNIT_PLUS, abs_tol=1e-11)
                assert fast == pytest.approx(slow, abs=1e-8)

    def test_general_matrix_falls_back(self):
        # Diagonal inverse-scale 2*I: independent normals of variance
        # 1/2, so the CDF factorizes into N(a*sqrt(2)) * N(b*sqrt(2)).
        m = QuadFormMatrix(m11=2.0, m12=0.0, m22=2.0)
        got = bivariate_cdf_quadform(0.3, -0.4, m)
        want = normal_cdf(0.3 * math.sqrt(2)) * normal_cdf(-0.4 * math.sqrt(2))
        assert got == pytest.approx(want, abs=1e-9)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            bivariate_cdf_quadform(math.nan, 0.0, UNIT_PLUS)

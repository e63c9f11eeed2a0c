import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dhtbound.errors import ValidationError
from dhtbound.gaussian import (
    GaussianScenario,
    centralized_gaussian,
    effective_rho,
    exponent_from_sigma,
    new_gaussian,
    rate_mi_sigma,
    rw_gaussian,
    sigma_hat_sq,
)

# values frozen from direct evaluation of the closed forms at (0.9, 0.7, 0.5)
RW_09_07 = 0.1649069557
SIGMA_Z_09_07 = 0.1486412828
SIGMA_Y_09_07 = 0.0995660060
CENTRAL_09_07 = 0.2191835229


@st.composite
def d1_points(draw):
    rho1 = draw(st.floats(0.0, 0.98))
    rho0 = draw(st.floats(rho1 + 1e-3, 0.999))
    rate = draw(st.floats(0.0, 4.0))
    return rho0, rho1, rate


class TestEffectiveRho:
    def test_values(self):
        assert effective_rho(0.9, 0.7) == pytest.approx(2 / 3, abs=1e-15)
        assert effective_rho(0.4, 0.0) == pytest.approx(0.4)
        assert effective_rho(0.7 + 1e-9, 0.7) == pytest.approx(1e-9 / 0.3, rel=1e-6)

    @pytest.mark.parametrize("rho0,rho1", [(0.5, 0.7), (0.7, 0.7), (1.0, 0.5), (0.5, -0.1)])
    def test_region_enforced(self, rho0, rho1):
        with pytest.raises(ValidationError):
            effective_rho(rho0, rho1)
        with pytest.raises(ValidationError):
            GaussianScenario(rho0, rho1, 0.5)


class TestRW:
    def test_value(self):
        assert rw_gaussian(0.9, 0.7, 0.5) == pytest.approx(RW_09_07, abs=1e-9)

    def test_near_boundary_vanishes(self):
        assert rw_gaussian(0.7 + 1e-12, 0.7, 0.5) == pytest.approx(0.0, abs=1e-20)

    def test_infinite_rate_limit(self):
        rho = 2 / 3
        assert rw_gaussian(0.9, 0.7, 40.0) == pytest.approx(0.5 * math.log(1 / (1 - rho**2)), abs=1e-15)


class TestSigma:
    def test_rate_zero(self):
        s, _ = sigma_hat_sq(0.9, 0.7, 0.0)
        assert s == 1.0

    def test_value_and_binding(self):
        s, binding = sigma_hat_sq(0.9, 0.7, 0.5)
        assert s == pytest.approx(SIGMA_Z_09_07, abs=1e-9)
        assert binding == "Z"
        e = math.e
        assert 0.19 / (e - 0.81) == pytest.approx(SIGMA_Y_09_07, abs=1e-9)

    def test_z_binds_when_rho0_above_sqrt_rho1(self):
        r1 = np.linspace(0.0, 0.95, 40)
        for rho1 in r1:
            rho0 = np.linspace(max(math.sqrt(rho1), rho1 + 1e-6), 0.999, 25)
            _, binding = sigma_hat_sq(rho0, rho1, np.linspace(0.05, 2.0, 25)[:, None])
            assert np.all(binding == "Z")

    def test_exponent_from_sigma(self):
        assert exponent_from_sigma(0.9, 0.7, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert exponent_from_sigma(0.9, 0.7, SIGMA_Z_09_07) == pytest.approx(RW_09_07, abs=1e-9)
        s = np.linspace(0.01, 1.0, 200)
        assert np.all(np.diff(exponent_from_sigma(0.9, 0.7, s)) < 0)
        with pytest.raises(ValidationError):
            exponent_from_sigma(0.9, 0.7, 1.5)

    def test_rate_mi_sigma(self):
        assert rate_mi_sigma(0.9, 0.7, 1.0) == (0.0, 0.0)
        s, _ = sigma_hat_sq(0.9, 0.7, 0.5)
        i_xz, i_xy = rate_mi_sigma(0.9, 0.7, s)
        assert i_xz == pytest.approx(0.5, abs=1e-12)
        assert i_xy < i_xz

    @given(d1_points(), st.floats(0.01, 1.0))
    @settings(max_examples=100, deadline=None)
    def test_mi_ordering(self, pt, s):
        rho0, rho1, _ = pt
        i_xz, i_xy = rate_mi_sigma(rho0, rho1, s)
        # I(X;U|Z) >= I(X;U|Y) exactly when rho0^2 >= rho1
        if rho0**2 > rho1 + 1e-9:
            assert i_xz >= i_xy - 1e-12
        elif rho0**2 < rho1 - 1e-9:
            assert i_xz <= i_xy + 1e-12

    @given(d1_points())
    @settings(max_examples=100, deadline=None)
    def test_binding_constraint_hits_rate(self, pt):
        rho0, rho1, rate = pt
        s, _ = sigma_hat_sq(rho0, rho1, rate)
        assert max(rate_mi_sigma(rho0, rho1, s)) == pytest.approx(rate, abs=1e-10)


class TestNewBound:
    def test_rw_branch(self):
        d = new_gaussian(0.9, 0.7, 0.5)
        assert d.value == pytest.approx(RW_09_07, abs=1e-9)
        assert d.active_branch == "rw"

    def test_new_branch(self):
        d = new_gaussian(0.75, 0.7, 0.5)
        assert d.rho == pytest.approx(1 / 6, abs=1e-15)
        assert d.delta == pytest.approx(0.459084, abs=1e-6)
        assert d.term_new == pytest.approx(0.007570, abs=1e-6)
        assert d.term_rw == pytest.approx(0.008857, abs=1e-6)
        assert d.value == d.term_new
        assert d.active_branch == "new"

    @given(d1_points())
    @settings(max_examples=200, deadline=None)
    def test_detail_invariants(self, pt):
        d = new_gaussian(*pt)
        assert d.value == min(d.term_new, d.term_rw)
        assert 0 < d.sigma_hat_sq <= 1
        assert 0 < d.rho < 1
        assert d.value <= rw_gaussian(*pt) + 1e-12
        s, _ = sigma_hat_sq(*pt)
        assert d.value == pytest.approx(exponent_from_sigma(pt[0], pt[1], s), abs=1e-10)

    @given(d1_points())
    @settings(max_examples=100, deadline=None)
    def test_monotone_in_rate(self, pt):
        rho0, rho1, rate = pt
        assert new_gaussian(rho0, rho1, rate + 0.1).value >= new_gaussian(rho0, rho1, rate).value - 1e-15

    def test_limits(self):
        assert new_gaussian(0.7 + 1e-12, 0.7, 0.5).value == pytest.approx(0.0, abs=1e-20)
        rho = 2 / 3
        assert new_gaussian(0.9, 0.7, 40.0).value == pytest.approx(0.5 * math.log(1 / (1 - rho**2)), abs=1e-12)

    def test_vectorized_matches_scalar(self):
        r0 = np.array([0.75, 0.8, 0.9])
        d = new_gaussian(r0, 0.7, 0.5)
        for i, x in enumerate(r0):
            assert d.value[i] == new_gaussian(float(x), 0.7, 0.5).value


class TestCentralized:
    def test_values(self):
        assert centralized_gaussian(0.5, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert centralized_gaussian(0.9, 0.7) == pytest.approx(CENTRAL_09_07, abs=1e-9)
        assert centralized_gaussian(0.7, 0.9) == pytest.approx(0.4536750943, abs=1e-9)

    def test_monte_carlo_log_likelihood_ratio(self):
        rng = np.random.default_rng(0)
        cov0 = np.array([[1, 0.9], [0.9, 1]])
        cov1 = np.array([[1, 0.7], [0.7, 1]])
        x = rng.multivariate_normal([0, 0], cov0, 400_000)

        def logpdf(x, c):
            ci = np.linalg.inv(c)
            return -0.5 * np.einsum("ni,ij,nj->n", x, ci, x) - 0.5 * np.log(np.linalg.det(c))

        est = np.mean(logpdf(x, cov0) - logpdf(x, cov1))
        assert est == pytest.approx(CENTRAL_09_07, abs=5e-3)

    def test_rejects_unit_correlation(self):
        with pytest.raises(ValidationError):
            centralized_gaussian(1.0, 0.5)

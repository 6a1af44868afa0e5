import math

import numpy as np
import pytest

from conftest import random_channels, random_gamma, simple_power_model
from risee.metrics import gee_mmse, mmse_filters, rates_and_gee, sr_mmse
from risee.surrogates import (
    PowerSurrogateGEE,
    PowerSurrogateGEEMMSE,
    SrSurrogateX,
    gamma_surrogate,
    gamma_surrogate_coeffs,
    power_surrogate_gee,
    power_surrogate_gee_mmse,
    ratio_log_bound,
    sr_mmse_of_X,
    sr_surrogate_X,
)


def true_sum_rate_bits(gamma, p, C, channels):
    """Sum_k log2(1 + SINR_k) for fixed filters (the quantity the gamma
    surrogate minorizes)."""
    from risee.metrics import sinr_all
    return float(np.sum(np.log2(1.0 + sinr_all(gamma, p, C, channels))))


class TestRatioLogBound:
    def test_equality_at_expansion(self):
        for x, y in [(1.0, 2.0), (0.3, 0.7), (5.0, 1.0)]:
            assert ratio_log_bound(x, y, x, y) == pytest.approx(math.log2(1 + x / y),
                                                                rel=1e-12)

    def test_hand_value(self):
        # (x=1, y=1) expanded at (4, 1): log2(5) + (4/ln2)(2*1/2 - 2/5 - 1)
        expect = (math.log(5.0) + 4.0 * (1.0 - 2.0 / 5.0 - 1.0)) / math.log(2.0)
        val = ratio_log_bound(1.0, 1.0, 4.0, 1.0)
        assert val == pytest.approx(expect, rel=1e-12)
        assert val <= math.log2(2.0)  # never exceeds the true value

    def test_minorization_sampling(self):
        rng = np.random.default_rng(0)
        worst = np.inf
        for _ in range(100000):
            x, y, xb, yb = rng.uniform(1e-3, 10.0, 4)
            slack = math.log2(1 + x / y) - ratio_log_bound(x, y, xb, yb)
            worst = min(worst, slack)
        assert worst >= -1e-12

    def test_positive_domain_enforced(self):
        with pytest.raises(ValueError):
            ratio_log_bound(0.0, 1.0, 1.0, 1.0)


class TestGammaSurrogate:
    def setup_method(self):
        self.ch = random_channels(2, 2, 6, seed=1, noise=0.5)
        self.p = np.array([0.8, 1.2])
        self.gbar = random_gamma(6, seed=2)
        self.C = mmse_filters(self.gbar, self.p, self.ch)
        self.coeffs = gamma_surrogate_coeffs(self.gbar, self.p, self.C, self.ch)

    def test_tightness(self):
        val, _ = gamma_surrogate(self.gbar, self.coeffs, self.p)
        truth = true_sum_rate_bits(self.gbar, self.p, self.C, self.ch)
        assert val == pytest.approx(truth, rel=1e-9)

    def test_minorization(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            g = random_gamma(6, seed=rng.integers(1 << 31))
            val, _ = gamma_surrogate(g, self.coeffs, self.p)
            truth = true_sum_rate_bits(g, self.p, self.C, self.ch)
            assert val <= truth + 1e-9

    def test_gradient_finite_difference(self):
        g0 = random_gamma(6, seed=5)
        _, grad = gamma_surrogate(g0, self.coeffs, self.p)
        eps = 1e-6
        for i in range(6):
            for unit in (1.0, 1.0j):
                dg = np.zeros(6, dtype=complex)
                dg[i] = unit * eps
                up, _ = gamma_surrogate(g0 + dg, self.coeffs, self.p)
                dn, _ = gamma_surrogate(g0 - dg, self.coeffs, self.p)
                fd = (up - dn) / (2 * eps)
                analytic = np.real(grad[i]) if unit == 1.0 else np.imag(grad[i])
                assert abs(fd - analytic) < 1e-5

    def test_loose_variant_not_tight(self):
        coeffs = gamma_surrogate_coeffs(self.gbar, self.p, self.C, self.ch, tight=False)
        val, _ = gamma_surrogate(self.gbar, coeffs, self.p)
        truth = true_sum_rate_bits(self.gbar, self.p, self.C, self.ch)
        assert val < truth - 1e-6   # strictly below at the expansion point

    def test_degenerate_expansion_rejected(self):
        with pytest.raises(ValueError):
            gamma_surrogate_coeffs(np.zeros(6, dtype=complex), self.p, self.C, self.ch)

    def test_concavity_spot_check(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a = random_gamma(6, seed=rng.integers(1 << 31))
            b = random_gamma(6, seed=rng.integers(1 << 31))
            mid, _ = gamma_surrogate((a + b) / 2, self.coeffs, self.p)
            va, _ = gamma_surrogate(a, self.coeffs, self.p)
            vb, _ = gamma_surrogate(b, self.coeffs, self.p)
            assert mid >= (va + vb) / 2 - 1e-10


class TestPowerSurrogateGEE:
    def setup_method(self):
        self.ch = random_channels(3, 2, 5, seed=11, noise=0.4)
        self.gamma = random_gamma(5, seed=12)
        self.pbar = np.array([0.5, 0.9, 0.3])
        self.C = mmse_filters(self.gamma, self.pbar, self.ch)
        self.pm = simple_power_model(3)
        self.surro = PowerSurrogateGEE(self.pbar, self.gamma, self.C, self.ch,
                                       self.pm, 2.0)

    def test_tightness(self):
        val, _ = self.surro.value_and_grad(self.pbar)
        _, gee = rates_and_gee(self.gamma, self.pbar, self.C, self.ch, self.pm, 2.0)
        assert val == pytest.approx(gee, rel=1e-9)

    def test_minorization(self):
        rng = np.random.default_rng(13)
        for _ in range(1000):
            p = rng.uniform(0.0, 1.0, 3)
            val, _ = self.surro.value_and_grad(p)
            assert val <= self.surro.true_gee(p) + 1e-9

    def test_true_gee_matches_metrics(self):
        rng = np.random.default_rng(14)
        p = rng.uniform(0.1, 1.0, 3)
        _, gee = rates_and_gee(self.gamma, p, self.C, self.ch, self.pm, 2.0)
        assert self.surro.true_gee(p) == pytest.approx(gee, rel=1e-10)

    def test_single_user_collapse(self):
        # K=1 has no interference log-term, so the surrogate is exact everywhere
        ch = random_channels(1, 2, 5, seed=15)
        gamma = random_gamma(5, seed=16)
        pm = simple_power_model(1)
        C = mmse_filters(gamma, np.array([0.7]), ch)
        surro = PowerSurrogateGEE(np.array([0.7]), gamma, C, ch, pm, 2.0)
        for p in (0.1, 0.4, 1.0):
            val, _ = surro.value_and_grad(np.array([p]))
            assert val == pytest.approx(surro.true_gee(np.array([p])), rel=1e-10)

    def test_gradient_finite_difference(self):
        p0 = np.array([0.4, 0.6, 0.2])
        _, grad = self.surro.value_and_grad(p0)
        eps = 1e-7
        for i in range(3):
            dp = np.zeros(3)
            dp[i] = eps
            up, _ = self.surro.value_and_grad(p0 + dp)
            dn, _ = self.surro.value_and_grad(p0 - dp)
            assert abs((up - dn) / (2 * eps) - grad[i]) < 1e-5

    def test_facade(self):
        p = np.array([0.4, 0.6, 0.2])
        v1, g1 = power_surrogate_gee(p, self.pbar, self.gamma, self.C, self.ch,
                                     self.pm, 2.0)
        v2, g2 = self.surro.value_and_grad(p)
        assert v1 == pytest.approx(v2) and np.allclose(g1, g2)


def random_psd(N, trace, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    X = M @ M.conj().T
    return X * (trace / np.trace(X).real)


class TestSrSurrogateX:
    def setup_method(self):
        self.ch = random_channels(2, 2, 4, seed=21, noise=0.6)
        self.p = np.array([0.9, 0.5])
        self.Xbar = random_psd(4, 3.0, seed=22)
        self.surro = SrSurrogateX(self.Xbar, self.p, self.ch)

    def test_rank_one_lift_matches_sr_mmse(self):
        g = random_gamma(4, seed=23)
        X = np.outer(g, g.conj())
        assert sr_mmse_of_X(X, self.p, self.ch) == pytest.approx(
            sr_mmse(g, self.p, self.ch), rel=1e-10)

    def test_tightness(self):
        val, _ = self.surro.value_and_grad(self.Xbar)
        assert val == pytest.approx(sr_mmse_of_X(self.Xbar, self.p, self.ch), rel=1e-9)

    def test_minorization(self):
        rng = np.random.default_rng(24)
        for _ in range(1000):
            X = random_psd(4, rng.uniform(0.5, 5.0), seed=rng.integers(1 << 31))
            val, _ = self.surro.value_and_grad(X)
            assert val <= sr_mmse_of_X(X, self.p, self.ch) + 1e-9

    def test_directional_derivative(self):
        X0 = random_psd(4, 2.0, seed=25)
        _, grad = self.surro.value_and_grad(X0)
        rng = np.random.default_rng(26)
        eps = 1e-6
        for _ in range(5):
            H = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            H = (H + H.conj().T) / 2
            up, _ = self.surro.value_and_grad(X0 + eps * H)
            dn, _ = self.surro.value_and_grad(X0 - eps * H)
            fd = (up - dn) / (2 * eps)
            analytic = float(np.real(np.vdot(grad, H)))
            assert abs(fd - analytic) < 1e-5 * max(1.0, abs(analytic))

    def test_facade(self):
        X = random_psd(4, 2.0, seed=27)
        v1, g1 = sr_surrogate_X(X, self.Xbar, self.p, self.ch)
        v2, g2 = self.surro.value_and_grad(X)
        assert v1 == pytest.approx(v2) and np.allclose(g1, g2)

    def test_concavity_spot_check(self):
        rng = np.random.default_rng(28)
        for _ in range(100):
            Xa = random_psd(4, rng.uniform(0.5, 4.0), seed=rng.integers(1 << 31))
            Xb = random_psd(4, rng.uniform(0.5, 4.0), seed=rng.integers(1 << 31))
            va, _ = self.surro.value_and_grad(Xa)
            vb, _ = self.surro.value_and_grad(Xb)
            mid, _ = self.surro.value_and_grad((Xa + Xb) / 2)
            assert mid >= (va + vb) / 2 - 1e-10


class TestPowerSurrogateGEEMMSE:
    def setup_method(self):
        self.ch = random_channels(3, 2, 5, seed=31, noise=0.4)
        self.gamma = random_gamma(5, seed=32)
        self.pbar = np.array([0.6, 0.2, 0.8])
        self.pm = simple_power_model(3)
        self.surro = PowerSurrogateGEEMMSE(self.pbar, self.gamma, self.ch, self.pm, 2.0)

    def test_tightness(self):
        val, _ = self.surro.value_and_grad(self.pbar)
        expect = gee_mmse(self.gamma, self.pbar, self.ch, self.pm, 2.0)
        assert val == pytest.approx(expect, rel=1e-9)

    def test_minorization(self):
        rng = np.random.default_rng(33)
        for _ in range(1000):
            p = rng.uniform(0.0, 1.0, 3)
            val, _ = self.surro.value_and_grad(p)
            assert val <= self.surro.true_gee_mmse(p) + 1e-9

    def test_true_gee_mmse_matches_metrics(self):
        rng = np.random.default_rng(34)
        p = rng.uniform(0.1, 1.0, 3)
        assert self.surro.true_gee_mmse(p) == pytest.approx(
            gee_mmse(self.gamma, p, self.ch, self.pm, 2.0), rel=1e-9)

    def test_interference_gradient_finite_difference(self):
        p0 = np.array([0.5, 0.3, 0.7])
        _, grad = self.surro._interference_logdet_and_grad(p0)
        eps = 1e-7
        for i in range(3):
            dp = np.zeros(3)
            dp[i] = eps
            up, _ = self.surro._interference_logdet_and_grad(p0 + dp)
            dn, _ = self.surro._interference_logdet_and_grad(p0 - dp)
            assert abs((up - dn) / (2 * eps) - grad[i]) < 1e-5

    def test_value_gradient_finite_difference(self):
        p0 = np.array([0.5, 0.3, 0.7])
        _, grad = self.surro.value_and_grad(p0)
        eps = 1e-7
        for i in range(3):
            dp = np.zeros(3)
            dp[i] = eps
            up, _ = self.surro.value_and_grad(p0 + dp)
            dn, _ = self.surro.value_and_grad(p0 - dp)
            assert abs((up - dn) / (2 * eps) - grad[i]) < 1e-5

    def test_facade(self):
        p = np.array([0.5, 0.3, 0.7])
        v1, g1 = power_surrogate_gee_mmse(p, self.pbar, self.gamma, self.ch,
                                          self.pm, 2.0)
        v2, g2 = self.surro.value_and_grad(p)
        assert v1 == pytest.approx(v2) and np.allclose(g1, g2)

    def test_concavity_of_numerator_spot_check(self):
        rng = np.random.default_rng(35)
        for _ in range(100):
            a = rng.uniform(0.0, 1.0, 3)
            b = rng.uniform(0.0, 1.0, 3)
            va, _ = self.surro.numerator_and_grad(a)
            vb, _ = self.surro.numerator_and_grad(b)
            mid, _ = self.surro.numerator_and_grad((a + b) / 2)
            assert mid >= (va + vb) / 2 - 1e-10

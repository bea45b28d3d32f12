"""Tests for the probability kernels and the truncated-normal sampler."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from discretefit import (
    Link,
    logistic_cdf,
    logistic_pdf,
    norm_cdf,
    norm_inv_cdf,
    norm_pdf,
    trunc_norm_draws,
    trunc_norm_sample,
)

from oracles import (
    ks_statistic,
    norm_cdf_float_oracle,
    norm_cdf_oracle,
    norm_log_tail_oracle,
)

# values derived once from the series / asymptotic oracles in oracles.py
PHI_1 = 0.8413447460685429
PHI_NEG_8_3 = 5.205569744890075e-17
Q_975 = 1.9599639845400527
HALF_NORMAL_MEAN = 0.7978845608028654
LOGISTIC_VARIANCE = 3.289868133696453  # pi^2 / 3


class TestNormCdf:
    def test_zero_is_half(self):
        assert norm_cdf(0.0) == 0.5

    def test_matches_series_oracle(self):
        assert norm_cdf(1.0) == pytest.approx(PHI_1, abs=1e-15)
        for w in np.linspace(-6, 6, 121):
            assert norm_cdf(w) == pytest.approx(norm_cdf_oracle(w), abs=1e-14)

    def test_far_left_tail_positive(self):
        value = norm_cdf(-8.3)
        assert 0.0 < value < 1e-15
        assert value == pytest.approx(PHI_NEG_8_3, rel=1e-12)

    def test_symmetry(self):
        for w in np.linspace(-8, 8, 161):
            assert norm_cdf(w) + norm_cdf(-w) == pytest.approx(1.0, abs=1e-15)

    def test_monotone(self):
        grid = np.linspace(-10, 10, 2001)
        values = norm_cdf(grid)
        assert np.all(np.diff(values) >= 0.0)
        # strict openness checked where doubles can represent it; past
        # w ~ 8.3 the upper tail is below machine epsilon and saturates
        inner = norm_cdf(np.linspace(-8, 8, 1601))
        assert np.all((inner > 0.0) & (inner < 1.0))

    @pytest.mark.parametrize("bad", [np.inf, -np.inf, np.nan])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            norm_cdf(bad)


class TestNormPdf:
    def test_peak_value(self):
        assert norm_pdf(0.0) == pytest.approx(0.3989422804014327, abs=1e-16)

    def test_even(self):
        assert norm_pdf(1.0) == norm_pdf(-1.0)
        assert norm_pdf(5.5) == norm_pdf(-5.5)

    def test_underflow_to_zero_is_fine(self):
        assert norm_pdf(40.0) == 0.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            norm_pdf(np.nan)


class TestLogisticKernels:
    def test_cdf_values(self):
        assert logistic_cdf(0.0) == 0.5
        assert logistic_cdf(math.log(3.0)) == pytest.approx(0.75, abs=1e-15)

    def test_cdf_deep_negative_not_zero(self):
        value = logistic_cdf(-40.0)
        expected = math.exp(-40.0) / (1.0 + math.exp(-40.0))
        assert value > 0.0
        assert value == pytest.approx(expected, rel=1e-14)

    def test_cdf_stable_out_to_700(self):
        assert logistic_cdf(700.0) == 1.0
        assert logistic_cdf(-700.0) > 0.0
        assert np.isfinite(logistic_cdf(np.array([-700.0, -1.0, 0.0, 1.0, 700.0]))).all()

    def test_pdf_at_zero(self):
        assert logistic_pdf(0.0) == 0.25

    def test_pdf_even(self):
        assert logistic_pdf(5.0) == logistic_pdf(-5.0)

    def test_pdf_variance_matches_pi_squared_third(self):
        integral, _ = quad(lambda w: w * w * logistic_pdf(w), -50, 50, limit=200)
        assert integral == pytest.approx(LOGISTIC_VARIANCE, abs=1e-6)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            logistic_cdf(np.inf)
        with pytest.raises(ValueError):
            logistic_pdf(np.nan)


class TestNormInvCdf:
    def test_median(self):
        assert norm_inv_cdf(0.5) == 0.0

    def test_inverts_cdf_oracle_value(self):
        assert norm_inv_cdf(PHI_1) == pytest.approx(1.0, abs=1e-12)

    def test_root_found_on_series_oracle(self):
        assert norm_inv_cdf(0.975) == pytest.approx(Q_975, abs=1e-10)

    def test_roundtrip(self):
        for p in np.logspace(-12, -0.301, 40):
            assert norm_cdf(norm_inv_cdf(p)) == pytest.approx(p, rel=1e-10)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.1, np.nan])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            norm_inv_cdf(bad)


class TestLinkProperties:
    @pytest.mark.parametrize("link", [Link.PROBIT, Link.LOGIT])
    def test_cdf_symmetry(self, link):
        fn = norm_cdf if link is Link.PROBIT else logistic_cdf
        for w in np.arange(-5.0, 5.01, 0.1):
            assert fn(w) == pytest.approx(1.0 - fn(-w), abs=1e-14)

    @pytest.mark.parametrize("link", [Link.PROBIT, Link.LOGIT])
    def test_pdf_is_cdf_derivative(self, link):
        # the difference is formed in the lower tail where the cdf values are
        # small and carry small absolute error; near cdf ~ 1 the subtraction
        # itself would drown in cancellation noise (both pdf and cdf are
        # symmetric, so this checks the identity at every grid point)
        cdf = norm_cdf if link is Link.PROBIT else logistic_cdf
        pdf = norm_pdf if link is Link.PROBIT else logistic_pdf
        h = 1e-6
        for w in np.arange(-5.0, 5.01, 0.1):
            v = -abs(w)
            fd = (cdf(v + h) - cdf(v - h)) / (2.0 * h)
            assert pdf(w) == pytest.approx(fd, rel=1e-6)

    def test_link_methods_tolerate_infinities(self):
        for link in (Link.PROBIT, Link.LOGIT):
            assert link.cdf(np.inf) == 1.0
            assert link.cdf(-np.inf) == 0.0
            assert link.pdf(np.inf) == 0.0
            assert link.pdf(-np.inf) == 0.0
            assert link.log_cdf(-np.inf) == -np.inf


class TestTruncNormSample:
    def test_unconstrained_matches_standard_normal(self):
        rng = np.random.default_rng(101)
        draws = trunc_norm_draws(0.0, -np.inf, np.inf, rng, size=100_000)
        assert abs(draws.mean()) < 0.02
        assert abs(draws.std() - 1.0) < 0.02

    def test_half_normal_mean(self):
        rng = np.random.default_rng(102)
        draws = trunc_norm_draws(0.0, 0.0, np.inf, rng, size=100_000)
        assert np.all(draws > 0.0)
        assert draws.mean() == pytest.approx(HALF_NORMAL_MEAN, abs=0.01)

    def test_far_tail_is_robust(self):
        rng = np.random.default_rng(103)
        draws = np.array([trunc_norm_sample(2.0, 10.0, np.inf, rng) for _ in range(2000)])
        assert np.all(np.isfinite(draws))
        assert np.all(draws > 10.0)
        # conditional mean from the log-space tail oracle: 2 + phi(8)/Phi(-8)
        phi8 = math.exp(-32.0) / math.sqrt(2.0 * math.pi)
        expected = 2.0 + phi8 / math.exp(norm_log_tail_oracle(8.0))
        assert draws.mean() == pytest.approx(expected, abs=0.02)

    @pytest.mark.parametrize(
        "mean,lower,upper",
        [(0.0, -np.inf, np.inf), (0.0, 0.0, np.inf), (1.0, -0.5, 2.0), (0.0, -np.inf, -1.0)],
    )
    def test_ks_against_truncated_cdf(self, mean, lower, upper):
        rng = np.random.default_rng(104)
        draws = trunc_norm_draws(mean, lower, upper, rng, size=100_000)
        fa = norm_cdf_float_oracle(lower - mean) if np.isfinite(lower) else 0.0
        fb = norm_cdf_float_oracle(upper - mean) if np.isfinite(upper) else 1.0

        def cdf(x):
            return (norm_cdf_float_oracle(x - mean) - fa) / (fb - fa)

        assert ks_statistic(draws, cdf) < 0.01
        assert np.all(draws > lower) and np.all(draws <= upper)

    def test_deterministic_given_seed(self):
        a = trunc_norm_draws(0.5, 0.0, 3.0, np.random.default_rng(7), size=50)
        b = trunc_norm_draws(0.5, 0.0, 3.0, np.random.default_rng(7), size=50)
        assert np.array_equal(a, b)
        s1 = trunc_norm_sample(0.0, -1.0, 1.0, np.random.default_rng(8))
        s2 = trunc_norm_sample(0.0, -1.0, 1.0, np.random.default_rng(8))
        assert s1 == s2

    def test_empty_interval_rejected(self):
        rng = np.random.default_rng(1)
        with pytest.raises(ValueError):
            trunc_norm_sample(0.0, 1.0, 1.0, rng)
        with pytest.raises(ValueError):
            trunc_norm_sample(0.0, 2.0, -2.0, rng)
        with pytest.raises(ValueError):
            trunc_norm_sample(np.nan, 0.0, 1.0, rng)

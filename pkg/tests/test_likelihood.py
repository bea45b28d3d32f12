"""Tests for cut-point expansion, cell probabilities and analytic derivatives."""

import math

import numpy as np
import pytest

from discretefit import (
    Dataset,
    Link,
    ModelSpec,
    ParamVector,
    cell_logprob,
    cutpoints_from_delta,
    grad_loglik,
    hess_loglik,
    loglik,
    simulate_dataset,
)

from oracles import finite_diff_grad, finite_diff_jac

# from the erf-series oracle
PHI_1 = 0.8413447460685429
LOG_MID_CELL = math.log(PHI_1 - 0.5)          # ln(Phi(1) - Phi(0))
LOG_TOP_CELL = math.log(1.0 - PHI_1)          # ln(1 - Phi(1))


def _random_instance(family, link, J, n, seed, k=3):
    rng = np.random.default_rng(seed)
    spec = ModelSpec(family, link, J=J, k=k, intercept=True)
    beta = np.array([0.4, -0.8, 0.3])[:k]
    cuts = np.linspace(0.9, 1.8, J - 2) if J > 2 else []
    data = simulate_dataset(spec, beta, cuts, n, rng)
    return spec, data


class TestCutpoints:
    def test_J3_unit_spacing(self):
        np.testing.assert_array_equal(
            cutpoints_from_delta([0.0]), [-np.inf, 0.0, 1.0, np.inf]
        )

    def test_J2_empty(self):
        np.testing.assert_array_equal(cutpoints_from_delta([]), [-np.inf, 0.0, np.inf])

    def test_J4_cumulative(self):
        got = cutpoints_from_delta([math.log(2.0), math.log(3.0)])
        np.testing.assert_allclose(got, [-np.inf, 0.0, 2.0, 5.0, np.inf])

    def test_always_increasing(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            gamma = cutpoints_from_delta(rng.normal(scale=3.0, size=4))
            assert np.all(np.diff(gamma) > 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            cutpoints_from_delta([np.nan])


class TestCellLogprob:
    def test_binary_probit_half(self):
        spec = ModelSpec("binary", Link.PROBIT, J=2, k=1)
        gamma = np.array([-np.inf, 0.0, np.inf])
        assert cell_logprob(spec, 0.0, 1, gamma) == pytest.approx(math.log(0.5), abs=1e-15)

    def test_middle_cell_against_cdf_oracle(self):
        spec = ModelSpec("ordinal", Link.PROBIT, J=3, k=1)
        gamma = np.array([-np.inf, 0.0, 1.0, np.inf])
        assert cell_logprob(spec, 0.0, 2, gamma) == pytest.approx(LOG_MID_CELL, rel=1e-12)
        assert cell_logprob(spec, 0.0, 3, gamma) == pytest.approx(LOG_TOP_CELL, rel=1e-12)

    def test_binary_logit_top_cell(self):
        spec = ModelSpec("binary", Link.LOGIT, J=2, k=1)
        gamma = np.array([-np.inf, 0.0, np.inf])
        assert cell_logprob(spec, 0.0, 2, gamma) == pytest.approx(math.log(0.5), abs=1e-15)

    @pytest.mark.parametrize("link", [Link.PROBIT, Link.LOGIT])
    def test_finite_out_to_35(self, link):
        spec = ModelSpec("ordinal", link, J=3, k=1)
        gamma = np.array([-np.inf, 0.0, 1.0, np.inf])
        for xb in (-35.0, -20.0, 20.0, 34.0):
            for j in (1, 2, 3):
                value = cell_logprob(spec, xb, j, gamma)
                assert math.isfinite(value)
                assert value <= 0.0

    def test_deep_tail_clamps_at_floor(self):
        spec = ModelSpec("ordinal", Link.PROBIT, J=3, k=1)
        gamma = np.array([-np.inf, 0.0, 1.0, np.inf])
        value = cell_logprob(spec, -60.0, 3, gamma)
        assert value == -745.0

    @pytest.mark.parametrize("link", [Link.PROBIT, Link.LOGIT])
    def test_cells_sum_to_one(self, link):
        spec = ModelSpec("ordinal", link, J=4, k=1)
        gamma = cutpoints_from_delta([-0.3, 0.9])
        for xb in np.linspace(-8.0, 8.0, 33):
            total = sum(math.exp(cell_logprob(spec, xb, j, gamma)) for j in range(1, 5))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_category_out_of_range(self):
        spec = ModelSpec("binary", Link.PROBIT, J=2, k=1)
        gamma = np.array([-np.inf, 0.0, np.inf])
        with pytest.raises(ValueError):
            cell_logprob(spec, 0.0, 3, gamma)

    def test_location_identification(self):
        # shifting all cut-points and the linear index by the same constant
        # leaves every cell probability unchanged (evaluated directly on a
        # shifted gamma, bypassing the gamma_1 = 0 normalization)
        spec = ModelSpec("ordinal", Link.PROBIT, J=3, k=1)
        gamma = np.array([-np.inf, 0.0, 1.3, np.inf])
        for c in (-2.0, 0.7, 4.2):
            shifted = gamma + c
            for xb in (-1.0, 0.0, 2.5):
                for j in (1, 2, 3):
                    assert cell_logprob(spec, xb, j, gamma) == pytest.approx(
                        cell_logprob(spec, xb + c, j, shifted), rel=1e-12
                    )


class TestLoglik:
    def test_binary_probit_at_zero(self):
        spec = ModelSpec("binary", Link.PROBIT, J=2, k=1, intercept=True)
        data = Dataset(y=[1, 1, 2, 2], X=np.ones((4, 1)), column_names=["intercept"], J=2)
        value = loglik(spec, ParamVector([0.0]), data)
        assert value == pytest.approx(4.0 * math.log(0.5), abs=1e-14)

    def test_one_observation_per_cell(self):
        spec = ModelSpec("ordinal", Link.PROBIT, J=3, k=1, intercept=True)
        data = Dataset(y=[1, 2, 3], X=np.ones((3, 1)), column_names=["intercept"], J=3)
        value = loglik(spec, ParamVector([0.0], [0.0]), data)
        expected = math.log(0.5) + LOG_MID_CELL + LOG_TOP_CELL
        assert value == pytest.approx(expected, rel=1e-12)

    def test_binary_reduction_formula(self):
        # the generic cell likelihood collapses to the familiar
        # (1-y) log F(-xb) + y log F(xb) form for J = 2
        rng = np.random.default_rng(3)
        for link in (Link.PROBIT, Link.LOGIT):
            spec = ModelSpec("binary", link, J=2, k=2, intercept=True)
            data = simulate_dataset(spec, [0.3, -0.6], [], 200, rng)
            params = ParamVector([0.2, -0.4])
            xb = data.X @ params.beta
            y01 = (data.y == 2).astype(float)
            direct = np.sum(
                (1.0 - y01) * np.log(link.cdf(-xb)) + y01 * np.log(link.cdf(xb))
            )
            assert loglik(spec, params, data) == pytest.approx(direct, rel=1e-12)

    def test_permutation_invariance(self):
        spec, data = _random_instance("ordinal", Link.LOGIT, J=3, n=100, seed=10)
        params = ParamVector([0.1, -0.2, 0.3], [0.1])
        base = loglik(spec, params, data)
        perm = np.random.default_rng(0).permutation(data.n)
        shuffled = Dataset(y=data.y[perm], X=data.X[perm], column_names=data.column_names, J=3)
        # equality up to summation-order rounding
        assert loglik(spec, params, shuffled) == pytest.approx(base, rel=1e-12)

    def test_binary_equals_J2_ordinal_exactly(self):
        rng = np.random.default_rng(4)
        spec_b = ModelSpec("binary", Link.PROBIT, J=2, k=2, intercept=True)
        data = simulate_dataset(spec_b, [0.5, -0.5], [], 300, rng)
        spec_o = ModelSpec("ordinal", Link.PROBIT, J=2, k=2, intercept=True)
        params = ParamVector([0.3, -0.3])
        assert loglik(spec_b, params, data) == loglik(spec_o, params, data)

    def test_dimension_mismatch(self):
        spec = ModelSpec("ordinal", Link.PROBIT, J=3, k=2, intercept=True)
        data = Dataset(y=[1, 2, 3], X=np.ones((3, 1)), column_names=["x"], J=3)
        with pytest.raises(ValueError):
            loglik(spec, ParamVector([0.0, 0.0], [0.0]), data)


class TestProportionalOdds:
    def test_cumulative_odds_ratio_constant_over_categories(self):
        spec, data = _random_instance("ordinal", Link.LOGIT, J=4, n=50, seed=11)
        params = ParamVector([0.4, -0.7, 0.2], [-0.2, 0.5])
        gamma = params.cutpoints()
        x1, x2 = data.X[0], data.X[1]
        expected = math.exp(-(x1 - x2) @ params.beta)
        for j in range(1, 4):
            odds = []
            for x in (x1, x2):
                xb = float(x @ params.beta)
                probs = [math.exp(cell_logprob(spec, xb, h, gamma)) for h in range(1, 5)]
                cum = sum(probs[:j])
                odds.append(cum / (1.0 - cum))
            assert odds[0] / odds[1] == pytest.approx(expected, rel=1e-10)


class TestGradient:
    def test_balanced_binary_stationary_at_zero(self):
        spec = ModelSpec("binary", Link.PROBIT, J=2, k=1, intercept=True)
        data = Dataset(y=[1, 2] * 10, X=np.ones((20, 1)), column_names=["intercept"], J=2)
        grad = grad_loglik(spec, ParamVector([0.0]), data)
        np.testing.assert_allclose(grad, 0.0, atol=1e-14)

    @pytest.mark.parametrize("family,J", [("binary", 2), ("ordinal", 3), ("ordinal", 4)])
    @pytest.mark.parametrize("link", [Link.PROBIT, Link.LOGIT])
    def test_matches_finite_differences(self, family, J, link):
        spec, data = _random_instance(family, link, J=J, n=150, seed=17)
        rng = np.random.default_rng(99)
        for _ in range(5):
            theta = np.concatenate([
                rng.uniform(-1.0, 1.0, size=spec.k),
                rng.uniform(-0.5, 0.5, size=J - 2),
            ])
            params = ParamVector(theta[:spec.k], theta[spec.k:])
            analytic = grad_loglik(spec, params, data)

            def f(t):
                return loglik(spec, ParamVector(t[:spec.k], t[spec.k:]), data)

            fd = finite_diff_grad(f, theta, h=1e-5)
            np.testing.assert_allclose(analytic, fd, rtol=1e-6, atol=1e-7)


class TestHessian:
    def test_intercept_only_concave_at_mle(self):
        spec = ModelSpec("binary", Link.PROBIT, J=2, k=1, intercept=True)
        y = np.array([1] * 5 + [2] * 15)
        data = Dataset(y=y, X=np.ones((20, 1)), column_names=["intercept"], J=2)
        from discretefit import norm_inv_cdf
        beta_hat = norm_inv_cdf(0.75)
        H = hess_loglik(spec, ParamVector([beta_hat]), data)
        assert H.shape == (1, 1)
        assert H[0, 0] < 0.0

    @pytest.mark.parametrize("family,J", [("binary", 2), ("ordinal", 3), ("ordinal", 4)])
    @pytest.mark.parametrize("link", [Link.PROBIT, Link.LOGIT])
    def test_matches_fd_jacobian_of_gradient(self, family, J, link):
        spec, data = _random_instance(family, link, J=J, n=120, seed=23)
        rng = np.random.default_rng(55)
        for _ in range(3):
            theta = np.concatenate([
                rng.uniform(-0.8, 0.8, size=spec.k),
                rng.uniform(-0.4, 0.4, size=J - 2),
            ])
            params = ParamVector(theta[:spec.k], theta[spec.k:])
            H = hess_loglik(spec, params, data)

            def g(t):
                return grad_loglik(spec, ParamVector(t[:spec.k], t[spec.k:]), data)

            fd = finite_diff_jac(g, theta, h=1e-5)
            np.testing.assert_allclose(H, fd, rtol=1e-4, atol=1e-5)

    def test_exactly_symmetric(self):
        spec, data = _random_instance("ordinal", Link.LOGIT, J=4, n=100, seed=27)
        params = ParamVector([0.2, -0.2, 0.4], [0.0, 0.3])
        H = hess_loglik(spec, params, data)
        np.testing.assert_array_equal(H, H.T)


class TestModelSpecValidation:
    def test_binary_requires_two_categories(self):
        with pytest.raises(ValueError):
            ModelSpec("binary", Link.PROBIT, J=3, k=1)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            ModelSpec("multinomial", Link.PROBIT, J=3, k=1)

    def test_ordinal_accepts_J2(self):
        spec = ModelSpec("ordinal", Link.PROBIT, J=2, k=1)
        assert spec.n_params == 1

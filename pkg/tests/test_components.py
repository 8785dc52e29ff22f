import math

import numpy as np
import pytest
import scipy.stats
from scipy.integrate import quad

from prefinfer.components import (
    ComponentFamily,
    ComponentParams,
    cdf,
    central_moment,
    from_unconstrained,
    log_prior,
    mean,
    pdf,
    sample,
    sf,
    to_unconstrained,
)
from prefinfer.errors import UnsupportedMomentError

ALL_FAMILIES = [ComponentFamily.NORMAL, ComponentFamily.LAPLACE, ComponentFamily.UNIFORM]


def random_params(family, rng):
    a = rng.uniform(-3.0, 3.0)
    b = rng.uniform(0.3, 2.5)
    return ComponentParams(family, a, b)


class TestValidation:
    def test_scale_must_be_positive_for_normal_and_laplace(self):
        for family in (ComponentFamily.NORMAL, ComponentFamily.LAPLACE):
            with pytest.raises(ValueError):
                ComponentParams(family, 0.0, 0.0)
            with pytest.raises(ValueError):
                ComponentParams(family, 0.0, -1.0)

    def test_uniform_width_may_be_nonpositive_at_construction(self):
        params = ComponentParams(ComponentFamily.UNIFORM, 0.0, -1.0)
        assert params.b == -1.0
        with pytest.raises(ValueError):
            cdf(params, 0.5)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ComponentParams(ComponentFamily.NORMAL, float("nan"), 1.0)
        with pytest.raises(ValueError):
            ComponentParams(ComponentFamily.NORMAL, 0.0, float("inf"))


class TestCdf:
    def test_standard_normal_midpoint(self):
        assert cdf(ComponentParams(ComponentFamily.NORMAL, 0.0, 1.0), 0.0) == pytest.approx(0.5)

    def test_uniform_linear(self):
        assert cdf(ComponentParams(ComponentFamily.UNIFORM, 0.0, 2.0), 0.5) == pytest.approx(0.25)

    def test_laplace_closed_form(self):
        # frozen from numerical integration of the density (abs err < 1e-12)
        value = cdf(ComponentParams(ComponentFamily.LAPLACE, 0.0, 1.0), 1.0)
        assert value == pytest.approx(0.8160602794142788, abs=1e-12)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_matches_integrated_density(self, family):
        rng = np.random.default_rng(101)
        for _ in range(20):
            params = random_params(family, rng)
            x = params.a + params.b * rng.uniform(-3.0, 3.0)
            lo = params.a - 50.0 * params.b
            anchors = [p for p in (params.a, params.a + params.b) if lo < p < x]
            est, err = quad(lambda t: pdf(params, t), lo, x,
                            points=anchors or None, limit=300, epsabs=1e-13)
            assert abs(cdf(params, x) - est) < 1e-9

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_monotone_and_complementary(self, family):
        rng = np.random.default_rng(7)
        params = random_params(family, rng)
        xs = np.linspace(params.a - 4 * params.b, params.a + 4 * params.b, 200)
        values = cdf(params, xs)
        assert np.all(np.diff(values) >= 0)
        assert np.allclose(values + sf(params, xs), 1.0, atol=1e-12)


class TestMoments:
    def test_means(self):
        assert mean(ComponentParams(ComponentFamily.NORMAL, 2.0, 1.0)) == 2.0
        assert mean(ComponentParams(ComponentFamily.UNIFORM, 0.0, 2.0)) == 1.0
        assert mean(ComponentParams(ComponentFamily.LAPLACE, -3.0, 5.0)) == -3.0

    def test_trivial_orders(self):
        params = ComponentParams(ComponentFamily.LAPLACE, 1.5, 2.0)
        assert central_moment(params, 0) == 1.0
        assert central_moment(params, 1) == 0.0
        assert central_moment(params, 3) == 0.0

    def test_known_values(self):
        assert central_moment(ComponentParams(ComponentFamily.NORMAL, 0.0, 2.0), 4) == pytest.approx(48.0)
        assert central_moment(ComponentParams(ComponentFamily.LAPLACE, 0.0, 1.0), 2) == pytest.approx(2.0)
        assert central_moment(ComponentParams(ComponentFamily.UNIFORM, 0.0, 2.0), 2) == pytest.approx(4.0 / 12.0)
        assert central_moment(ComponentParams(ComponentFamily.UNIFORM, 0.0, 2.0), 4) == pytest.approx(16.0 / 80.0)

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedMomentError):
            central_moment(ComponentParams(ComponentFamily.NORMAL, 0.0, 1.0), 5)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    @pytest.mark.parametrize("z", [2, 4])
    def test_against_monte_carlo_oracle(self, family, z):
        rng = np.random.default_rng(2024)
        params = random_params(family, rng)
        draws = sample(params, rng, size=10_000_000)
        centered = (draws - mean(params)) ** z
        estimate = centered.mean()
        stderr = centered.std() / math.sqrt(centered.size)
        assert abs(central_moment(params, z) - estimate) < 3.0 * stderr


class TestLogPrior:
    def test_normal_family_matches_scipy_densities(self):
        # N(0, var 100) on a plus InverseGamma(1, 1) on b
        for a, b in [(0.0, 1.0), (3.0, 0.5), (-12.0, 4.0)]:
            expected = scipy.stats.norm.logpdf(a, 0.0, 10.0) + scipy.stats.invgamma.logpdf(b, 1.0, scale=1.0)
            got = log_prior(ComponentParams(ComponentFamily.NORMAL, a, b))
            assert got == pytest.approx(expected, abs=1e-12)

    def test_value_at_unit_scale(self):
        # log N(0; 0, 100) = -3.221523626...,  log InvGamma(1; 1, 1) = -1
        got = log_prior(ComponentParams(ComponentFamily.NORMAL, 0.0, 1.0))
        assert got == pytest.approx(-4.221523626198319, abs=1e-9)

    def test_laplace_shares_normal_priors(self):
        a, b = 1.3, 0.7
        assert log_prior(ComponentParams(ComponentFamily.LAPLACE, a, b)) == pytest.approx(
            log_prior(ComponentParams(ComponentFamily.NORMAL, a, b))
        )

    def test_uniform_truncation(self):
        assert log_prior(ComponentParams(ComponentFamily.UNIFORM, 0.0, -1.0)) == float("-inf")
        expected = 2 * scipy.stats.norm.logpdf(0.5, 0.0, 10.0)
        got = log_prior(ComponentParams(ComponentFamily.UNIFORM, 0.5, 0.5))
        assert got == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("family", [ComponentFamily.NORMAL, ComponentFamily.LAPLACE])
    def test_diverges_as_scale_vanishes(self, family):
        values = [log_prior(ComponentParams(family, 0.0, b)) for b in (1e-1, 1e-3, 1e-6, 1e-9)]
        assert all(hi > lo for hi, lo in zip(values, values[1:]))
        assert values[-1] < -1e8


class TestSample:
    def test_uniform_support(self):
        params = ComponentParams(ComponentFamily.UNIFORM, 0.0, 1.0)
        draws = sample(params, np.random.default_rng(0), size=10_000)
        assert draws.min() >= 0.0 and draws.max() <= 1.0

    def test_normal_mean_concentration(self):
        draws = sample(ComponentParams(ComponentFamily.NORMAL, 0.0, 1.0),
                       np.random.default_rng(1), size=100_000)
        assert abs(draws.mean()) < 0.02  # 3 sigma / sqrt(n) bound, sigma = 1

    def test_deterministic_given_seed(self):
        params = ComponentParams(ComponentFamily.LAPLACE, 0.0, 1.0)
        first = sample(params, np.random.default_rng(42), size=100)
        second = sample(params, np.random.default_rng(42), size=100)
        assert np.array_equal(first, second)

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_draws_match_cdf(self, family):
        params = random_params(family, np.random.default_rng(33))
        draws = sample(params, np.random.default_rng(34), size=100_000)
        stat = scipy.stats.kstest(draws, lambda x: cdf(params, x)).statistic
        assert stat < 0.01


class TestUnconstrained:
    def test_log_scale_examples(self):
        params, jac = from_unconstrained(ComponentFamily.NORMAL, np.array([0.5, 0.0]))
        assert params.b == pytest.approx(1.0) and jac == pytest.approx(0.0)
        params, jac = from_unconstrained(ComponentFamily.LAPLACE, np.array([0.0, 1.0]))
        assert params.b == pytest.approx(math.e) and jac == pytest.approx(1.0)

    def test_uniform_identity(self):
        vec = to_unconstrained(ComponentParams(ComponentFamily.UNIFORM, -1.0, 2.0))
        assert np.allclose(vec, [-1.0, 2.0])
        params, jac = from_unconstrained(ComponentFamily.UNIFORM, vec)
        assert jac == 0.0 and params.b == 2.0

    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_round_trip(self, family):
        rng = np.random.default_rng(55)
        for _ in range(50):
            params = random_params(family, rng)
            back, _ = from_unconstrained(family, to_unconstrained(params))
            assert back.a == pytest.approx(params.a, abs=1e-12)
            assert back.b == pytest.approx(params.b, abs=1e-12)

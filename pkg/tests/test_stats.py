"""Box-Cox transform, differencing and correlation functions."""

import numpy as np
import pytest
from scipy import stats as sps

from busyhour.stats import (
    TransformParams,
    acf,
    boxcox_apply,
    boxcox_fit,
    boxcox_invert,
    difference,
    pacf,
    undifference,
)


class TestBoxCoxFit:
    def test_lognormal_data_gives_lambda_near_zero(self):
        rng = np.random.default_rng(42)
        x = np.exp(rng.normal(0, 1, size=5000))
        params = boxcox_fit(x)
        assert -0.1 <= params.lam <= 0.1
        assert params.shift == 0.0

    def test_gaussian_data_gives_lambda_near_one(self):
        rng = np.random.default_rng(42)
        x = rng.normal(100, 1, size=5000)
        params = boxcox_fit(x)
        assert 0.5 <= params.lam <= 1.5

    def test_agrees_with_scipy_profile_likelihood(self):
        # independent oracle: scipy's boxcox log-likelihood over the same grid
        rng = np.random.default_rng(7)
        x = rng.gamma(2.0, 3.0, size=2000)
        params = boxcox_fit(x)
        grid = np.arange(-100, 201) / 100.0
        llf = np.array([sps.boxcox_llf(lam, x) for lam in grid])
        assert params.lam == pytest.approx(grid[int(np.argmax(llf))], abs=1e-12)

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            boxcox_fit(np.full(100, 3.0))

    def test_nonpositive_with_zero_shift_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            boxcox_fit(np.array([-1.0, 2.0, 3.0]), shift=0.0)

    def test_auto_shift_for_zero_values(self):
        x = np.concatenate([[0.0], np.arange(1.0, 50.0)])
        params = boxcox_fit(x)
        assert params.shift == 1.0


class TestBoxCoxApplyInvert:
    def test_identity_branch(self):
        params = TransformParams(lam=1.0)
        assert boxcox_apply(5.0, params) == pytest.approx(4.0)

    def test_log_branch(self):
        params = TransformParams(lam=0.0)
        assert boxcox_apply(np.e, params) == pytest.approx(1.0)

    def test_round_trip_sqrt_branch(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0.01, 1000.0, size=1000)
        params = TransformParams(lam=0.5)
        back = boxcox_invert(boxcox_apply(x, params), params)
        assert np.max(np.abs(back - x)) <= 1e-9

    def test_monotonicity(self):
        rng = np.random.default_rng(1)
        for lam in (-1.0, -0.3, 0.0, 0.4, 1.0, 2.0):
            params = TransformParams(lam=lam, shift=0.5)
            x = np.sort(rng.uniform(0.0, 100.0, size=200))
            y = boxcox_apply(x, params)
            assert np.all(np.diff(y) > 0)

    def test_invert_domain_violation(self):
        params = TransformParams(lam=0.5)
        with pytest.raises(ValueError, match="range"):
            boxcox_invert(np.array([-3.0]), params)


class TestDifferencing:
    def test_arithmetic_sequence(self):
        x = 2.0 + 3.0 * np.arange(20)
        np.testing.assert_allclose(difference(x, 1), 3.0)

    def test_periodic_annihilation(self):
        x = np.tile([1.0, 5.0, 2.0, 4.0, 3.0, 7.0, 6.0], 6)
        np.testing.assert_array_equal(difference(x, 7), 0.0)

    def test_inverse_pair(self):
        rng = np.random.default_rng(3)
        for lag in (1, 2, 7, 11):
            x = rng.normal(size=100)
            d = difference(x, lag)
            back = undifference(d, x[:lag], lag)
            # a + (b - a) can round; integer-valued series below checks exactness
            np.testing.assert_allclose(back, x, rtol=1e-12, atol=1e-12)

    def test_inverse_pair_exact_on_integers(self):
        rng = np.random.default_rng(4)
        x = rng.integers(0, 1000, size=80).astype(float)
        for lag in (1, 7):
            back = undifference(difference(x, lag), x[:lag], lag)
            np.testing.assert_array_equal(back, x)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="too short"):
            difference(np.ones(5), 7)


class TestCorrelation:
    def test_acf_lag_zero(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=200)
        assert acf(x, 10)[0] == 1.0

    def test_ar1_simulation(self):
        # simulation oracle: AR(1) with phi=0.8 has acf[1] near 0.8
        rng = np.random.default_rng(8)
        n = 10000
        x = np.empty(n)
        x[0] = 0.0
        eps = rng.normal(size=n)
        for t in range(1, n):
            x[t] = 0.8 * x[t - 1] + eps[t]
        r = acf(x, 5)
        assert 0.75 <= r[1] <= 0.85

    def test_pacf_cutoff_for_ar2(self):
        rng = np.random.default_rng(9)
        n = 10000
        x = np.zeros(n)
        eps = rng.normal(size=n)
        for t in range(2, n):
            x[t] = 0.5 * x[t - 1] + 0.3 * x[t - 2] + eps[t]
        phi = pacf(x, 10)
        bound = 2.0 / np.sqrt(n)
        assert np.all(np.abs(phi[3:]) <= bound)

    def test_pacf_base_case_equals_acf(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=500)
        assert pacf(x, 5)[1] == acf(x, 5)[1]

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError, match="zero-variance"):
            acf(np.full(50, 2.0), 5)

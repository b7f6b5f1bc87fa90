"""Seasonal ARIMA estimation, forecasting, information criterion and order rules."""

import numpy as np
import pytest

from busyhour.arima import (
    SarimaModel,
    SarimaOrder,
    aicc,
    diff_polynomial,
    expand_ar,
    expand_ma,
    fit_sarima,
    forecast_sarima,
    reseed,
    suggest_order,
)
from busyhour.stats import undifference


def simulate_expanded_ar(ar_coefs, sigma, n, rng, burn=200):
    """Direct recursion oracle for a pure-AR expanded model."""
    a = np.asarray(ar_coefs)
    w = np.zeros(n + burn)
    eps = rng.normal(0, sigma, size=n + burn)
    for t in range(n + burn):
        acc = eps[t]
        for i in range(1, a.size + 1):
            if t - i >= 0:
                acc += a[i - 1] * w[t - i]
        w[t] = acc
    return w[burn:]


def simulate_sarima_110_110_7(phi, Phi, sigma, n, rng):
    """Simulate the stationary part, then integrate at lags 7 and 1."""
    a = expand_ar(np.array([phi]), np.array([Phi]), 7)
    w = simulate_expanded_ar(a, sigma, n, rng)
    x7 = undifference(w, np.zeros(7), 7)
    return undifference(x7, np.array([10.0]), 1)


class TestPolynomials:
    def test_expand_ar_cross_term(self):
        a = expand_ar(np.array([0.5]), np.array([0.3]), 7)
        expected = np.zeros(8)
        expected[0] = 0.5
        expected[6] = 0.3
        expected[7] = -0.15
        np.testing.assert_allclose(a, expected)

    def test_expand_ma_cross_term(self):
        b = expand_ma(np.array([0.4]), np.array([0.2]), 7)
        expected = np.zeros(8)
        expected[0] = 0.4
        expected[6] = 0.2
        expected[7] = 0.08
        np.testing.assert_allclose(b, expected)

    def test_diff_polynomial_double(self):
        c = diff_polynomial(1, 1, 7)
        expected = np.zeros(9)
        expected[0] = 1.0
        expected[1] = -1.0
        expected[7] = -1.0
        expected[8] = 1.0
        np.testing.assert_allclose(c, expected)


class TestFitSarima:
    def test_recovers_planted_coefficients(self):
        # simulate-then-recover oracle over 50 seeds
        order = SarimaOrder(1, 1, 0, 1, 1, 0, 7)
        phis, Phis = [], []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            x = simulate_sarima_110_110_7(0.5, 0.3, 0.1, 364, rng)
            model = fit_sarima(x, order)
            phis.append(model.ar[0])
            Phis.append(model.sar[0])
        assert np.mean(np.abs(np.array(phis) - 0.5)) <= 0.1
        assert np.mean(np.abs(np.array(Phis) - 0.3)) <= 0.1

    def test_white_noise_gives_null_coefficients(self):
        rng = np.random.default_rng(123)
        w = rng.normal(size=2000)
        model = fit_sarima(w, SarimaOrder(p=1, P=1, S=7))
        assert abs(model.ar[0]) <= 0.1
        assert abs(model.sar[0]) <= 0.1

    def test_insufficient_data(self):
        with pytest.raises(ValueError, match="insufficient data"):
            fit_sarima(np.arange(15.0), SarimaOrder(1, 1, 0, 1, 1, 0, 7))

    def test_residuals_match_recursion_oracle(self):
        # difference-equation consistency: recompute innovations from coefficients
        rng = np.random.default_rng(4)
        x = simulate_sarima_110_110_7(0.4, 0.2, 0.2, 200, rng)
        order = SarimaOrder(1, 1, 0, 1, 1, 0, 7)
        model = fit_sarima(x, order)
        w = np.diff(x)
        w = w[7:] - w[:-7]
        a = expand_ar(model.ar, model.sar, 7)
        eps = np.zeros(w.size)
        for t in range(a.size, w.size):
            eps[t] = w[t] - sum(a[i - 1] * w[t - i] for i in range(1, a.size + 1))
        n_used = w.size - a.size
        sigma2_oracle = float(np.dot(eps[a.size :], eps[a.size :])) / n_used
        assert model.sigma2 == pytest.approx(sigma2_oracle, rel=1e-9)


class TestForecastSarima:
    def make_null_model(self, history):
        order = SarimaOrder(1, 1, 0, 1, 1, 0, 7)
        tail = np.asarray(history, dtype=float)[-(order.ar_span + order.diff_span) :]
        return SarimaModel(
            order=order, ar=[0.0], ma=[], sar=[0.0], sma=[], sigma2=1.0,
            history_tail=tail, resid_tail=np.zeros(0),
        )

    def test_two_identical_weeks_repeat(self):
        model = self.make_null_model(np.array([1, 2, 3, 4, 5, 6, 7] * 2, dtype=float))
        np.testing.assert_allclose(forecast_sarima(model, 7), [1, 2, 3, 4, 5, 6, 7])

    def test_drift_continuation(self):
        c = 0.37
        t = np.arange(28)
        x = np.tile([3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0], 4) + c * t
        model = self.make_null_model(x)
        f = forecast_sarima(model, 21)
        full = np.concatenate([x, f])
        np.testing.assert_allclose(full[7:] - full[:-7], 7 * c, atol=1e-9)

    def test_one_step_forecast_matches_recursion_oracle(self):
        rng = np.random.default_rng(17)
        x = simulate_sarima_110_110_7(0.5, 0.3, 0.15, 250, rng)
        order = SarimaOrder(1, 1, 0, 1, 1, 0, 7)
        model = fit_sarima(x, order)
        # oracle: the same difference equation evaluated by hand, one step
        w = np.diff(x)
        w = w[7:] - w[:-7]
        a = expand_ar(model.ar, model.sar, 7)
        w_next = sum(a[i - 1] * w[-i] for i in range(1, a.size + 1))
        x_next = w_next + x[-1] + x[-7] - x[-8]
        assert forecast_sarima(model, 1)[0] == pytest.approx(x_next, abs=1e-9)

    def test_determinism(self):
        rng = np.random.default_rng(21)
        x = simulate_sarima_110_110_7(0.5, 0.3, 0.1, 120, rng)
        model = fit_sarima(x, SarimaOrder(1, 1, 0, 1, 1, 0, 7))
        np.testing.assert_array_equal(forecast_sarima(model, 30), forecast_sarima(model, 30))

    def test_reseed_extends_history(self):
        rng = np.random.default_rng(30)
        x = simulate_sarima_110_110_7(0.5, 0.3, 0.1, 150, rng)
        model = fit_sarima(x, SarimaOrder(1, 1, 0, 1, 1, 0, 7))
        # feeding the model its own forecasts reproduces the direct pass
        direct = forecast_sarima(model, 14)
        first = forecast_sarima(model, 7)
        extended = reseed(model, np.concatenate([x, first]))
        second = forecast_sarima(extended, 7)
        np.testing.assert_allclose(np.concatenate([first, second]), direct, atol=1e-9)


class TestAicc:
    def test_true_order_beats_overfit_on_ar1(self):
        wins = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            w = simulate_expanded_ar(np.array([0.6]), 1.0, 500, rng)
            m1 = fit_sarima(w, SarimaOrder(p=1))
            m3 = fit_sarima(w, SarimaOrder(p=3, q=2))
            if aicc(m1, w) < aicc(m3, w):
                wins += 1
        assert wins >= 45

    def test_nested_model_css_never_worse(self):
        from busyhour._kernels import css_residuals

        rng = np.random.default_rng(9)
        w = simulate_expanded_ar(np.array([0.5]), 1.0, 300, rng)
        m1 = fit_sarima(w, SarimaOrder(p=1))
        m2 = fit_sarima(w, SarimaOrder(p=2))
        # compare the conditional sums of squares over the common range t >= 2
        e1 = css_residuals(w, expand_ar(m1.ar, m1.sar, 1), np.zeros(0))
        e2 = css_residuals(w, expand_ar(m2.ar, m2.sar, 1), np.zeros(0))
        css1 = float(np.dot(e1[2:], e1[2:]))
        css2 = float(np.dot(e2[2:], e2[2:]))
        assert css2 <= css1 * (1 + 1e-6)

    def test_identical_models_identical_aicc(self):
        rng = np.random.default_rng(10)
        w = simulate_expanded_ar(np.array([0.5]), 1.0, 300, rng)
        m = fit_sarima(w, SarimaOrder(p=1))
        assert aicc(m, w) == aicc(m, w)


class TestSuggestOrder:
    def test_busy_hour_like_series(self):
        rng = np.random.default_rng(6)
        t = np.arange(364)
        x = 10 + 0.02 * t + np.tile([1.0, 0.2, 0.1, 0.3, 0.8, 2.0, 1.5], 52) + rng.normal(0, 0.3, 364)
        order, diag = suggest_order(x, 7)
        assert (order.p, order.d, order.q) == (1, 1, 0)
        assert (order.P, order.D, order.Q) == (1, 1, 0)

    def test_white_noise(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=400)
        order, _ = suggest_order(x, 7)
        assert (order.p, order.d, order.q, order.P, order.D, order.Q) == (0, 0, 0, 0, 0, 0)

    def test_pure_ma1(self):
        rng = np.random.default_rng(14)
        eps = rng.normal(size=3001)
        x = eps[1:] + 0.6 * eps[:-1]
        order, _ = suggest_order(x, 7)
        assert order.q == 1
        assert order.p == 0


class TestSerialization:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(31)
        x = simulate_sarima_110_110_7(0.5, 0.3, 0.1, 120, rng)
        model = fit_sarima(x, SarimaOrder(1, 1, 0, 1, 1, 0, 7))
        back = SarimaModel.from_dict(model.to_dict())
        assert back.order == model.order
        np.testing.assert_array_equal(back.ar, model.ar)
        np.testing.assert_array_equal(back.sar, model.sar)
        np.testing.assert_array_equal(back.history_tail, model.history_tail)
        np.testing.assert_array_equal(forecast_sarima(back, 30), forecast_sarima(model, 30))

    def test_json_round_trip_through_text(self):
        import json

        rng = np.random.default_rng(32)
        x = simulate_sarima_110_110_7(0.2, 0.4, 0.2, 120, rng)
        model = fit_sarima(x, SarimaOrder(1, 1, 0, 1, 1, 0, 7))
        back = SarimaModel.from_dict(json.loads(json.dumps(model.to_dict())))
        np.testing.assert_array_equal(forecast_sarima(back, 10), forecast_sarima(model, 10))


class TestOrderValidation:
    def test_seasonal_terms_need_period(self):
        with pytest.raises(ValueError, match="period"):
            SarimaOrder(P=1, S=1)

    def test_negative_component_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            SarimaOrder(p=-1)

"""Decomposition forecaster: naive seasonal repetition plus an ARIMA on the Loess trend."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arima import FitError, SarimaModel, SarimaOrder, aicc, fit_sarima, forecast_sarima
from .decompose import naive_decompose, seasonal_profile, stl_decompose

#: order grid searched for the trend model
TREND_P_RANGE = range(0, 4)
TREND_D_RANGE = range(0, 3)
TREND_Q_RANGE = range(0, 4)


@dataclass(frozen=True)
class AdModel:
    """Fitted state: periodic seasonal profile and a trend ARIMA.

    ``phase`` is the phase (index modulo period) of the first forecast
    step, i.e. of the sample right after the training series.  The trend
    model is fitted on the demeaned Loess trend when its differencing
    order is zero; ``trend_mean`` undoes that on the way out.
    """

    period: int
    seasonal: np.ndarray
    phase: int
    trend_model: SarimaModel
    trend_mean: float
    n_train: int


def _fit_trend_arima(trend: np.ndarray) -> tuple[SarimaModel, float]:
    """Grid-search (p, d, q) by corrected AIC; ties prefer fewer parameters."""
    best: tuple | None = None
    for d in TREND_D_RANGE:
        for p in TREND_P_RANGE:
            for q in TREND_Q_RANGE:
                order = SarimaOrder(p=p, d=d, q=q)
                mean = float(trend.mean()) if d == 0 else 0.0
                y = trend - mean
                try:
                    model = fit_sarima(y, order)
                except (ValueError, FitError):
                    continue
                score = aicc(model, y)
                key = (score, p + q, d, p, q)
                if best is None or key < best[0]:
                    best = (key, model, mean)
    if best is None:
        raise FitError("no trend ARIMA order could be fitted on this series")
    return best[1], best[2]


def fit_ad(series: np.ndarray, period: int = 7) -> AdModel:
    """Fit the additive forecaster on a training series.

    The seasonal future is the naive decomposition's periodic profile;
    the trend future comes from an automatically ordered non-seasonal
    ARIMA fitted on the Loess-smoothed trend.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size < 4 * period:
        raise ValueError(f"need at least {4 * period} samples to fit, got {x.size}")
    naive = naive_decompose(x, period)
    profile = seasonal_profile(naive)
    stl = stl_decompose(x, period)
    trend_model, trend_mean = _fit_trend_arima(np.asarray(stl.trend))
    return AdModel(
        period=period,
        seasonal=profile,
        phase=x.size % period,
        trend_model=trend_model,
        trend_mean=trend_mean,
        n_train=x.size,
    )


def forecast_ad(model: AdModel, horizon: int) -> np.ndarray:
    """Seasonal profile repeated over the horizon plus the trend forecast."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    idx = (model.phase + np.arange(horizon)) % model.period
    seasonal = model.seasonal[idx]
    trend = forecast_sarima(model.trend_model, horizon) + model.trend_mean
    return seasonal + trend

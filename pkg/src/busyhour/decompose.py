"""Additive seasonal-trend decomposition: naive moving-average and Loess-based."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DecompositionResult:
    """Additive split series = seasonal + trend + residual.

    Positions where a component is undefined (the moving-average edges of
    the naive method) hold NaN in both trend and residual.
    """

    seasonal: np.ndarray
    trend: np.ndarray
    residual: np.ndarray
    period: int

    @property
    def defined(self) -> np.ndarray:
        """Boolean mask of indices where all three components exist."""
        return ~(np.isnan(self.seasonal) | np.isnan(self.trend) | np.isnan(self.residual))


def _tricube(u: np.ndarray) -> np.ndarray:
    w = np.clip(1.0 - np.abs(u) ** 3, 0.0, None)
    return w**3


def loess_smooth(
    y: np.ndarray,
    window: int,
    degree: int = 1,
    eval_x: np.ndarray | None = None,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Locally weighted regression of y over positions 0..n-1.

    ``window`` is the number of nearest points entering each local fit
    (q in the usual Loess notation); when it exceeds the series length
    the neighbourhood radius is inflated by q/n.  ``eval_x`` may include
    positions outside the data range, in which case the boundary fit is
    extrapolated.  ``weights`` are optional robustness multipliers.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if n == 0:
        raise ValueError("cannot smooth an empty series")
    if window < 2:
        raise ValueError("loess window must cover at least two points")
    if degree not in (0, 1):
        raise ValueError("only local degrees 0 and 1 are supported")
    x = np.arange(n, dtype=np.float64)
    if eval_x is None:
        eval_x = x
    else:
        eval_x = np.asarray(eval_x, dtype=np.float64)
    rho = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)

    q = min(window, n)
    out = np.empty(eval_x.size)
    for j, x0 in enumerate(eval_x):
        d = np.abs(x - x0)
        radius = np.partition(d, q - 1)[q - 1]
        if window > n:
            radius *= window / n
        if radius <= 0:
            radius = 1.0
        w = _tricube(d / radius) * rho
        sw = w.sum()
        if sw <= 0:
            raise ValueError("degenerate loess window: all weights vanished")
        if degree == 0:
            out[j] = float(np.dot(w, y) / sw)
            continue
        # weighted straight-line fit, evaluated at x0
        xm = float(np.dot(w, x) / sw)
        ym = float(np.dot(w, y) / sw)
        dxc = x - xm
        sxx = float(np.dot(w, dxc * dxc))
        if sxx <= 0:
            out[j] = ym
        else:
            slope = float(np.dot(w, dxc * (y - ym))) / sxx
            out[j] = ym + slope * (x0 - xm)
    return out


def _centered_ma(x: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with NaN edges; even windows use split end weights."""
    n = x.size
    if window % 2 == 1:
        kernel = np.full(window, 1.0 / window)
        half = window // 2
    else:
        kernel = np.full(window + 1, 1.0 / window)
        kernel[0] = kernel[-1] = 0.5 / window
        half = window // 2
    out = np.full(n, np.nan)
    if n >= kernel.size:
        out[half : n - half] = np.convolve(x, kernel, mode="valid")
    return out


def _moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Plain trailing moving average, output length n - window + 1."""
    c = np.cumsum(np.concatenate([[0.0], x]))
    return (c[window:] - c[:-window]) / window


def naive_decompose(series: np.ndarray, period: int) -> DecompositionResult:
    """Classical moving-average decomposition with a periodic seasonal component.

    The trend is a centered moving average of width ``period``; the
    seasonal term is the mean detrended value per phase, re-centered to
    zero mean; trend and residual are NaN in the first and last
    floor(period/2) positions.
    """
    x = np.asarray(series, dtype=np.float64)
    if period < 2:
        raise ValueError("period must be at least 2")
    if x.size < 2 * period:
        raise ValueError(f"need at least {2 * period} points to decompose at period {period}")
    trend = _centered_ma(x, period)
    detrended = x - trend
    profile = np.empty(period)
    for p in range(period):
        vals = detrended[p::period]
        vals = vals[~np.isnan(vals)]
        if vals.size == 0:
            raise ValueError("period too long: a phase has no defined detrended values")
        profile[p] = vals.mean()
    profile -= profile.mean()
    n = x.size
    seasonal = np.tile(profile, n // period + 1)[:n]
    residual = x - trend - seasonal
    return DecompositionResult(seasonal=seasonal, trend=trend, residual=residual, period=period)


def seasonal_profile(result: DecompositionResult) -> np.ndarray:
    """Per-phase seasonal values of a periodic decomposition (phase 0 = index 0)."""
    return np.asarray(result.seasonal[: result.period]).copy()


def _default_trend_window(period: int, seasonal_window: int) -> int:
    w = int(np.ceil(1.5 * period / (1.0 - 1.5 / seasonal_window)))
    return w + 1 if w % 2 == 0 else w


def stl_decompose(
    series: np.ndarray,
    period: int,
    seasonal_window: int = 11,
    trend_window: int | None = None,
    lowpass_window: int | None = None,
    inner_loops: int = 2,
    outer_loops: int = 0,
    degree: int = 1,
) -> DecompositionResult:
    """Seasonal-trend decomposition by iterated Loess smoothing.

    Each inner pass smooths the detrended cycle-subseries (window
    ``seasonal_window`` measured in cycles, extended one period at both
    ends), removes the low-pass filtered remainder of that seasonal
    estimate, and re-smooths the deseasonalised series for the trend.
    ``outer_loops > 0`` adds bisquare robustness reweighting.  All
    components are defined everywhere and reconstruct the input exactly.
    """
    y = np.asarray(series, dtype=np.float64)
    n = y.size
    if period < 2:
        raise ValueError("period must be at least 2")
    if n < 2 * period:
        raise ValueError(f"need at least {2 * period} points to decompose at period {period}")
    if trend_window is None:
        trend_window = _default_trend_window(period, seasonal_window)
    if lowpass_window is None:
        lowpass_window = period + 1 if period % 2 == 0 else period

    rho = np.ones(n)
    trend = np.zeros(n)
    seasonal = np.zeros(n)
    for _outer in range(outer_loops + 1):
        for _inner in range(inner_loops):
            detrended = y - trend
            extended = np.empty(n + 2 * period)
            for phase in range(period):
                sub = detrended[phase::period]
                sub_rho = rho[phase::period]
                m = sub.size
                smoothed = loess_smooth(
                    sub,
                    seasonal_window,
                    degree=degree,
                    eval_x=np.arange(-1, m + 1, dtype=np.float64),
                    weights=sub_rho,
                )
                extended[phase :: period][: m + 2] = smoothed
            # low-pass: two period-averages, a 3-average, then a loess polish
            low = _moving_average(extended, period)
            low = _moving_average(low, period)
            low = _moving_average(low, 3)
            low = loess_smooth(low, lowpass_window, degree=degree)
            seasonal = extended[period : period + n] - low
            trend = loess_smooth(y - seasonal, trend_window, degree=degree, weights=rho)
        residual = y - seasonal - trend
        if _outer < outer_loops:
            scale = 6.0 * float(np.median(np.abs(residual)))
            if scale <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
                rho = np.ones(n)  # near-perfect fit: nothing to downweight
            else:
                u = np.clip(np.abs(residual) / scale, 0.0, 1.0)
                # small floor keeps every loess window solvable
                rho = np.maximum((1.0 - u**2) ** 2, 1e-12)
    return DecompositionResult(seasonal=seasonal, trend=trend, residual=residual, period=period)

"""Scalar time-series primitives: Box-Cox transform, differencing, ACF/PACF."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: lambda search grid for :func:`boxcox_fit`: -1.00 .. 2.00 in steps of 0.01
LAMBDA_GRID = np.arange(-100, 201) / 100.0


@dataclass(frozen=True)
class TransformParams:
    """Box-Cox power parameter plus the shift applied before transforming."""

    lam: float
    shift: float = 0.0


def _shifted(x: np.ndarray, shift: float) -> np.ndarray:
    y = np.asarray(x, dtype=np.float64) + shift
    if np.any(y <= 0):
        raise ValueError("Box-Cox input must be strictly positive after the shift")
    return y


def boxcox_fit(values: np.ndarray, shift: float | None = None) -> TransformParams:
    """Pick lambda by profile log-likelihood over the fixed grid.

    ``shift`` defaults to 0 for positive data and 1 - min(x) otherwise, so
    the shifted series is always strictly positive.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two observations to fit a Box-Cox transform")
    if shift is None:
        mn = float(x.min())
        shift = 0.0 if mn > 0 else 1.0 - mn
    y = _shifted(x, shift)
    if np.ptp(y) == 0:
        raise ValueError("constant series: Box-Cox likelihood is undefined")
    n = y.size
    logsum = float(np.sum(np.log(y)))
    logy = np.log(y)
    best_lam = None
    best_llf = -np.inf
    for lam in LAMBDA_GRID:
        z = logy if lam == 0.0 else (np.power(y, lam) - 1.0) / lam
        var = float(z.var())
        if var <= 0:
            continue
        llf = -0.5 * n * np.log(var) + (lam - 1.0) * logsum
        if llf > best_llf:
            best_llf = llf
            best_lam = float(lam)
    if best_lam is None:
        raise ValueError("Box-Cox profile likelihood is degenerate for this series")
    return TransformParams(lam=best_lam, shift=float(shift))


def boxcox_apply(x, params: TransformParams):
    """Two-branch power transform; strictly increasing on its domain."""
    y = _shifted(np.asarray(x, dtype=np.float64), params.shift)
    if params.lam == 0.0:
        out = np.log(y)
    else:
        out = (np.power(y, params.lam) - 1.0) / params.lam
    return out if out.ndim else float(out)


def boxcox_invert(y, params: TransformParams):
    """Inverse of :func:`boxcox_apply`; rejects values outside the transform range."""
    y = np.asarray(y, dtype=np.float64)
    if params.lam == 0.0:
        x = np.exp(y) - params.shift
    else:
        base = params.lam * y + 1.0
        if np.any(base <= 0):
            raise ValueError("value outside the Box-Cox transform range")
        x = np.power(base, 1.0 / params.lam) - params.shift
    return x if x.ndim else float(x)


def difference(series: np.ndarray, lag: int) -> np.ndarray:
    """out[t] = series[t+lag] - series[t]; length shrinks by ``lag``."""
    x = np.asarray(series, dtype=np.float64)
    if lag < 1:
        raise ValueError("lag must be a positive integer")
    if x.size <= lag:
        raise ValueError(f"series of length {x.size} is too short to difference at lag {lag}")
    return x[lag:] - x[:-lag]


def undifference(diffed: np.ndarray, seed: np.ndarray, lag: int) -> np.ndarray:
    """Exact inverse of :func:`difference` given the first ``lag`` original values."""
    d = np.asarray(diffed, dtype=np.float64)
    s = np.asarray(seed, dtype=np.float64)
    if s.size != lag:
        raise ValueError(f"need exactly {lag} seed values, got {s.size}")
    out = np.empty(d.size + lag)
    out[:lag] = s
    for t in range(lag, out.size):
        out[t] = out[t - lag] + d[t - lag]
    return out


def acf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelation for lags 0..max_lag, biased (divide-by-n) estimator."""
    x = np.asarray(series, dtype=np.float64)
    if x.size <= max_lag + 1:
        raise ValueError("series too short for the requested number of lags")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise ValueError("zero-variance series has no autocorrelation")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(xc[k:], xc[:-k])) / denom
    return out


def pacf(series: np.ndarray, max_lag: int) -> np.ndarray:
    """Partial autocorrelation via the Durbin-Levinson recursion on :func:`acf`.

    Index 0 is 1 by convention; index 1 equals acf[1] exactly.
    """
    r = acf(series, max_lag)
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    if max_lag == 0:
        return out
    phi_prev = np.array([r[1]])
    out[1] = r[1]
    v = 1.0 - r[1] ** 2
    for k in range(2, max_lag + 1):
        if v <= 0:
            # degenerate (perfectly predictable) series: remaining partials are 0
            out[k:] = 0.0
            return out
        num = r[k] - float(np.dot(phi_prev, r[k - 1 : 0 : -1]))
        phi_k = num / v
        phi = np.empty(k)
        phi[: k - 1] = phi_prev - phi_k * phi_prev[::-1]
        phi[k - 1] = phi_k
        v *= 1.0 - phi_k**2
        out[k] = phi_k
        phi_prev = phi
    return out

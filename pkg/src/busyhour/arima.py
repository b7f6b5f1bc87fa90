"""Multiplicative seasonal ARIMA: CSS estimation, forecasting and order tools."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .stats import acf, difference, pacf

_SIGMA2_FLOOR = 1e-300


class FitError(RuntimeError):
    """Raised when coefficient estimation fails to converge."""


@dataclass(frozen=True)
class SarimaOrder:
    """Orders of the multiplicative model (p,d,q) x (P,D,Q)_S."""

    p: int = 0
    d: int = 0
    q: int = 0
    P: int = 0
    D: int = 0
    Q: int = 0
    S: int = 1

    def __post_init__(self) -> None:
        for name in ("p", "d", "q", "P", "D", "Q"):
            if getattr(self, name) < 0:
                raise ValueError(f"order component {name} must be non-negative")
        if self.S < 1:
            raise ValueError("seasonal period S must be >= 1")
        if self.P + self.D + self.Q > 0 and self.S < 2:
            raise ValueError("seasonal terms require a period S >= 2")

    @property
    def n_params(self) -> int:
        return self.p + self.q + self.P + self.Q

    @property
    def ar_span(self) -> int:
        return self.p + self.S * self.P

    @property
    def ma_span(self) -> int:
        return self.q + self.S * self.Q

    @property
    def diff_span(self) -> int:
        return self.d + self.S * self.D


@dataclass(frozen=True)
class SarimaModel:
    """Fitted coefficients plus the trailing observations needed to forecast.

    ``history_tail`` holds the last ar_span + diff_span original values;
    ``resid_tail`` the last ma_span in-sample innovations (empty for pure
    AR models).
    """

    order: SarimaOrder
    ar: np.ndarray
    ma: np.ndarray
    sar: np.ndarray
    sma: np.ndarray
    sigma2: float
    history_tail: np.ndarray
    resid_tail: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        for name in ("ar", "ma", "sar", "sma", "history_tail", "resid_tail"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.ar.size and not _poly_roots_outside(self.ar):
            raise ValueError("AR polynomial has roots inside the unit circle")
        if self.sar.size and not _poly_roots_outside(self.sar):
            raise ValueError("seasonal AR polynomial has roots inside the unit circle")

    def to_dict(self) -> dict:
        o = self.order
        return {
            "order": [o.p, o.d, o.q, o.P, o.D, o.Q, o.S],
            "ar": self.ar.tolist(),
            "ma": self.ma.tolist(),
            "sar": self.sar.tolist(),
            "sma": self.sma.tolist(),
            "sigma2": self.sigma2,
            "history_tail": self.history_tail.tolist(),
            "resid_tail": self.resid_tail.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SarimaModel":
        return cls(
            order=SarimaOrder(*data["order"]),
            ar=np.array(data["ar"]),
            ma=np.array(data["ma"]),
            sar=np.array(data["sar"]),
            sma=np.array(data["sma"]),
            sigma2=float(data["sigma2"]),
            history_tail=np.array(data["history_tail"]),
            resid_tail=np.array(data["resid_tail"]),
        )


def _poly_roots_outside(coefs: np.ndarray, margin: float = 1e-9) -> bool:
    """True when 1 - c1 z - ... - ck z^k has all roots strictly outside the unit circle."""
    c = np.asarray(coefs, dtype=np.float64)
    if c.size == 0:
        return True
    poly = np.concatenate([[1.0], -c])[::-1]  # highest degree first for np.roots
    roots = np.roots(poly)
    return bool(np.all(np.abs(roots) > 1.0 + margin))


def _ma_invertible(coefs: np.ndarray, margin: float = 1e-9) -> bool:
    """True when 1 + c1 z + ... + ck z^k has all roots strictly outside the unit circle."""
    c = np.asarray(coefs, dtype=np.float64)
    if c.size == 0:
        return True
    poly = np.concatenate([[1.0], c])[::-1]
    roots = np.roots(poly)
    return bool(np.all(np.abs(roots) > 1.0 + margin))


def _seasonal_poly(coefs: np.ndarray, S: int, sign: float) -> np.ndarray:
    """Lag polynomial 1 + sign*c1 B^S + sign*c2 B^2S + ... as a dense coefficient vector."""
    out = np.zeros(coefs.size * S + 1)
    out[0] = 1.0
    for j, c in enumerate(coefs, start=1):
        out[j * S] = sign * c
    return out


def expand_ar(ar: np.ndarray, sar: np.ndarray, S: int) -> np.ndarray:
    """Lag coefficients a with phi(B)*PHI(B^S) = 1 - sum a_i B^i."""
    base = np.concatenate([[1.0], -np.asarray(ar, dtype=np.float64)])
    full = np.convolve(base, _seasonal_poly(np.asarray(sar, dtype=np.float64), S, -1.0))
    return -full[1:]


def expand_ma(ma: np.ndarray, sma: np.ndarray, S: int) -> np.ndarray:
    """Lag coefficients b with theta(B)*THETA(B^S) = 1 + sum b_j B^j."""
    base = np.concatenate([[1.0], np.asarray(ma, dtype=np.float64)])
    full = np.convolve(base, _seasonal_poly(np.asarray(sma, dtype=np.float64), S, 1.0))
    return full[1:]


def diff_polynomial(d: int, D: int, S: int) -> np.ndarray:
    """Coefficients c of (1-B)^d (1-B^S)^D, c[0] = 1."""
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    seasonal = np.zeros(S + 1)
    seasonal[0] = 1.0
    seasonal[S] = -1.0
    for _ in range(D):
        poly = np.convolve(poly, seasonal)
    return poly


def apply_differencing(series: np.ndarray, order: SarimaOrder) -> np.ndarray:
    w = np.asarray(series, dtype=np.float64)
    for _ in range(order.d):
        w = difference(w, 1)
    for _ in range(order.D):
        w = difference(w, order.S)
    return w


def css(series_diffed: np.ndarray, order: SarimaOrder, params: np.ndarray) -> float:
    """Conditional sum of squares; +inf outside the stationary/invertible region."""
    ar, ma, sar, sma = _split_params(order, params)
    if not (_poly_roots_outside(ar) and _poly_roots_outside(sar)):
        return np.inf
    if not (_ma_invertible(ma) and _ma_invertible(sma)):
        return np.inf
    a = expand_ar(ar, sar, order.S)
    b = expand_ma(ma, sma, order.S)
    eps = _kernels.css_residuals(series_diffed, a, b)
    return float(np.dot(eps[a.size :], eps[a.size :]))


def _split_params(order: SarimaOrder, params: np.ndarray):
    p, q, P, Q = order.p, order.q, order.P, order.Q
    ar = params[:p]
    ma = params[p : p + q]
    sar = params[p + q : p + q + P]
    sma = params[p + q + P : p + q + P + Q]
    return ar, ma, sar, sma


def _warm_start(w: np.ndarray, order: SarimaOrder) -> np.ndarray:
    """Least-squares AR estimates at the model's own lags; MA terms start at 0."""
    params = np.zeros(order.n_params)
    lags = [i + 1 for i in range(order.p)] + [(j + 1) * order.S for j in range(order.P)]
    if lags:
        maxlag = max(lags)
        if w.size > maxlag + 1:
            cols = [w[maxlag - lag : w.size - lag] for lag in lags]
            X = np.column_stack(cols)
            beta, *_ = np.linalg.lstsq(X, w[maxlag:], rcond=None)
            params[: order.p] = beta[: order.p]
            params[order.p + order.q : order.p + order.q + order.P] = beta[order.p :]
    # shrink toward zero until the start point is admissible
    for _ in range(20):
        ar, ma, sar, sma = _split_params(order, params)
        if (
            _poly_roots_outside(ar)
            and _poly_roots_outside(sar)
            and _ma_invertible(ma)
            and _ma_invertible(sma)
        ):
            return params
        params = params * 0.5
    return np.zeros(order.n_params)


def fit_sarima(series: np.ndarray, order: SarimaOrder) -> SarimaModel:
    """Estimate coefficients by conditional sum of squares on the differenced series.

    Optimization is Nelder-Mead from a least-squares warm start; parameter
    vectors whose AR (or seasonal AR) polynomial has roots inside the unit
    circle are rejected with an infinite objective.
    """
    x = np.asarray(series, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("series contains NaN")
    w = apply_differencing(x, order)
    min_len = 10 * (order.n_params + 1)
    if w.size < min_len:
        raise ValueError(
            f"insufficient data: {w.size} differenced observations, need >= {min_len} "
            f"for order ({order.p},{order.d},{order.q})x({order.P},{order.D},{order.Q})_{order.S}"
        )

    scale = max(1.0, float(np.max(np.abs(x))))
    w_sd = float(np.std(w))
    if order.n_params == 0 or w_sd < 1e-12 * scale:
        # nothing to estimate, or the differencing left a constant series
        params = np.zeros(order.n_params)
    else:
        x0 = _warm_start(w, order)
        denom = w.size * w_sd**2  # scale-free objective keeps the tolerances meaningful
        res = minimize(
            lambda p: css(w, order, p) / denom,
            x0,
            method="Nelder-Mead",
            options={"maxiter": 10000, "xatol": 1e-7, "fatol": 1e-12, "adaptive": True},
        )
        if not res.success or not np.isfinite(res.fun):
            raise FitError(
                f"CSS optimization did not converge for order {order} "
                f"(iterations={res.nit}, objective={res.fun!r}, message={res.message!r})"
            )
        params = res.x

    ar, ma, sar, sma = _split_params(order, params)
    if not (_ma_invertible(ma) and _ma_invertible(sma)):
        raise FitError(f"estimated MA polynomial is non-invertible for order {order}")
    a = expand_ar(ar, sar, order.S)
    b = expand_ma(ma, sma, order.S)
    eps = _kernels.css_residuals(w, a, b)
    n_used = max(w.size - a.size, 1)
    sigma2 = max(float(np.dot(eps[a.size :], eps[a.size :])) / n_used, _SIGMA2_FLOOR)

    tail_len = order.ar_span + order.diff_span
    resid_len = order.ma_span
    return SarimaModel(
        order=order,
        ar=ar.copy(),
        ma=ma.copy(),
        sar=sar.copy(),
        sma=sma.copy(),
        sigma2=sigma2,
        history_tail=x[x.size - tail_len :] if tail_len else np.zeros(0),
        resid_tail=eps[eps.size - resid_len :] if resid_len else np.zeros(0),
    )


def reseed(model: SarimaModel, series: np.ndarray) -> SarimaModel:
    """Same coefficients, tails rebuilt from a (possibly extended) history."""
    x = np.asarray(series, dtype=np.float64)
    order = model.order
    if x.size < order.ar_span + order.diff_span + 1:
        raise ValueError("history too short to reseed the model")
    w = apply_differencing(x, order) if order.diff_span else x.copy()
    a = expand_ar(model.ar, model.sar, order.S)
    b = expand_ma(model.ma, model.sma, order.S)
    eps = _kernels.css_residuals(w, a, b)
    tail_len = order.ar_span + order.diff_span
    resid_len = order.ma_span
    return SarimaModel(
        order=order,
        ar=model.ar,
        ma=model.ma,
        sar=model.sar,
        sma=model.sma,
        sigma2=model.sigma2,
        history_tail=x[x.size - tail_len :] if tail_len else np.zeros(0),
        resid_tail=eps[eps.size - resid_len :] if resid_len else np.zeros(0),
    )


def forecast_sarima(model: SarimaModel, horizon: int) -> np.ndarray:
    """Iterate the expanded difference equation with future innovations at zero."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    order = model.order
    a = expand_ar(model.ar, model.sar, order.S)
    b = expand_ma(model.ma, model.sma, order.S)
    c = diff_polynomial(order.d, order.D, order.S)

    hist = list(np.asarray(model.history_tail, dtype=np.float64))
    # rebuild the differenced tail from the stored original values
    w_hist: list[float] = []
    if order.ar_span:
        xt = np.array(hist)
        wt = xt
        for _ in range(order.d):
            wt = wt[1:] - wt[:-1]
        for _ in range(order.D):
            wt = wt[order.S :] - wt[: -order.S]
        w_hist = list(wt[-order.ar_span :])
    eps_hist = list(np.asarray(model.resid_tail, dtype=np.float64))

    out = []
    for _step in range(horizon):
        w_new = 0.0
        for i in range(1, a.size + 1):
            if i <= len(w_hist):
                w_new += a[i - 1] * w_hist[-i]
        for j in range(1, b.size + 1):
            if j <= len(eps_hist):
                w_new += b[j - 1] * eps_hist[-j]
        x_new = w_new
        for i in range(1, c.size):
            if i <= len(hist):
                x_new -= c[i] * hist[-i]
        hist.append(x_new)
        out.append(x_new)
        if order.ar_span:
            w_hist.append(w_new)
        eps_hist.append(0.0)
    return np.array(out)


def aicc(model: SarimaModel, series: np.ndarray, condition: int | None = None) -> float:
    """Corrected Akaike criterion from the Gaussian CSS likelihood; lower is better.

    ``condition`` fixes how many leading residuals are excluded from the
    sum of squares (at least the model's own AR span).  Candidates being
    compared on the same series should share it, otherwise the excluded
    terms fluctuate between models and add noise to the ranking.
    """
    x = np.asarray(series, dtype=np.float64)
    order = model.order
    w = apply_differencing(x, order) if order.diff_span else x.copy()
    a = expand_ar(model.ar, model.sar, order.S)
    b = expand_ma(model.ma, model.sma, order.S)
    eps = _kernels.css_residuals(w, a, b)
    t0 = a.size if condition is None else max(condition, a.size)
    n = w.size - t0
    if n < 2:
        return np.inf
    sigma2 = max(float(np.dot(eps[t0:], eps[t0:])) / n, _SIGMA2_FLOOR)
    k = order.n_params + 1  # innovation variance counts as a parameter
    loglik = -0.5 * n * (np.log(2.0 * np.pi * sigma2) + 1.0)
    aic = -2.0 * loglik + 2.0 * k
    if n - k - 1 <= 0:
        return np.inf
    return float(aic + 2.0 * k * (k + 1) / (n - k - 1))


def _significant_lags(values: np.ndarray, ci: float, upto: int) -> set[int]:
    return {k for k in range(1, upto + 1) if abs(values[k]) > ci}


def suggest_order(series: np.ndarray, S: int) -> tuple[SarimaOrder, dict]:
    """Rule-based order selection from ACF/PACF inspection.

    Differencing (d, D in {0, 1}) is applied while it reduces the sample
    standard deviation; AR orders come from significant PACF spikes at
    lags 1 and S; MA orders are set only for a sharp ACF cut-off at lag 1
    with no matching PACF cut-off.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.size < 3 * S + 10:
        raise ValueError("series too short to inspect correlations up to 3 seasonal lags")

    diagnostics: dict = {"S": S}
    w = x
    D = 0
    if S >= 2 and w.size > 2 * S:
        cand = difference(w, S)
        if cand.std() < w.std():
            w = cand
            D = 1
    d = 0
    cand = difference(w, 1)
    # a deterministic trend survives seasonal differencing as a nonzero mean
    drift = abs(float(w.mean())) > 3.0 * float(w.std()) / np.sqrt(w.size)
    if cand.std() < w.std() or drift:
        w = cand
        d = 1
    diagnostics["d"] = d
    diagnostics["D"] = D

    max_lag = min(3 * S, w.size // 2 - 1)
    r = acf(w, max_lag)
    phi = pacf(w, max_lag)
    ci = 2.0 / np.sqrt(w.size)
    diagnostics["acf"] = r
    diagnostics["pacf"] = phi
    diagnostics["ci"] = ci

    sig_acf = _significant_lags(r, ci, min(max_lag, 2 * S))
    sig_pacf = _significant_lags(phi, ci, min(max_lag, 2 * S))
    nonseasonal_acf = {k for k in sig_acf if k < S}
    nonseasonal_pacf = {k for k in sig_pacf if k < S}

    p = q = P = Q = 0
    acf_cuts_off = nonseasonal_acf == {1}
    pacf_cuts_off = nonseasonal_pacf == {1}
    if acf_cuts_off and not pacf_cuts_off:
        q = 1  # single dominant ACF spike with a decaying PACF: MA signature
    elif 1 in nonseasonal_pacf:
        p = 1
    if S >= 2 and max_lag >= S:
        if abs(phi[S]) > ci:
            P = 1
        elif abs(r[S]) > ci and not any(
            abs(r[j * S]) > ci for j in range(2, max_lag // S + 1)
        ):
            Q = 1
    diagnostics["rule"] = {
        "acf_cut_off_at_1": acf_cuts_off,
        "pacf_cut_off_at_1": pacf_cuts_off,
        "significant_acf_lags": sorted(sig_acf),
        "significant_pacf_lags": sorted(sig_pacf),
    }
    return SarimaOrder(p=p, d=d, q=q, P=P, D=D, Q=Q, S=S), diagnostics

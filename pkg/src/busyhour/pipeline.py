"""Cluster-unaware / cluster-aware forecasting over the training-length x look-ahead grid."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from typing import Protocol, Sequence

import numpy as np

from . import arima
from .adforecast import AdModel, fit_ad, forecast_ad
from .clustering import ClusterModel
from .lstm import LstmConfig, LstmNetwork, forward, make_windows, train
from .series import (
    AggregateSeries,
    BusyHourSeries,
    HourlyTrace,
    aggregate_network,
    extract_busy_hours,
    sample_at_timestamps,
)
from .stats import TransformParams, boxcox_apply, boxcox_fit, boxcox_invert

METHODS = ("AD", "SA", "LSTM")
APPROACHES = ("CU", "CA")
BLOCK_DAYS = 7
LOOKBACK_DAYS = 14

#: the seasonal ARIMA configuration used by the SA method unless overridden
DEFAULT_SA_ORDER = arima.SarimaOrder(p=1, d=1, q=0, P=1, D=1, Q=0, S=7)


def add_months(day: date, months: int) -> date:
    """Calendar-month shift with day-of-month clamping."""
    month_index = day.month - 1 + months
    year = day.year + month_index // 12
    month = month_index % 12 + 1
    last = [31, 29 if year % 4 == 0 and (year % 100 != 0 or year % 400 == 0) else 28,
            31, 30, 31, 30, 31, 31, 30, 31, 30, 31][month - 1]
    return date(year, month, min(day.day, last))


@dataclass(frozen=True)
class SplitSpec:
    """Train window of ``tl_months`` calendar months ending at ``train_end``;
    test window of ``la_months`` months starting the next day."""

    train_end: date
    tl_months: int
    la_months: int

    def __post_init__(self) -> None:
        if self.tl_months < 1:
            raise ValueError("training length must be at least one month")
        if self.la_months not in (1, 2):
            raise ValueError("look-ahead must be 1 or 2 months")

    @property
    def train_start(self) -> date:
        return add_months(self.train_end, -self.tl_months) + timedelta(days=1)

    @property
    def test_start(self) -> date:
        return self.train_end + timedelta(days=1)

    @property
    def test_end(self) -> date:
        return add_months(self.test_start, self.la_months) - timedelta(days=1)


class BlockForecaster(Protocol):
    """A fitted model that rolls forward one 7-day block at a time."""

    block_len: int

    def forecast_block(self, history: np.ndarray) -> np.ndarray: ...


def recursive_forecast(forecaster: BlockForecaster, history: np.ndarray, horizon_days: int) -> np.ndarray:
    """Forecast ``horizon_days`` in blocks, feeding each block back as history.

    The forecaster sees the growing working history (actuals followed by
    its own predictions), mirroring look-back-window recursion; the last
    block is truncated to the horizon.
    """
    history = np.asarray(history, dtype=np.float64)
    if history.size < LOOKBACK_DAYS:
        raise ValueError(f"need at least {LOOKBACK_DAYS} history samples, got {history.size}")
    if horizon_days < 1:
        raise ValueError("horizon must be at least one day")
    work = history
    out: list[float] = []
    block_index = 0
    while len(out) < horizon_days:
        try:
            block = np.asarray(forecaster.forecast_block(work), dtype=np.float64)
        except Exception as exc:
            raise RuntimeError(f"forecaster failed at block {block_index}: {exc}") from exc
        if block.size != forecaster.block_len:
            raise RuntimeError(
                f"block {block_index}: expected {forecaster.block_len} values, got {block.size}"
            )
        out.extend(block.tolist())
        work = np.concatenate([work, block])
        block_index += 1
    return np.array(out[:horizon_days])


@dataclass
class SarimaBlockForecaster:
    model: arima.SarimaModel
    block_len: int = BLOCK_DAYS

    def forecast_block(self, history: np.ndarray) -> np.ndarray:
        reseeded = arima.reseed(self.model, history)
        return arima.forecast_sarima(reseeded, self.block_len)


@dataclass
class AdBlockForecaster:
    """Blocks sliced out of the direct multi-step decomposition forecast.

    The appended predictions do not alter the fitted state, so block-wise
    recursion reproduces the direct forecast exactly.
    """

    model: AdModel
    block_len: int = BLOCK_DAYS

    def forecast_block(self, history: np.ndarray) -> np.ndarray:
        done = len(history) - self.model.n_train
        if done < 0:
            raise ValueError("working history is shorter than the training series")
        return forecast_ad(self.model, done + self.block_len)[done:]


@dataclass
class LstmBlockForecaster:
    """Standardises the look-back window with training statistics before the net."""

    network: LstmNetwork
    mean: float
    std: float
    block_len: int = BLOCK_DAYS

    def forecast_block(self, history: np.ndarray) -> np.ndarray:
        window = (np.asarray(history[-LOOKBACK_DAYS:], dtype=np.float64) - self.mean) / self.std
        return forward(self.network, window) * self.std + self.mean


def fit_forecaster(
    method: str,
    train_values: np.ndarray,
    seed: int = 0,
    sa_order: arima.SarimaOrder = DEFAULT_SA_ORDER,
    period: int = 7,
    lstm_config: LstmConfig | None = None,
) -> BlockForecaster:
    """Fit one of the three forecaster families on a training series."""
    x = np.asarray(train_values, dtype=np.float64)
    if x.size < LOOKBACK_DAYS:
        raise ValueError(f"training series has {x.size} samples, need >= {LOOKBACK_DAYS}")
    if method == "SA":
        return SarimaBlockForecaster(arima.fit_sarima(x, sa_order))
    if method == "AD":
        return AdBlockForecaster(fit_ad(x, period=period))
    if method == "LSTM":
        config = lstm_config or LstmConfig.preset("test")
        config = LstmConfig(**{**config.__dict__, "seed": seed})
        mean = float(x.mean())
        std = float(x.std())
        if std <= 0:
            std = 1.0
        Xw, Yw = make_windows((x - mean) / std, config.input_len, config.output_len)
        net = LstmNetwork.initialize(config)
        train(net, Xw, Yw, config)
        return LstmBlockForecaster(network=net, mean=mean, std=std)
    raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")


def mape(actual: np.ndarray, predicted: np.ndarray) -> float:
    """Mean absolute percentage error, in percent."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.size != p.size:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise ValueError("empty series")
    if np.any(a <= 0):
        raise ValueError("actual values must be strictly positive for a percentage error")
    return float(100.0 * np.mean(np.abs((a - p) / a)))


def mpe_peak(actual: np.ndarray, predicted: np.ndarray) -> float:
    """Signed percentage error on the window maxima; positive means under-estimation."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.size == 0 or p.size == 0:
        raise ValueError("empty series")
    peak = float(a.max())
    if peak <= 0:
        raise ValueError("actual peak must be positive")
    return float(100.0 * (peak - float(p.max())) / peak)


@dataclass(frozen=True)
class ForecastRun:
    """Aligned test-window outcome of one (method, approach) forecast."""

    days: tuple[date, ...]
    actual: np.ndarray
    predicted: np.ndarray
    method: str
    approach: str


def _transformed_forecast(
    train_values: np.ndarray,
    horizon: int,
    method: str,
    seed: int,
    use_boxcox: bool,
    sa_order: arima.SarimaOrder,
    period: int,
    lstm_config: LstmConfig | None,
) -> np.ndarray:
    """Box-Cox in, fit, recurse, Box-Cox out."""
    if use_boxcox:
        params = boxcox_fit(train_values)
        z = boxcox_apply(train_values, params)
    else:
        params = TransformParams(lam=1.0, shift=0.0)
        z = np.asarray(train_values, dtype=np.float64)
    forecaster = fit_forecaster(
        method, z, seed=seed, sa_order=sa_order, period=period, lstm_config=lstm_config
    )
    pred_z = recursive_forecast(forecaster, z, horizon)
    if use_boxcox and params.lam != 0.0:
        # keep forecasts inside the invertible range of the transform
        lo = -1.0 / params.lam
        pred_z = np.maximum(pred_z, lo + 1e-12) if params.lam > 0 else np.minimum(pred_z, lo - 1e-12)
    if not use_boxcox:
        return pred_z
    return np.asarray(boxcox_invert(pred_z, params))


def forecast_series(
    train_values: np.ndarray,
    horizon_days: int,
    method: str,
    seed: int = 0,
    use_boxcox: bool = True,
    sa_order: arima.SarimaOrder = DEFAULT_SA_ORDER,
    lstm_config: LstmConfig | None = None,
) -> np.ndarray:
    """Transform, fit, recursively forecast and invert: the single-series entry point."""
    return _transformed_forecast(
        np.asarray(train_values, dtype=np.float64),
        horizon_days,
        method,
        seed,
        use_boxcox,
        sa_order,
        7,
        lstm_config,
    )


def _window_values(bh: BusyHourSeries, first: date, last: date, what: str) -> BusyHourSeries:
    window = bh.restrict(first, last)
    expected = (last - first).days + 1
    if len(window) != expected:
        raise ValueError(
            f"{what} window {first}..{last} has {len(window)} busy-hour days, expected {expected}"
        )
    return window


def run_cu(
    traces: Sequence[HourlyTrace],
    method: str,
    split: SplitSpec,
    seed: int = 0,
    use_boxcox: bool = True,
    sa_order: arima.SarimaOrder = DEFAULT_SA_ORDER,
    lstm_config: LstmConfig | None = None,
) -> ForecastRun:
    """Forecast the aggregate busy-hour series directly."""
    agg = aggregate_network(traces)
    bh = extract_busy_hours(agg)
    return _run_cu_prepared(bh, method, split, seed, use_boxcox, sa_order, lstm_config)


def _run_cu_prepared(
    bh: BusyHourSeries,
    method: str,
    split: SplitSpec,
    seed: int,
    use_boxcox: bool,
    sa_order: arima.SarimaOrder,
    lstm_config: LstmConfig | None,
) -> ForecastRun:
    train_bh = _window_values(bh, split.train_start, split.train_end, "training")
    test_bh = _window_values(bh, split.test_start, split.test_end, "test")
    horizon = len(test_bh)
    predicted = _transformed_forecast(
        train_bh.values, horizon, method, seed, use_boxcox, sa_order, 7, lstm_config
    )
    return ForecastRun(
        days=tuple(test_bh.days),
        actual=test_bh.values,
        predicted=predicted,
        method=method,
        approach="CU",
    )


def cluster_busy_series(
    traces: Sequence[HourlyTrace],
    cluster_model: ClusterModel,
    clusters: Sequence[int],
    timestamps: Sequence[datetime],
) -> dict[int, np.ndarray]:
    """Per-cluster cumulative series sampled at the aggregate busy-hour timestamps."""
    by_id = {t.cell_id: t for t in traces}
    out: dict[int, np.ndarray] = {}
    for c in clusters:
        members = [by_id[cid] for cid in cluster_model.members(c) if cid in by_id]
        if not members:
            raise ValueError(f"cluster {c} has no traces")
        agg = aggregate_network(members)
        out[c] = sample_at_timestamps(agg, timestamps)
    return out


def run_ca(
    traces: Sequence[HourlyTrace],
    cluster_model: ClusterModel,
    method: str,
    split: SplitSpec,
    seed: int = 0,
    use_boxcox: bool = True,
    sa_order: arima.SarimaOrder = DEFAULT_SA_ORDER,
    lstm_config: LstmConfig | None = None,
    min_share: float = 0.0,
) -> ForecastRun:
    """Cluster-aware forecast: per-cluster series at the aggregate busy hours, summed.

    Steps: fix the busy-hour timestamps of the aggregate series, sample
    each active cluster's cumulative traffic at those timestamps, fit and
    recursively forecast every cluster independently (each with its own
    Box-Cox), and add the per-day forecasts.
    """
    agg = aggregate_network(traces)
    bh = extract_busy_hours(agg)
    train_bh = _window_values(bh, split.train_start, split.train_end, "training")
    test_bh = _window_values(bh, split.test_start, split.test_end, "test")
    horizon = len(test_bh)

    clusters = cluster_model.active_clusters(min_share)
    if not clusters:
        raise ValueError("no clusters left after the traffic-share exclusion")
    series = cluster_busy_series(traces, cluster_model, clusters, train_bh.timestamps)

    total = np.zeros(horizon)
    for offset, c in enumerate(sorted(clusters)):
        try:
            total += _transformed_forecast(
                series[c], horizon, method, seed + offset, use_boxcox, sa_order, 7, lstm_config
            )
        except Exception as exc:
            raise RuntimeError(f"cluster {c}: {exc}") from exc
    return ForecastRun(
        days=tuple(test_bh.days),
        actual=test_bh.values,
        predicted=total,
        method=method,
        approach="CA",
    )


@dataclass(frozen=True)
class GridRow:
    method: str
    approach: str
    tl_months: int
    la_months: int
    status: str  # "ok" or "failed"
    mape: float | None
    mpe_peak: float | None
    n_days: int
    error: str = ""


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[GridRow, ...]
    train_end: date
    seed: int

    def row(self, method: str, approach: str, tl: int, la: int) -> GridRow:
        for r in self.rows:
            if (r.method, r.approach, r.tl_months, r.la_months) == (method, approach, tl, la):
                return r
        raise KeyError((method, approach, tl, la))


def grid_evaluate(
    traces: Sequence[HourlyTrace],
    cluster_model: ClusterModel | None,
    methods: Sequence[str],
    approaches: Sequence[str],
    tl_months: Sequence[int],
    la_months: Sequence[int],
    train_end: date,
    seed: int = 0,
    use_boxcox: bool = True,
    sa_order: arima.SarimaOrder = DEFAULT_SA_ORDER,
    lstm_config: LstmConfig | None = None,
    min_share: float = 0.0,
    workers: int = 1,
    keep_forecasts: bool = False,
) -> tuple[EvaluationReport, dict[tuple, ForecastRun]]:
    """One row per (method, approach, TL, LA); failed cells are recorded, not fatal.

    The test window is shared across TLs for each LA (the training window
    extends backward from a fixed ``train_end``).  Forecaster seeds are
    derived from (seed, method, TL, LA) only, so a degenerate single-
    cluster CA run reproduces CU exactly.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    for a in approaches:
        if a not in APPROACHES:
            raise ValueError(f"unknown approach {a!r}")
    if "CA" in approaches and cluster_model is None:
        raise ValueError("cluster-aware evaluation requires a fitted cluster model")

    agg = aggregate_network(traces)
    bh = extract_busy_hours(agg)

    jobs = []
    for method in methods:
        for approach in approaches:
            for tl in tl_months:
                for la in la_months:
                    jobs.append((method, approach, int(tl), int(la)))

    def derive_seed(method: str, tl: int, la: int) -> int:
        return seed + 1000 * (METHODS.index(method) + 1) + 10 * tl + la

    def run_one(job: tuple) -> tuple[tuple, GridRow, ForecastRun | None]:
        method, approach, tl, la = job
        split = SplitSpec(train_end=train_end, tl_months=tl, la_months=la)
        job_seed = derive_seed(method, tl, la)
        try:
            if approach == "CU":
                run = _run_cu_prepared(bh, method, split, job_seed, use_boxcox, sa_order, lstm_config)
            else:
                run = run_ca(
                    traces, cluster_model, method, split, job_seed,
                    use_boxcox, sa_order, lstm_config, min_share,
                )
            row = GridRow(
                method=method,
                approach=approach,
                tl_months=tl,
                la_months=la,
                status="ok",
                mape=mape(run.actual, run.predicted),
                mpe_peak=mpe_peak(run.actual, run.predicted),
                n_days=len(run.days),
            )
            return job, row, run
        except Exception as exc:
            row = GridRow(
                method=method,
                approach=approach,
                tl_months=tl,
                la_months=la,
                status="failed",
                mape=None,
                mpe_peak=None,
                n_days=0,
                error=str(exc),
            )
            return job, row, None

    results: dict[tuple, tuple[GridRow, ForecastRun | None]] = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for job, row, run in pool.map(run_one, jobs):
                results[job] = (row, run)
    else:
        for job in jobs:
            job_, row, run = run_one(job)
            results[job_] = (row, run)

    ordered = sorted(results, key=lambda j: (METHODS.index(j[0]), APPROACHES.index(j[1]), j[2], j[3]))
    rows = tuple(results[j][0] for j in ordered)
    forecasts = {j: results[j][1] for j in ordered if keep_forecasts and results[j][1] is not None}
    return EvaluationReport(rows=rows, train_end=train_end, seed=seed), forecasts

"""Busy-hour downlink traffic forecasting for cellular networks.

Builds per-day busy-hour series from hourly per-cell traces, optionally
groups cells by their normalized weekly traffic signatures, and forecasts
one to two months ahead with three model families (additive decomposition,
seasonal ARIMA, encoder-decoder LSTM), evaluated on a training-length x
look-ahead grid in cluster-unaware and cluster-aware modes.
"""

from ._kernels import backend as kernel_backend
from .adforecast import AdModel, fit_ad, forecast_ad
from .arima import SarimaModel, SarimaOrder, fit_sarima, forecast_sarima, suggest_order
from .clustering import ClusterModel, kmeans, select_k, served_traffic_share, silhouette
from .decompose import DecompositionResult, naive_decompose, stl_decompose
from .lstm import LstmConfig, LstmNetwork, forecast_lstm, make_windows
from .pipeline import (
    EvaluationReport,
    SplitSpec,
    forecast_series,
    grid_evaluate,
    mape,
    mpe_peak,
    recursive_forecast,
    run_ca,
    run_cu,
)
from .series import (
    AggregateSeries,
    BusyHourSeries,
    HourlyTrace,
    aggregate_network,
    extract_busy_hours,
    sample_at_timestamps,
)
from .signatures import DailySignature, WeeklySignature, build_mws, median_daily_signatures, normalize_mws
from .stats import TransformParams, acf, boxcox_apply, boxcox_fit, boxcox_invert, difference, pacf, undifference
from .synthgen import ArchetypeSpec, ScenarioSpec, builtin_archetypes, generate_scenario

__version__ = "0.1.0"

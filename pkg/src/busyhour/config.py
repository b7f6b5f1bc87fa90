"""Run configuration: JSON file parsing with strict key validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from .arima import SarimaOrder


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _parse_date(raw: str, where: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class ClusteringSection:
    window_weeks: int = 4
    k_min: int = 2
    k_max: int = 10
    restarts: int = 10
    exclude_share_below: float = 0.01
    normalization: str = "max"


@dataclass
class EvaluateSection:
    train_end: date | None = None
    methods: list[str] = field(default_factory=lambda: ["AD", "SA", "LSTM"])
    approaches: list[str] = field(default_factory=lambda: ["CU", "CA"])
    tl_months: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    la_months: list[int] = field(default_factory=lambda: [1, 2])
    boxcox: bool = True
    sa_order: SarimaOrder = field(default_factory=lambda: SarimaOrder(1, 1, 0, 1, 1, 0, 7))


@dataclass
class ForecastSection:
    method: str = "SA"
    approach: str = "CU"
    tl_months: int = 2
    horizon_days: int = 28


@dataclass
class SynthSection:
    days: int = 244
    start: str = "2024-01-01"
    cells_per_archetype: list[int] = field(default_factory=lambda: [40, 40, 40, 40, 40])
    noise_sigma: float = 0.05
    trend_slope: float = 0.0


@dataclass
class LstmSection:
    epochs: int | None = None
    batch_size: int | None = None
    learning_rate: float | None = None


@dataclass
class RunConfig:
    dataset: Path | None = None
    labels: Path | None = None
    output_dir: Path = Path("out")
    seed: int = 0
    profile: str = "test"
    workers: int = 1
    clustering: ClusteringSection = field(default_factory=ClusteringSection)
    evaluate: EvaluateSection = field(default_factory=EvaluateSection)
    forecast: ForecastSection = field(default_factory=ForecastSection)
    synth: SynthSection = field(default_factory=SynthSection)
    lstm: LstmSection = field(default_factory=LstmSection)

    def validate(self) -> None:
        if self.profile not in ("paper", "test"):
            raise ConfigError(f"profile must be 'paper' or 'test', got {self.profile!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.clustering.k_min < 2 or self.clustering.k_max < self.clustering.k_min:
            raise ConfigError("clustering k range must satisfy 2 <= k_min <= k_max")
        if not 0 <= self.clustering.exclude_share_below < 1:
            raise ConfigError("exclude_share_below must be in [0, 1)")
        for m in self.evaluate.methods:
            if m not in ("AD", "SA", "LSTM"):
                raise ConfigError(f"unknown method {m!r} in evaluate.methods")
        for a in self.evaluate.approaches:
            if a not in ("CU", "CA"):
                raise ConfigError(f"unknown approach {a!r} in evaluate.approaches")
        for la in self.evaluate.la_months:
            if la not in (1, 2):
                raise ConfigError("evaluate.la_months entries must be 1 or 2")
        for tl in self.evaluate.tl_months:
            if tl < 1:
                raise ConfigError("evaluate.tl_months entries must be >= 1")
        if len(self.synth.cells_per_archetype) != 5:
            raise ConfigError("synth.cells_per_archetype must list 5 counts")


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """Parse a JSON run configuration; unknown keys are rejected.

    ``overrides`` (seed/profile from CLI flags) take precedence over the file.
    """
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")

    _check_keys(
        raw,
        {"dataset", "labels", "output_dir", "seed", "profile", "workers",
         "clustering", "evaluate", "forecast", "synth", "lstm"},
        "config root",
    )
    cfg = RunConfig()
    if "dataset" in raw:
        cfg.dataset = Path(raw["dataset"])
    if "labels" in raw:
        cfg.labels = Path(raw["labels"])
    if "output_dir" in raw:
        cfg.output_dir = Path(raw["output_dir"])
    cfg.seed = int(raw.get("seed", cfg.seed))
    cfg.profile = str(raw.get("profile", cfg.profile))
    cfg.workers = int(raw.get("workers", cfg.workers))

    sec = raw.get("clustering", {})
    _check_keys(sec, {"window_weeks", "k_min", "k_max", "restarts", "exclude_share_below", "normalization"}, "clustering")
    for key, val in sec.items():
        setattr(cfg.clustering, key, type(getattr(cfg.clustering, key))(val))

    sec = raw.get("evaluate", {})
    _check_keys(sec, {"train_end", "methods", "approaches", "tl_months", "la_months", "boxcox", "sa_order"}, "evaluate")
    if "train_end" in sec:
        cfg.evaluate.train_end = _parse_date(sec["train_end"], "evaluate.train_end")
    if "methods" in sec:
        cfg.evaluate.methods = [str(m) for m in sec["methods"]]
    if "approaches" in sec:
        cfg.evaluate.approaches = [str(a) for a in sec["approaches"]]
    if "tl_months" in sec:
        cfg.evaluate.tl_months = [int(t) for t in sec["tl_months"]]
    if "la_months" in sec:
        cfg.evaluate.la_months = [int(t) for t in sec["la_months"]]
    if "boxcox" in sec:
        cfg.evaluate.boxcox = bool(sec["boxcox"])
    if "sa_order" in sec:
        vals = sec["sa_order"]
        if not (isinstance(vals, list) and len(vals) == 7):
            raise ConfigError("evaluate.sa_order must be [p,d,q,P,D,Q,S]")
        cfg.evaluate.sa_order = SarimaOrder(*[int(v) for v in vals])

    sec = raw.get("forecast", {})
    _check_keys(sec, {"method", "approach", "tl_months", "horizon_days"}, "forecast")
    for key, val in sec.items():
        setattr(cfg.forecast, key, type(getattr(cfg.forecast, key))(val))

    sec = raw.get("synth", {})
    _check_keys(sec, {"days", "start", "cells_per_archetype", "noise_sigma", "trend_slope"}, "synth")
    if "days" in sec:
        cfg.synth.days = int(sec["days"])
    if "start" in sec:
        cfg.synth.start = str(sec["start"])
    if "cells_per_archetype" in sec:
        cfg.synth.cells_per_archetype = [int(c) for c in sec["cells_per_archetype"]]
    if "noise_sigma" in sec:
        cfg.synth.noise_sigma = float(sec["noise_sigma"])
    if "trend_slope" in sec:
        cfg.synth.trend_slope = float(sec["trend_slope"])

    sec = raw.get("lstm", {})
    _check_keys(sec, {"epochs", "batch_size", "learning_rate"}, "lstm")
    if "epochs" in sec:
        cfg.lstm.epochs = int(sec["epochs"])
    if "batch_size" in sec:
        cfg.lstm.batch_size = int(sec["batch_size"])
    if "learning_rate" in sec:
        cfg.lstm.learning_rate = float(sec["learning_rate"])

    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    cfg.validate()
    return cfg


def clustering_window(cfg: RunConfig, dataset_start: datetime) -> tuple[datetime, datetime]:
    """First N complete weeks of the dataset, starting at the first midnight."""
    start = dataset_start
    if start.hour or start.minute or start.second:
        start = start.replace(hour=0, minute=0, second=0, microsecond=0) + timedelta(days=1)
    return start, start + timedelta(weeks=cfg.clustering.window_weeks)

"""Median daily/weekly traffic signatures, the clustering feature vectors."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .series import DAY_HOURS, HOUR, HourlyTrace

WORKDAY = "workday"
SATURDAY = "saturday"
SUNDAY = "sunday"
DAY_CLASSES = (WORKDAY, SATURDAY, SUNDAY)

#: weekly layout: five workday copies, then Saturday, then Sunday
WEEK_HOURS = 7 * DAY_HOURS


class ZeroSignalError(ValueError):
    """A cell whose signature is identically zero cannot be normalized or clustered."""


@dataclass(frozen=True)
class DailySignature:
    values: np.ndarray
    day_class: str

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (DAY_HOURS,):
            raise ValueError(f"daily signature needs exactly {DAY_HOURS} values")
        if np.any(vals < 0):
            raise ValueError("daily signature values must be non-negative")
        if self.day_class not in DAY_CLASSES:
            raise ValueError(f"unknown day class {self.day_class!r}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class WeeklySignature:
    cell_id: str
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (WEEK_HOURS,):
            raise ValueError(f"weekly signature needs exactly {WEEK_HOURS} values")
        object.__setattr__(self, "values", vals)


def _day_class(weekday: int) -> str:
    if weekday < 5:
        return WORKDAY
    return SATURDAY if weekday == 5 else SUNDAY


def median_daily_signatures(
    trace: HourlyTrace, window: tuple[datetime, datetime] | None = None
) -> dict[str, DailySignature]:
    """Hourly medians per day class over the complete days inside ``window``."""
    start, values = trace.start, trace.values
    if window is not None:
        lo = trace.index_of(window[0])
        hi = int((window[1] - start) / HOUR)
        if hi > len(trace):
            raise ValueError("window extends beyond the trace")
        values = values[lo:hi]
        start = window[0]
    first = start if start.hour == 0 else start.replace(hour=0) + timedelta(days=1)
    offset = int((first - start) / HOUR)
    n_days = (values.size - offset) // DAY_HOURS
    buckets: dict[str, list[np.ndarray]] = {c: [] for c in DAY_CLASSES}
    for d in range(n_days):
        day_vals = values[offset + d * DAY_HOURS : offset + (d + 1) * DAY_HOURS]
        if np.isnan(day_vals).any():
            continue
        buckets[_day_class((first + timedelta(days=d)).weekday())].append(day_vals)
    out = {}
    for cls, days in buckets.items():
        if not days:
            raise ValueError(f"window contains no complete {cls} for cell {trace.cell_id!r}")
        out[cls] = DailySignature(values=np.median(np.stack(days), axis=0), day_class=cls)
    return out


def build_mws(
    workday: DailySignature,
    saturday: DailySignature,
    sunday: DailySignature,
    cell_id: str = "",
) -> WeeklySignature:
    """Unnormalized weekly signature: 5x workday, then Saturday, then Sunday."""
    if (workday.day_class, saturday.day_class, sunday.day_class) != DAY_CLASSES:
        raise ValueError("signatures must be passed as (workday, saturday, sunday)")
    vals = np.concatenate([np.tile(workday.values, 5), saturday.values, sunday.values])
    return WeeklySignature(cell_id=cell_id, values=vals)


def normalize_mws(sig: WeeklySignature) -> WeeklySignature:
    """Scale so the peak is 1; zero signatures are unclassifiable."""
    peak = float(sig.values.max())
    if peak <= 0:
        raise ZeroSignalError(f"cell {sig.cell_id!r} has an all-zero signature")
    return WeeklySignature(cell_id=sig.cell_id, values=sig.values / peak)


def normalize_mws_l2(sig: WeeklySignature) -> WeeklySignature:
    """Alternative unit-L2 normalization."""
    norm = float(np.linalg.norm(sig.values))
    if norm <= 0:
        raise ZeroSignalError(f"cell {sig.cell_id!r} has an all-zero signature")
    return WeeklySignature(cell_id=sig.cell_id, values=sig.values / norm)


def build_weekly_signatures(
    traces,
    window: tuple[datetime, datetime] | None = None,
    normalization: str = "max",
) -> tuple[list[WeeklySignature], list[str]]:
    """Normalized weekly signatures for every cell; zero-signal cells are set aside.

    Returns ``(signatures, unclassifiable_cell_ids)``.
    """
    if normalization == "max":
        norm = normalize_mws
    elif normalization == "l2":
        norm = normalize_mws_l2
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    sigs: list[WeeklySignature] = []
    skipped: list[str] = []
    for trace in sorted(traces, key=lambda t: t.cell_id):
        mds = median_daily_signatures(trace, window)
        raw = build_mws(mds[WORKDAY], mds[SATURDAY], mds[SUNDAY], cell_id=trace.cell_id)
        try:
            sigs.append(norm(raw))
        except ZeroSignalError:
            skipped.append(trace.cell_id)
    return sigs, skipped

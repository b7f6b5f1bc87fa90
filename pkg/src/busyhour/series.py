"""Hourly traffic traces, network aggregation and busy-hour extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Iterable, Sequence

import numpy as np

HOUR = timedelta(hours=1)
DAY_HOURS = 24

#: missing-sample policies accepted by :func:`aggregate_network`
FILL_REJECT = "reject"
FILL_INTERPOLATE = "interpolate"
MAX_INTERP_GAP_HOURS = 3


def _check_hour_aligned(ts: datetime, what: str) -> datetime:
    if ts.tzinfo is None:
        raise ValueError(f"{what} must be timezone-aware UTC, got naive {ts!r}")
    ts = ts.astimezone(timezone.utc)
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError(f"{what} must be aligned to an hour boundary, got {ts!r}")
    return ts


@dataclass(frozen=True)
class HourlyTrace:
    """One cell's hourly downlink volume series; NaN marks a missing sample."""

    cell_id: str
    start: datetime
    values: np.ndarray

    def __post_init__(self) -> None:
        start = _check_hour_aligned(self.start, "trace start")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < DAY_HOURS:
            raise ValueError(
                f"trace {self.cell_id!r} needs at least {DAY_HOURS} hourly values, got {vals.size}"
            )
        present = vals[~np.isnan(vals)]
        if present.size and present.min() < 0:
            raise ValueError(f"trace {self.cell_id!r} contains negative volumes")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> datetime:
        """First hour after the trace (exclusive)."""
        return self.start + HOUR * len(self)

    def covers(self, window: tuple[datetime, datetime]) -> bool:
        return self.start <= window[0] and window[1] <= self.end

    def index_of(self, ts: datetime) -> int:
        ts = _check_hour_aligned(ts, "timestamp")
        idx = int((ts - self.start) / HOUR)
        if not 0 <= idx < len(self):
            raise ValueError(f"timestamp {ts} outside trace coverage")
        return idx


@dataclass(frozen=True)
class AggregateSeries:
    """Hourly sums over a cell set."""

    start: datetime
    values: np.ndarray

    def __post_init__(self) -> None:
        start = _check_hour_aligned(self.start, "series start")
        vals = np.asarray(self.values, dtype=np.float64).copy()
        vals.setflags(write=False)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> datetime:
        return self.start + HOUR * len(self)

    def timestamp_at(self, index: int) -> datetime:
        return self.start + HOUR * index

    def index_of(self, ts: datetime) -> int:
        ts = _check_hour_aligned(ts, "timestamp")
        idx = int((ts - self.start) / HOUR)
        if not 0 <= idx < len(self):
            raise ValueError(f"timestamp {ts} outside series coverage")
        return idx

    def value_at(self, ts: datetime) -> float:
        return float(self.values[self.index_of(ts)])


@dataclass(frozen=True)
class BusyHourEntry:
    day: date
    timestamp: datetime
    value: float


@dataclass(frozen=True)
class BusyHourSeries:
    """Daily maxima of an hourly series, one entry per complete day."""

    entries: tuple[BusyHourEntry, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        for prev, cur in zip(entries, entries[1:]):
            if cur.day <= prev.day:
                raise ValueError("busy-hour days must be strictly increasing")
        for e in entries:
            if e.timestamp.date() != e.day:
                raise ValueError(f"busy hour {e.timestamp} falls outside its day {e.day}")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def days(self) -> list[date]:
        return [e.day for e in self.entries]

    @property
    def timestamps(self) -> list[datetime]:
        return [e.timestamp for e in self.entries]

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    def restrict(self, first: date, last: date) -> "BusyHourSeries":
        """Entries with first <= day <= last."""
        return BusyHourSeries(tuple(e for e in self.entries if first <= e.day <= last))


def _resolve_missing(values: np.ndarray, fill: str, cell_id: str) -> np.ndarray:
    mask = np.isnan(values)
    if not mask.any():
        return values
    if fill == FILL_REJECT:
        raise ValueError(
            f"trace {cell_id!r} has {int(mask.sum())} missing samples and no fill policy"
        )
    if fill != FILL_INTERPOLATE:
        raise ValueError(f"unknown fill policy {fill!r}")
    if mask[0] or mask[-1]:
        raise ValueError(f"trace {cell_id!r}: cannot interpolate missing samples at the edges")
    # reject gaps longer than the interpolation limit
    run = 0
    for m in mask:
        run = run + 1 if m else 0
        if run > MAX_INTERP_GAP_HOURS:
            raise ValueError(
                f"trace {cell_id!r}: missing gap exceeds {MAX_INTERP_GAP_HOURS} h, refusing to interpolate"
            )
    out = values.copy()
    idx = np.arange(values.size)
    out[mask] = np.interp(idx[mask], idx[~mask], values[~mask])
    return out


def aggregate_network(
    traces: Iterable[HourlyTrace],
    window: tuple[datetime, datetime] | None = None,
    fill: str = FILL_REJECT,
) -> AggregateSeries:
    """Sum traces hour by hour over ``window`` (half-open, defaults to the common span).

    Traces are summed in cell_id order so that repeated runs and
    partition/recombine operations are bit-reproducible.
    """
    traces = sorted(traces, key=lambda t: t.cell_id)
    if not traces:
        raise ValueError("cannot aggregate an empty trace set")
    if window is None:
        start = max(t.start for t in traces)
        end = min(t.end for t in traces)
    else:
        start = _check_hour_aligned(window[0], "window start")
        end = _check_hour_aligned(window[1], "window end")
    n = int((end - start) / HOUR)
    if n <= 0:
        raise ValueError("window is empty or traces share no common span")
    total = np.zeros(n)
    for tr in traces:
        if not tr.covers((start, end)):
            raise ValueError(f"trace {tr.cell_id!r} does not cover the window {start}..{end}")
        off = int((start - tr.start) / HOUR)
        vals = _resolve_missing(np.asarray(tr.values[off : off + n]), fill, tr.cell_id)
        total += vals
    return AggregateSeries(start=start, values=total)


def extract_busy_hours(series: AggregateSeries | HourlyTrace) -> BusyHourSeries:
    """Daily maxima over complete UTC days; ties resolve to the earliest hour."""
    start, values = series.start, series.values
    if np.isnan(values).any():
        raise ValueError("series has unresolved missing values; resolve them before extraction")
    first = start if start.hour == 0 else start.replace(hour=0) + timedelta(days=1)
    offset = int((first - start) / HOUR)
    n_days = (values.size - offset) // DAY_HOURS
    if n_days < 1:
        raise ValueError("series does not span a complete UTC day")
    entries = []
    for d in range(n_days):
        lo = offset + d * DAY_HOURS
        day_vals = values[lo : lo + DAY_HOURS]
        hour = int(np.argmax(day_vals))  # argmax returns the earliest maximum
        ts = first + timedelta(days=d, hours=hour)
        entries.append(BusyHourEntry(day=ts.date(), timestamp=ts, value=float(day_vals[hour])))
    return BusyHourSeries(tuple(entries))


def sample_at_timestamps(series: AggregateSeries, timestamps: Sequence[datetime]) -> np.ndarray:
    """Values of ``series`` at the given hour timestamps, in order."""
    return np.array([series.value_at(ts) for ts in timestamps])

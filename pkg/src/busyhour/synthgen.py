"""Deterministic synthetic traffic scenarios with planted archetype labels.

Substitutes for real network data at desk scale: every cell draws an
amplitude and multiplicative Gaussian noise from a per-cell substream of
the scenario seed, so regeneration is bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .series import DAY_HOURS, HourlyTrace


@dataclass(frozen=True)
class ArchetypeSpec:
    name: str
    workday_profile: np.ndarray
    saturday_profile: np.ndarray
    sunday_profile: np.ndarray
    amplitude_range: tuple[float, float]
    noise_sigma: float = 0.0
    trend_slope: float = 0.0

    def __post_init__(self) -> None:
        for attr in ("workday_profile", "saturday_profile", "sunday_profile"):
            vals = np.asarray(getattr(self, attr), dtype=np.float64)
            if vals.shape != (DAY_HOURS,):
                raise ValueError(f"{attr} must hold exactly {DAY_HOURS} values")
            if np.any(vals < 0):
                raise ValueError(f"{attr} must be non-negative")
            object.__setattr__(self, attr, vals)
        lo, hi = self.amplitude_range
        if not 0 <= lo <= hi:
            raise ValueError("amplitude range must satisfy 0 <= min <= max")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    def profile_for(self, weekday: int) -> np.ndarray:
        if weekday < 5:
            return self.workday_profile
        return self.saturday_profile if weekday == 5 else self.sunday_profile


@dataclass(frozen=True)
class ScenarioSpec:
    mix: tuple[tuple[ArchetypeSpec, int], ...]
    start: datetime
    days: int
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mix", tuple((a, int(n)) for a, n in self.mix))
        if sum(n for _, n in self.mix) < 1:
            raise ValueError("scenario needs at least one cell")
        if self.days < 7:
            raise ValueError("scenario must span at least 7 days")
        start = self.start
        if start.tzinfo is None:
            start = start.replace(tzinfo=timezone.utc)
        if start.hour or start.minute or start.second:
            raise ValueError("scenario start must be midnight UTC")
        object.__setattr__(self, "start", start.astimezone(timezone.utc))
        for arch, _ in self.mix:
            if 1.0 + arch.trend_slope * (self.days - 1) < 0:
                raise ValueError(f"archetype {arch.name!r}: trend drives amplitudes negative")

    @property
    def n_cells(self) -> int:
        return sum(n for _, n in self.mix)


def _ramp(pairs: list[tuple[int, float]]) -> np.ndarray:
    """Piecewise-linear 24-hour profile through (hour, level) anchor points."""
    hours = [h for h, _ in pairs]
    levels = [v for _, v in pairs]
    return np.interp(np.arange(24), hours, levels, period=24)


def builtin_archetypes() -> tuple[ArchetypeSpec, ...]:
    """Five hand-authored templates: two residential, business, transport, noise."""
    r1_work = _ramp([(0, 0.40), (4, 0.15), (8, 0.55), (9, 0.42), (13, 0.38), (18, 0.55), (21, 1.00), (22, 0.92), (23, 0.62)])
    r1_weekend = _ramp([(0, 0.46), (4, 0.17), (9, 0.35), (13, 0.48), (18, 0.60), (21, 1.00), (22, 0.90), (23, 0.65)])
    r2_work = _ramp([(0, 0.55), (4, 0.35), (8, 0.72), (13, 0.80), (18, 0.85), (21, 1.00), (22, 0.95), (23, 0.72)])
    r2_weekend = _ramp([(0, 0.58), (4, 0.38), (9, 0.75), (13, 0.85), (18, 0.88), (21, 1.00), (22, 0.94), (23, 0.74)])
    b_work = _ramp([(0, 0.08), (6, 0.10), (8, 0.55), (9, 0.90), (11, 1.00), (13, 0.92), (16, 0.95), (18, 0.60), (20, 0.20), (23, 0.08)])
    b_weekend = _ramp([(0, 0.06), (8, 0.10), (12, 0.14), (18, 0.10), (23, 0.06)])
    t_work = _ramp([(0, 0.08), (5, 0.12), (7, 0.60), (8, 1.00), (9, 0.55), (12, 0.45), (16, 0.55), (18, 0.95), (19, 0.50), (22, 0.15), (23, 0.10)])
    t_weekend = _ramp([(0, 0.05), (8, 0.12), (12, 0.15), (18, 0.13), (23, 0.05)])
    u_flat = _ramp([(0, 0.30), (6, 0.32), (12, 0.30), (18, 0.31), (23, 0.30)])
    return (
        ArchetypeSpec(
            name="residential_evening",
            workday_profile=r1_work,
            saturday_profile=r1_weekend,
            sunday_profile=r1_weekend,
            amplitude_range=(8e5, 1.2e6),
        ),
        ArchetypeSpec(
            name="residential_soft",
            workday_profile=r2_work,
            saturday_profile=r2_weekend,
            sunday_profile=r2_weekend,
            amplitude_range=(5e5, 8e5),
        ),
        ArchetypeSpec(
            name="business",
            workday_profile=b_work,
            saturday_profile=b_weekend,
            sunday_profile=b_weekend,
            amplitude_range=(4e5, 6e5),
        ),
        ArchetypeSpec(
            name="transport",
            workday_profile=t_work,
            saturday_profile=t_weekend,
            sunday_profile=t_weekend,
            amplitude_range=(4e5, 7e5),
        ),
        ArchetypeSpec(
            name="noise",
            workday_profile=u_flat,
            saturday_profile=u_flat,
            sunday_profile=u_flat,
            amplitude_range=(1e3, 3e3),
            noise_sigma=0.5,
        ),
    )


def generate_scenario(spec: ScenarioSpec) -> tuple[list[HourlyTrace], dict[str, str]]:
    """Per-cell hourly traces plus the planted archetype label of every cell.

    value = amplitude * profile[class][hour] * (1 + trend_slope*day)
            * max(0, 1 + Normal(0, noise_sigma)).
    """
    traces: list[HourlyTrace] = []
    labels: dict[str, str] = {}
    cell_index = 0
    weekday0 = spec.start.weekday()
    for arch, count in spec.mix:
        day_profiles = np.stack(
            [arch.profile_for((weekday0 + d) % 7) for d in range(spec.days)]
        )
        trend = 1.0 + arch.trend_slope * np.arange(spec.days)[:, None]
        clean = day_profiles * trend  # (days, 24)
        for _ in range(count):
            rng = np.random.default_rng([spec.seed, cell_index])
            amplitude = rng.uniform(*arch.amplitude_range)
            noise = np.maximum(0.0, 1.0 + rng.normal(0.0, arch.noise_sigma, size=clean.shape))
            values = (amplitude * clean * noise).reshape(-1)
            cid = f"cell{cell_index:04d}"
            traces.append(HourlyTrace(cell_id=cid, start=spec.start, values=values))
            labels[cid] = arch.name
            cell_index += 1
    return traces, labels

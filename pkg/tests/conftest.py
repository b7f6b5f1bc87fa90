"""Shared fixtures: small deterministic scenarios reused across test modules."""

from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
import pytest

from busyhour.series import HourlyTrace
from busyhour.synthgen import ArchetypeSpec, ScenarioSpec, builtin_archetypes, generate_scenario

UTC_START = datetime(2024, 1, 1, tzinfo=timezone.utc)


def with_noise(arch: ArchetypeSpec, sigma: float, trend: float = 0.0) -> ArchetypeSpec:
    return ArchetypeSpec(
        name=arch.name,
        workday_profile=arch.workday_profile,
        saturday_profile=arch.saturday_profile,
        sunday_profile=arch.sunday_profile,
        amplitude_range=arch.amplitude_range,
        noise_sigma=sigma,
        trend_slope=trend,
    )


def make_scenario(counts, days, seed, sigma=0.05, trend=0.0, start=UTC_START):
    """Scenario over the first len(counts) built-in archetypes."""
    archetypes = builtin_archetypes()
    mix = tuple(
        (with_noise(arch, max(arch.noise_sigma, sigma), trend), n)
        for arch, n in zip(archetypes, counts)
        if n > 0
    )
    return ScenarioSpec(mix=mix, start=start, days=days, seed=seed)


@pytest.fixture(scope="session")
def small_network():
    """18 cells over 3 archetypes, 10 weeks: enough for short pipeline splits."""
    traces, labels = generate_scenario(make_scenario([6, 6, 6], days=70, seed=1))
    return traces, labels


def constant_trace(cell_id: str, value: float, hours: int = 48, start=UTC_START) -> HourlyTrace:
    return HourlyTrace(cell_id=cell_id, start=start, values=np.full(hours, value))

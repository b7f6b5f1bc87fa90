"""Trace aggregation, busy-hour extraction and timestamp sampling."""

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from busyhour.series import (
    HourlyTrace,
    aggregate_network,
    extract_busy_hours,
    sample_at_timestamps,
)
from busyhour.synthgen import builtin_archetypes, generate_scenario

from conftest import UTC_START, constant_trace, make_scenario


class TestHourlyTrace:
    def test_rejects_short_trace(self):
        with pytest.raises(ValueError, match="at least 24"):
            HourlyTrace("c", UTC_START, np.ones(10))

    def test_rejects_negative_values(self):
        values = np.ones(24)
        values[3] = -1.0
        with pytest.raises(ValueError, match="negative"):
            HourlyTrace("c", UTC_START, values)

    def test_rejects_unaligned_start(self):
        with pytest.raises(ValueError, match="hour boundary"):
            HourlyTrace("c", UTC_START + timedelta(minutes=30), np.ones(24))

    def test_rejects_naive_timestamp(self):
        with pytest.raises(ValueError, match="timezone-aware"):
            HourlyTrace("c", datetime(2024, 1, 1), np.ones(24))

    def test_values_are_read_only(self):
        tr = constant_trace("c", 1.0)
        with pytest.raises(ValueError):
            tr.values[0] = 5.0


class TestAggregateNetwork:
    def test_two_constant_traces_sum(self):
        traces = [constant_trace("a", 1.0, 24), constant_trace("b", 1.0, 24)]
        agg = aggregate_network(traces)
        assert agg.values.shape == (24,)
        np.testing.assert_array_equal(agg.values, 2.0)

    def test_single_trace_identity(self):
        rng = np.random.default_rng(0)
        vals = rng.uniform(0, 10, size=48)
        tr = HourlyTrace("a", UTC_START, vals)
        agg = aggregate_network([tr])
        np.testing.assert_array_equal(agg.values, vals)

    def test_matches_column_sum_oracle(self):
        traces, _ = generate_scenario(make_scenario([20, 20, 10], days=7, seed=3))
        agg = aggregate_network(traces)
        # independent oracle: stack all traces and sum columns
        matrix = np.stack([t.values for t in traces])
        oracle = matrix.sum(axis=0)
        np.testing.assert_allclose(agg.values, oracle, rtol=1e-9)

    def test_partition_additivity(self):
        traces, _ = generate_scenario(make_scenario([10, 10], days=7, seed=4))
        whole = aggregate_network(traces).values
        part = aggregate_network(traces[:7]).values + aggregate_network(traces[7:]).values
        np.testing.assert_allclose(part, whole, rtol=1e-9)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            aggregate_network([])

    def test_window_outside_coverage(self):
        tr = constant_trace("a", 1.0, 24)
        window = (UTC_START - timedelta(hours=2), UTC_START + timedelta(hours=10))
        with pytest.raises(ValueError, match="does not cover"):
            aggregate_network([tr], window=window)

    def test_missing_values_rejected_by_default(self):
        vals = np.ones(48)
        vals[5] = np.nan
        tr = HourlyTrace("a", UTC_START, vals)
        with pytest.raises(ValueError, match="missing"):
            aggregate_network([tr])

    def test_short_gap_interpolated(self):
        vals = np.arange(48, dtype=float)
        vals[10:12] = np.nan
        tr = HourlyTrace("a", UTC_START, vals)
        agg = aggregate_network([tr], fill="interpolate")
        np.testing.assert_allclose(agg.values, np.arange(48))

    def test_long_gap_refused(self):
        vals = np.ones(48)
        vals[10:15] = np.nan
        tr = HourlyTrace("a", UTC_START, vals)
        with pytest.raises(ValueError, match="exceeds"):
            aggregate_network([tr], fill="interpolate")


class TestExtractBusyHours:
    def test_tie_break_earliest(self):
        tr = constant_trace("a", 1.0, 24)
        bh = extract_busy_hours(tr)
        assert len(bh) == 1
        assert bh.entries[0].timestamp.hour == 0
        assert bh.entries[0].value == 1.0

    def test_ramp_day_peaks_at_23(self):
        tr = HourlyTrace("a", UTC_START, np.arange(24, dtype=float))
        bh = extract_busy_hours(tr)
        assert bh.entries[0].timestamp.hour == 23
        assert bh.entries[0].value == 23.0

    def test_template_peak_matches_brute_force(self):
        traces, _ = generate_scenario(make_scenario([1], days=7, seed=5, sigma=0.0))
        tr = traces[0]
        bh = extract_busy_hours(tr)
        assert len(bh) == 7
        for d, entry in enumerate(bh.entries):
            day = tr.values[d * 24 : (d + 1) * 24]
            # brute-force scan oracle
            best_hour, best_val = 0, day[0]
            for h in range(24):
                if day[h] > best_val:
                    best_hour, best_val = h, day[h]
            assert entry.timestamp.hour == best_hour
            assert entry.value == best_val

    def test_incomplete_days_dropped(self):
        tr = HourlyTrace("a", UTC_START + timedelta(hours=20), np.ones(24 + 8))
        bh = extract_busy_hours(tr)  # 4h before midnight + 24h + 4h after
        assert len(bh) == 1

    def test_no_complete_day_errors(self):
        tr = HourlyTrace("a", UTC_START + timedelta(hours=5), np.ones(24))
        with pytest.raises(ValueError, match="complete"):
            extract_busy_hours(tr)

    def test_dominance_invariant(self, small_network):
        traces, _ = small_network
        agg = aggregate_network(traces)
        bh = extract_busy_hours(agg)
        for d, entry in enumerate(bh.entries):
            day = agg.values[d * 24 : (d + 1) * 24]
            assert np.all(day <= entry.value)


class TestSampleAtTimestamps:
    def test_self_sampling_returns_busy_values(self, small_network):
        traces, _ = small_network
        agg = aggregate_network(traces)
        bh = extract_busy_hours(agg)
        sampled = sample_at_timestamps(agg, bh.timestamps)
        np.testing.assert_array_equal(sampled, bh.values)

    def test_partition_additivity_at_busy_hours(self, small_network):
        traces, _ = small_network
        agg = aggregate_network(traces)
        bh = extract_busy_hours(agg)
        groups = [traces[:5], traces[5:11], traces[11:]]
        total = sum(
            sample_at_timestamps(aggregate_network(g), bh.timestamps) for g in groups
        )
        np.testing.assert_allclose(total, bh.values, rtol=1e-9)

    def test_matches_direct_lookup_oracle(self, small_network):
        traces, _ = small_network
        agg = aggregate_network(traces)
        bh = extract_busy_hours(agg)
        clusters = {0: traces[:4], 1: traces[4:9], 2: traces[9:14], 3: traces[14:]}
        for members in clusters.values():
            sub = aggregate_network(members)
            sampled = sample_at_timestamps(sub, bh.timestamps)
            oracle = np.array(
                [sub.values[int((ts - sub.start).total_seconds() // 3600)] for ts in bh.timestamps]
            )
            np.testing.assert_array_equal(sampled, oracle)

    def test_timestamp_outside_coverage(self):
        tr = constant_trace("a", 1.0, 24)
        agg = aggregate_network([tr])
        with pytest.raises(ValueError, match="outside"):
            sample_at_timestamps(agg, [UTC_START + timedelta(hours=100)])

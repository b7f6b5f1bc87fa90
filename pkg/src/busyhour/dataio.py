"""CSV/JSON input and output: trace ingestion, cluster reports, evaluation artifacts.

Every artifact is written to a temporary file and atomically renamed, so
a crashed run never leaves a partial file behind.  Floats are formatted
with repr, which round-trips exactly and keeps repeated runs byte-identical.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .clustering import ClusterModel, KSelection
from .pipeline import EvaluationReport, ForecastRun
from .series import HOUR, HourlyTrace

TRACE_HEADER = ["cell_id", "timestamp_iso8601_utc", "dl_bytes"]


class IngestError(ValueError):
    """Malformed input file; message lists offending line numbers."""


@dataclass
class IngestReport:
    rows: int = 0
    cells: int = 0
    complete_days: int = 0
    missing_values: int = 0
    duplicates: int = 0
    malformed: list[tuple[int, str]] = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def rows_per_second(self) -> float:
        return self.rows / self.elapsed_s if self.elapsed_s > 0 else float("inf")

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cells": self.cells,
            "complete_days": self.complete_days,
            "missing_values": self.missing_values,
            "duplicates": self.duplicates,
            "malformed_lines": [list(m) for m in self.malformed],
            "rows_per_second": round(self.rows_per_second, 1),
        }


def _atomic_open(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    return fd, Path(tmp)


def atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = _atomic_open(path)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _parse_timestamp(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError(f"timestamp {raw!r} is not hour-aligned")
    return ts


def read_traces_csv(path: str | Path, strict: bool = False) -> tuple[list[HourlyTrace], IngestReport]:
    """Ingest ``cell_id,timestamp_iso8601_utc,dl_bytes`` rows into hourly traces.

    ``dl_bytes`` is a non-negative integer or the literal ``NA``; hours
    absent between a cell's first and last row become missing samples.
    Strict mode additionally rejects duplicate (cell, hour) pairs.
    """
    path = Path(path)
    report = IngestReport()
    t0 = time.perf_counter()
    per_cell: dict[str, dict[datetime, float]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRACE_HEADER:
            raise IngestError(f"unexpected header {header!r}; want {','.join(TRACE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                report.malformed.append((lineno, f"expected 3 fields, got {len(row)}"))
                continue
            cell, raw_ts, raw_val = (f.strip() for f in row)
            try:
                ts = _parse_timestamp(raw_ts)
            except ValueError as exc:
                report.malformed.append((lineno, str(exc)))
                continue
            if raw_val == "NA":
                val = float("nan")
                report.missing_values += 1
            else:
                try:
                    val = float(int(raw_val))
                    if val < 0:
                        raise ValueError
                except ValueError:
                    report.malformed.append((lineno, f"dl_bytes {raw_val!r} is not a non-negative integer or NA"))
                    continue
            bucket = per_cell.setdefault(cell, {})
            if ts in bucket:
                report.duplicates += 1
                if strict:
                    raise IngestError(f"line {lineno}: duplicate sample for ({cell}, {raw_ts})")
            bucket[ts] = val
            report.rows += 1
    if report.malformed:
        first = "; ".join(f"line {ln}: {msg}" for ln, msg in report.malformed[:5])
        raise IngestError(f"{len(report.malformed)} malformed rows ({first})")
    traces = []
    for cell in sorted(per_cell):
        samples = per_cell[cell]
        start = min(samples)
        end = max(samples)
        n = int((end - start) / HOUR) + 1
        values = np.full(n, np.nan)
        for ts, val in samples.items():
            values[int((ts - start) / HOUR)] = val
        inside_gaps = int(np.isnan(values).sum()) - sum(1 for v in samples.values() if np.isnan(v))
        report.missing_values += inside_gaps
        traces.append(HourlyTrace(cell_id=cell, start=start, values=values))
    report.cells = len(traces)
    report.complete_days = sum(len(t) // 24 for t in traces)
    report.elapsed_s = time.perf_counter() - t0
    return traces, report


def write_traces_csv(traces: list[HourlyTrace], path: str | Path) -> None:
    lines = [",".join(TRACE_HEADER)]
    for tr in sorted(traces, key=lambda t: t.cell_id):
        for i, val in enumerate(tr.values):
            ts = (tr.start + HOUR * i).strftime("%Y-%m-%dT%H:%M:%SZ")
            out = "NA" if np.isnan(val) else str(int(round(val)))
            lines.append(f"{tr.cell_id},{ts},{out}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def write_labels_csv(labels: dict[str, str], path: str | Path) -> None:
    lines = ["cell_id,archetype"]
    lines += [f"{cid},{labels[cid]}" for cid in sorted(labels)]
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_labels_csv(path: str | Path) -> dict[str, str]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["cell_id", "archetype"]:
            raise IngestError(f"unexpected labels header {header!r}")
        return {row[0]: row[1] for row in reader if row}


def write_cluster_report(
    model: ClusterModel, selection: KSelection | None, out_dir: str | Path
) -> None:
    """cluster_report.csv, centroids.csv and cluster_summary.json under ``out_dir``."""
    out = Path(out_dir)
    lines = ["cell_id,cluster_index,silhouette"]
    for cid in sorted(model.assignments):
        lines.append(f"{cid},{model.assignments[cid]},{model.per_cell_silhouette[cid]!r}")
    atomic_write_text(out / "cluster_report.csv", "\n".join(lines) + "\n")

    lines = ["cluster_index,hour_index,value"]
    for c in range(model.k):
        for h in range(model.centroids.shape[1]):
            lines.append(f"{c},{h},{model.centroids[c, h]!r}")
    atomic_write_text(out / "centroids.csv", "\n".join(lines) + "\n")

    summary = {
        "k": model.k,
        "seed": model.seed,
        "inertia": model.inertia,
        "mean_silhouette": model.mean_silhouette(),
        "grid_scores": {str(k): v for k, v in (selection.scores if selection else {}).items()},
        "weak_structure": selection.weak_structure if selection else None,
        "traffic_share": model.traffic_share.tolist() if model.traffic_share is not None else None,
        "cluster_sizes": [len(model.members(c)) for c in range(model.k)],
        "labels": model.labels,
    }
    atomic_write_text(out / "cluster_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")


def format_report_csv(report: EvaluationReport) -> str:
    lines = ["method,approach,tl_months,la_months,status,mape_pct,mpe_peak_pct,n_days,error"]
    for r in report.rows:
        mape_s = "" if r.mape is None else repr(r.mape)
        mpe_s = "" if r.mpe_peak is None else repr(r.mpe_peak)
        err = r.error.replace(",", ";").replace("\n", " ")
        lines.append(
            f"{r.method},{r.approach},{r.tl_months},{r.la_months},{r.status},{mape_s},{mpe_s},{r.n_days},{err}"
        )
    return "\n".join(lines) + "\n"


def write_evaluation(
    report: EvaluationReport,
    forecasts: dict[tuple, ForecastRun],
    out_dir: str | Path,
    extra_summary: dict | None = None,
) -> None:
    """report.csv, per-grid-cell forecast CSVs and summary.json under ``out_dir``."""
    out = Path(out_dir)
    atomic_write_text(out / "report.csv", format_report_csv(report))
    for (method, approach, tl, la), run in sorted(forecasts.items()):
        lines = ["date,actual,predicted"]
        for day, a, p in zip(run.days, run.actual, run.predicted):
            lines.append(f"{day.isoformat()},{a!r},{p!r}")
        name = f"{method}_{approach}_TL{tl}_LA{la}.csv"
        atomic_write_text(out / "forecasts" / name, "\n".join(lines) + "\n")
    summary = {
        "train_end": report.train_end.isoformat(),
        "seed": report.seed,
        "rows": len(report.rows),
        "ok": sum(1 for r in report.rows if r.status == "ok"),
        "failed": sum(1 for r in report.rows if r.status == "failed"),
        "best": _best_rows(report),
    }
    if extra_summary:
        summary.update(extra_summary)
    atomic_write_text(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _best_rows(report: EvaluationReport) -> dict:
    best: dict[str, dict] = {}
    for r in report.rows:
        if r.status != "ok":
            continue
        cur = best.get(r.approach)
        if cur is None or r.mape < cur["mape_pct"]:
            best[r.approach] = {
                "method": r.method,
                "tl_months": r.tl_months,
                "la_months": r.la_months,
                "mape_pct": r.mape,
                "mpe_peak_pct": r.mpe_peak,
            }
    return best


def write_decomposition_csv(result, path: str | Path) -> None:
    """Plot-ready component export: index, seasonal, trend, residual."""
    lines = ["index,seasonal,trend,residual"]
    for i in range(len(result.seasonal)):
        lines.append(f"{i},{result.seasonal[i]!r},{result.trend[i]!r},{result.residual[i]!r}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")

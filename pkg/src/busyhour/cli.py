"""Command-line front end: synth, ingest, cluster, forecast, evaluate.

Exit codes: 0 success, 1 configuration/validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import _kernels
from .clustering import select_k, served_traffic_share
from .config import ConfigError, RunConfig, clustering_window, load_config
from .dataio import (
    IngestError,
    atomic_write_text,
    read_traces_csv,
    write_cluster_report,
    write_evaluation,
    write_labels_csv,
    write_traces_csv,
)
from .lstm import LstmConfig
from .pipeline import add_months, forecast_series, grid_evaluate
from .series import aggregate_network, extract_busy_hours
from .signatures import build_weekly_signatures
from .synthgen import ArchetypeSpec, ScenarioSpec, builtin_archetypes, generate_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _lstm_config(cfg: RunConfig) -> LstmConfig:
    overrides = {}
    if cfg.lstm.epochs is not None:
        overrides["epochs"] = cfg.lstm.epochs
    if cfg.lstm.batch_size is not None:
        overrides["batch_size"] = cfg.lstm.batch_size
    if cfg.lstm.learning_rate is not None:
        overrides["learning_rate"] = cfg.lstm.learning_rate
    return LstmConfig.preset(cfg.profile, **overrides)


def _require_dataset(cfg: RunConfig) -> Path:
    if cfg.dataset is None:
        raise ConfigError("no dataset path configured (set 'dataset' in the config file)")
    if not Path(cfg.dataset).exists():
        raise ConfigError(f"dataset file not found: {cfg.dataset}")
    return Path(cfg.dataset)


def cmd_synth(cfg: RunConfig, args: argparse.Namespace) -> int:
    archetypes = builtin_archetypes()
    mix = []
    for arch, count in zip(archetypes, cfg.synth.cells_per_archetype):
        tweaked = ArchetypeSpec(
            name=arch.name,
            workday_profile=arch.workday_profile,
            saturday_profile=arch.saturday_profile,
            sunday_profile=arch.sunday_profile,
            amplitude_range=arch.amplitude_range,
            noise_sigma=max(arch.noise_sigma, cfg.synth.noise_sigma),
            trend_slope=cfg.synth.trend_slope,
        )
        mix.append((tweaked, count))
    start = datetime.fromisoformat(cfg.synth.start).replace(tzinfo=timezone.utc)
    spec = ScenarioSpec(mix=tuple(mix), start=start, days=cfg.synth.days, seed=cfg.seed)
    traces, labels = generate_scenario(spec)
    out = Path(cfg.output_dir)
    write_traces_csv(traces, out / "traces.csv")
    write_labels_csv(labels, out / "labels.csv")
    print(f"wrote {len(traces)} cells x {cfg.synth.days} days to {out / 'traces.csv'}")
    return EXIT_OK


def cmd_ingest(cfg: RunConfig, args: argparse.Namespace) -> int:
    path = Path(args.path) if args.path else _require_dataset(cfg)
    if not path.exists():
        raise ConfigError(f"dataset file not found: {path}")
    traces, report = read_traces_csv(path, strict=args.strict)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _load_and_cluster(cfg: RunConfig):
    traces, _ = read_traces_csv(_require_dataset(cfg))
    window = clustering_window(cfg, min(t.start for t in traces))
    sigs, skipped = build_weekly_signatures(traces, window, cfg.clustering.normalization)
    selection = select_k(
        sigs,
        k_range=range(cfg.clustering.k_min, cfg.clustering.k_max + 1),
        seed=cfg.seed,
        restarts=cfg.clustering.restarts,
    )
    model = selection.model
    served_traffic_share(model, traces, window)
    return traces, model, selection, skipped


def cmd_cluster(cfg: RunConfig, args: argparse.Namespace) -> int:
    traces, model, selection, skipped = _load_and_cluster(cfg)
    write_cluster_report(model, selection, cfg.output_dir)
    flag = " (weak structure)" if selection.weak_structure else ""
    print(f"k={selection.best_k}{flag}, mean silhouette {selection.scores[selection.best_k]:.3f}")
    if skipped:
        print(f"{len(skipped)} zero-signal cells left unclassified")
    active = model.active_clusters(cfg.clustering.exclude_share_below)
    print(f"active clusters (share >= {cfg.clustering.exclude_share_below:.2%}): {active}")
    return EXIT_OK


def cmd_forecast(cfg: RunConfig, args: argparse.Namespace) -> int:
    """Fit on the trailing training window and forecast past the end of the data."""
    traces, _ = read_traces_csv(_require_dataset(cfg))
    agg = aggregate_network(traces)
    bh = extract_busy_hours(agg)
    train_end = bh.days[-1]
    train_start = add_months(train_end, -cfg.forecast.tl_months) + timedelta(days=1)
    train = bh.restrict(train_start, train_end)
    predicted = forecast_series(
        train.values,
        cfg.forecast.horizon_days,
        cfg.forecast.method,
        seed=cfg.seed,
        use_boxcox=cfg.evaluate.boxcox,
        sa_order=cfg.evaluate.sa_order,
        lstm_config=_lstm_config(cfg),
    )
    lines = ["date,predicted"]
    for i, val in enumerate(predicted):
        lines.append(f"{(train_end + timedelta(days=i + 1)).isoformat()},{val!r}")
    out = Path(cfg.output_dir) / "forecast.csv"
    atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"wrote {cfg.forecast.horizon_days}-day {cfg.forecast.method} forecast to {out}")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args: argparse.Namespace) -> int:
    cluster_model = None
    if "CA" in cfg.evaluate.approaches:
        traces, cluster_model, selection, _ = _load_and_cluster(cfg)
    else:
        traces, _ = read_traces_csv(_require_dataset(cfg))
    agg = aggregate_network(traces)
    bh = extract_busy_hours(agg)
    train_end = cfg.evaluate.train_end
    if train_end is None:
        # leave the largest look-ahead window for testing
        train_end = add_months(bh.days[-1], -max(cfg.evaluate.la_months))
    report, forecasts = grid_evaluate(
        traces,
        cluster_model,
        cfg.evaluate.methods,
        cfg.evaluate.approaches,
        cfg.evaluate.tl_months,
        cfg.evaluate.la_months,
        train_end,
        seed=cfg.seed,
        use_boxcox=cfg.evaluate.boxcox,
        sa_order=cfg.evaluate.sa_order,
        lstm_config=_lstm_config(cfg),
        min_share=cfg.clustering.exclude_share_below,
        workers=cfg.workers,
        keep_forecasts=True,
    )
    extra = {"profile": cfg.profile, "kernel_backend": _kernels.backend()}
    write_evaluation(report, forecasts, cfg.output_dir, extra)
    ok = sum(1 for r in report.rows if r.status == "ok")
    print(f"evaluated {len(report.rows)} grid cells ({ok} ok) -> {Path(cfg.output_dir) / 'report.csv'}")
    failed = [r for r in report.rows if r.status == "failed"]
    for r in failed[:10]:
        print(f"  failed {r.method}/{r.approach} TL={r.tl_months} LA={r.la_months}: {r.error}")
    return EXIT_OK if not failed else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="busyhour",
        description="Busy-hour downlink traffic forecasting: clustering, forecasting and grid evaluation.",
    )
    parser.add_argument("--config", help="JSON run configuration file")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--profile", choices=["paper", "test"], help="model size profile")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scenario (traces.csv + labels.csv)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a trace CSV and print a summary")
    p.add_argument("path", nargs="?", help="trace CSV (defaults to the configured dataset)")
    p.add_argument("--strict", action="store_true", help="reject duplicate (cell, hour) pairs")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cluster", help="build signatures, pick k, write the cluster report")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("forecast", help="forecast beyond the end of the dataset")
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="run the TLxLA backtesting grid and write report.csv")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed, "profile": args.profile})
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(cfg, args)
    except (ConfigError, IngestError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

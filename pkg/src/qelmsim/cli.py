"""Command line front end: parse a config, run sweeps, emit plot-ready tables.

Exit codes: 0 success, 2 usage error, 3 config error, 4 runtime failure,
5 partial failure (some work units failed; their keys are in failures.csv).
Output CSV bodies are a pure function of (config, tool version): records are
sorted deterministically and floats are serialized with 17 significant
digits, so re-running a config into a fresh directory reproduces them byte
for byte. Only manifest.json carries timestamps.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, harness
from .harness import ALL_METRICS, ConfigError, ExperimentRecord, SweepConfig, SweepResult
from .qelm import ShotModel

__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_CONFIG",
    "EXIT_RUNTIME",
    "EXIT_PARTIAL",
    "ENV_OUT_DIR",
    "RunManifest",
    "parse_config",
    "config_digest",
    "emit_records",
    "read_records_csv",
    "read_records_json",
    "main",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4
EXIT_PARTIAL = 5

ENV_OUT_DIR = "QELMSIM_OUT_DIR"
_DEFAULT_OUT_DIR = "qelmsim-out"

_CONFIG_KEYS = {
    "n_reservoir",
    "topologies",
    "schemes",
    "time_grid",
    "n_realizations",
    "n_train",
    "n_test",
    "shot_model",
    "master_seed",
    "rcond",
    "log_base",
    "include_haar_baseline",
    "metrics",
    "j_range",
    "delta_range",
    "bias_row",
}


@dataclass(frozen=True)
class RunManifest:
    config_digest: str | None
    tool_version: str
    started: str
    finished: str
    record_count: int
    failure_count: int


def _resolve_time_grid(value):
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "points"}
        if unknown:
            raise ConfigError(f"time_grid object has unknown keys {sorted(unknown)}")
        try:
            start, stop, points = float(value["start"]), float(value["stop"]), int(value["points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"time_grid object needs numeric start/stop/points: {exc}") from exc
        if points < 1:
            raise ConfigError("time_grid points must be >= 1")
        return tuple(float(t) for t in np.linspace(start, stop, points))
    if isinstance(value, (list, tuple)):
        return tuple(value)
    raise ConfigError(f"time_grid must be a list or a start/stop/points object, got {value!r}")


def _resolve_shot_model(value) -> ShotModel:
    if isinstance(value, str):
        return ShotModel(mode=value)
    if isinstance(value, dict):
        unknown = set(value) - {"mode", "shots"}
        if unknown:
            raise ConfigError(f"shot_model has unknown keys {sorted(unknown)}")
        try:
            return ShotModel(mode=value.get("mode", "joint_bitstrings"), shots=value.get("shots", 10**6))
        except ValueError as exc:
            raise ConfigError(f"shot_model: {exc}") from exc
    raise ConfigError(f"shot_model must be a mode string or an object, got {value!r}")


def parse_config(path=None, strict: bool = True, overlay: dict | None = None) -> SweepConfig:
    """Read a JSON config file and materialize every default.

    An empty or missing file yields the full defaults (7 reservoir qubits,
    C/R/FC topologies, both coupling schemes, 41 times on [0, 5], 500
    realizations, 50/50 train/test states, 10^6 joint-bitstring shots).
    Unknown keys are rejected under ``strict``, warned about otherwise.
    ``overlay`` supplies per-command defaults for keys absent from the file.
    """
    raw: dict = {}
    if path is not None:
        text = Path(path).read_text()
        if text.strip():
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top-level config must be an object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        message = f"unknown config keys: {sorted(unknown)}"
        if strict:
            raise ConfigError(message)
        warnings.warn(message, stacklevel=2)
        raw = {k: v for k, v in raw.items() if k in _CONFIG_KEYS}
    if overlay:
        for key, value in overlay.items():
            raw.setdefault(key, value)
    kwargs = dict(raw)
    if "time_grid" in kwargs:
        kwargs["time_grid"] = _resolve_time_grid(kwargs["time_grid"])
    if "shot_model" in kwargs:
        kwargs["shot_model"] = _resolve_shot_model(kwargs["shot_model"])
    try:
        return SweepConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def config_digest(config: SweepConfig) -> str:
    """SHA-256 of the canonical JSON form of the resolved config."""
    canonical = json.dumps(config.as_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Serialization.
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _parse_optional_float(text: str):
    return None if text == "" else float(text)


def _record_header(max_nodes: int) -> list:
    base = [
        "realization_index",
        "topology",
        "scheme",
        "n_reservoir",
        "time",
        "seed",
        "mse",
        "condition_number",
        "otoc_avg",
        "holevo_avg",
    ]
    return base + [f"chi_node_{i}" for i in range(max_nodes)]


def _write_records_csv(path: Path, records) -> None:
    max_nodes = max((len(r.holevo_per_node) for r in records if r.holevo_per_node), default=0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_record_header(max_nodes))
        for r in records:
            nodes = list(r.holevo_per_node) if r.holevo_per_node else []
            nodes += [None] * (max_nodes - len(nodes))
            writer.writerow(
                [
                    r.realization_index,
                    r.topology,
                    r.scheme,
                    r.n_reservoir,
                    _fmt(r.time),
                    r.seed,
                    _fmt(r.mse),
                    _fmt(r.condition_number),
                    _fmt(r.otoc_avg),
                    _fmt(r.holevo_avg),
                ]
                + [_fmt(v) for v in nodes]
            )


def read_records_csv(path) -> list:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        node_cols = [c for c in reader.fieldnames or [] if c.startswith("chi_node_")]
        node_cols.sort(key=lambda c: int(c.rsplit("_", 1)[1]))
        for row in reader:
            nodes = [row[c] for c in node_cols if row[c] != ""]
            records.append(
                ExperimentRecord(
                    realization_index=int(row["realization_index"]),
                    topology=row["topology"],
                    scheme=row["scheme"],
                    n_reservoir=int(row["n_reservoir"]),
                    time=_parse_optional_float(row["time"]),
                    seed=int(row["seed"]),
                    mse=_parse_optional_float(row["mse"]),
                    condition_number=_parse_optional_float(row["condition_number"]),
                    otoc_avg=_parse_optional_float(row["otoc_avg"]),
                    holevo_avg=_parse_optional_float(row["holevo_avg"]),
                    holevo_per_node=tuple(float(v) for v in nodes) if nodes else None,
                )
            )
    return records


def _record_to_dict(r: ExperimentRecord) -> dict:
    out = dataclasses.asdict(r)
    out["holevo_per_node"] = list(r.holevo_per_node) if r.holevo_per_node else None
    return out


def _write_records_json(path: Path, records) -> None:
    payload = [_record_to_dict(r) for r in records]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_records_json(path) -> list:
    with open(path) as fh:
        payload = json.load(fh)
    records = []
    for item in payload:
        nodes = item.get("holevo_per_node")
        item["holevo_per_node"] = tuple(nodes) if nodes else None
        records.append(ExperimentRecord(**item))
    return records


def _write_aggregates_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["topology", "scheme", "n_reservoir", "time", "metric", "n", "median", "q1", "q3"])
        for row in rows:
            writer.writerow(
                [
                    row.topology,
                    row.scheme,
                    row.n_reservoir,
                    _fmt(row.time),
                    row.metric,
                    row.stats.n,
                    _fmt(row.stats.median),
                    _fmt(row.stats.q1),
                    _fmt(row.stats.q3),
                ]
            )


def _write_holevo_nodes_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["topology", "scheme", "n_reservoir", "time", "node", "n", "median", "q1", "q3"])
        for row in rows:
            writer.writerow(
                [
                    row.topology,
                    row.scheme,
                    row.n_reservoir,
                    _fmt(row.time),
                    row.node,
                    row.stats.n,
                    _fmt(row.stats.median),
                    _fmt(row.stats.q1),
                    _fmt(row.stats.q3),
                ]
            )


def _agg_row_to_dict(row) -> dict:
    out = dataclasses.asdict(row)
    out["stats"] = dataclasses.asdict(row.stats)
    return out


def _write_failures_csv(path: Path, failures) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["realization_index", "topology", "scheme", "n_reservoir", "time", "error"])
        for f in failures:
            writer.writerow(
                [f.realization_index, f.topology, f.scheme, f.n_reservoir, _fmt(f.time), f.error]
            )


def emit_records(
    records,
    stats=None,
    format: str = "csv",
    out_dir=".",
    *,
    failures=(),
    config: SweepConfig | None = None,
    started: str | None = None,
    finished: str | None = None,
) -> RunManifest:
    """Write records, aggregate tables, per-node Holevo tables, and a manifest.

    ``stats`` is an (aggregate_rows, holevo_node_rows) pair; when None it is
    computed from the records. ``format`` selects csv or json for the data
    files; the manifest is always JSON.
    """
    records = list(records)
    failures = list(failures)
    if not records and not failures:
        raise ValueError("nothing to emit: no records and no failure report")
    if format not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    agg_rows, node_rows = harness.aggregate_records(records) if stats is None else stats

    try:
        if format == "csv":
            _write_records_csv(out / "records.csv", records)
            _write_aggregates_csv(out / "aggregates.csv", agg_rows)
            if node_rows:
                _write_holevo_nodes_csv(out / "holevo_nodes.csv", node_rows)
        else:
            _write_records_json(out / "records.json", records)
            with open(out / "aggregates.json", "w") as fh:
                json.dump([_agg_row_to_dict(r) for r in agg_rows], fh, indent=1, sort_keys=True)
                fh.write("\n")
            if node_rows:
                with open(out / "holevo_nodes.json", "w") as fh:
                    json.dump([_agg_row_to_dict(r) for r in node_rows], fh, indent=1, sort_keys=True)
                    fh.write("\n")
        if failures:
            _write_failures_csv(out / "failures.csv", failures)
        now = datetime.now(timezone.utc).isoformat()
        manifest = RunManifest(
            config_digest=config_digest(config) if config is not None else None,
            tool_version=__version__,
            started=started or now,
            finished=finished or now,
            record_count=len(records),
            failure_count=len(failures),
        )
        with open(out / "manifest.json", "w") as fh:
            json.dump(dataclasses.asdict(manifest), fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise RuntimeError(f"failed writing results under {out}: {exc}") from exc
    return manifest


# ---------------------------------------------------------------------------
# Command line.
# ---------------------------------------------------------------------------


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file (defaults apply when omitted)")
    parser.add_argument("--out", metavar="DIR", default=None, help=f"output directory (default ${ENV_OUT_DIR} or ./{_DEFAULT_OUT_DIR})")
    parser.add_argument("--format", choices=("csv", "json"), default="csv", help="data file format")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--threads", type=int, default=1, help="worker processes (advisory; results are schedule-independent)")
    parser.add_argument("--metrics", default=None, help=f"comma-separated subset of {','.join(ALL_METRICS)}")
    parser.add_argument("--lax", action="store_true", help="warn on unknown config keys instead of rejecting")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qelmsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qelmsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_time = sub.add_parser("sweep-time", help="metrics over the configured time grid")
    p_size = sub.add_parser("sweep-size", help="metrics over reservoir sizes (single-link coupling)")
    p_haar = sub.add_parser("baseline-haar", help="Haar-random global unitary baseline")
    for p in (p_time, p_size, p_haar):
        _add_common_arguments(p)

    p_one = sub.add_parser("single-run", help="one realization at one time, record printed to stdout")
    p_one.add_argument("--topology", required=True, help="C, R, or FC")
    p_one.add_argument("--scheme", required=True, help="SL or ML")
    p_one.add_argument("--n-reservoir", type=int, default=7)
    p_one.add_argument("--time", type=float, default=5.0)
    p_one.add_argument("--seed", type=int, default=0, help="master seed for this record")
    p_one.add_argument("--shots", type=int, default=10**6)
    p_one.add_argument("--shot-mode", default="joint_bitstrings", help="exact, joint_bitstrings, or independent_binomial")
    p_one.add_argument("--metrics", default=None, help=f"comma-separated subset of {','.join(ALL_METRICS)}")
    return parser


def _parse_metrics(text: str) -> tuple:
    metrics = tuple(m.strip() for m in text.split(",") if m.strip())
    if not metrics:
        raise ConfigError("--metrics must name at least one metric")
    return metrics


_SIZE_SWEEP_OVERLAY = {"n_reservoir": [2, 3, 4, 5, 6, 7], "time_grid": [0.25, 5.0]}


def _load_sweep_config(args, command: str) -> SweepConfig:
    overlay = _SIZE_SWEEP_OVERLAY if command == "sweep-size" else None
    cfg = parse_config(args.config, strict=not args.lax, overlay=overlay)
    replacements = {}
    if args.seed is not None:
        replacements["master_seed"] = args.seed
    if args.metrics is not None:
        replacements["metrics"] = _parse_metrics(args.metrics)
    if replacements:
        try:
            cfg = dataclasses.replace(cfg, **replacements)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg


def _cmd_sweep(args, command: str) -> int:
    cfg = _load_sweep_config(args, command)
    out_dir = args.out or os.environ.get(ENV_OUT_DIR) or _DEFAULT_OUT_DIR
    started = datetime.now(timezone.utc).isoformat()
    runner = {
        "sweep-time": harness.run_time_sweep,
        "sweep-size": harness.run_size_sweep,
        "baseline-haar": harness.run_haar_baseline,
    }[command]
    outcome: SweepResult = runner(cfg, threads=args.threads)
    records, failures = list(outcome.records), list(outcome.failures)
    if command != "baseline-haar" and cfg.include_haar_baseline:
        baseline = harness.run_haar_baseline(cfg, threads=args.threads)
        records.extend(baseline.records)
        failures.extend(baseline.failures)
    finished = datetime.now(timezone.utc).isoformat()
    emit_records(
        records,
        None,
        args.format,
        out_dir,
        failures=failures,
        config=cfg,
        started=started,
        finished=finished,
    )
    if failures:
        print(f"{len(failures)} work unit(s) failed; see failures.csv under {out_dir}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_single_run(args) -> int:
    metrics = _parse_metrics(args.metrics) if args.metrics else ALL_METRICS
    try:
        cfg = SweepConfig(
            n_reservoir=args.n_reservoir,
            topologies=(args.topology,),
            schemes=(args.scheme,),
            time_grid=(args.time,),
            n_realizations=1,
            shot_model=ShotModel(mode=args.shot_mode, shots=args.shots),
            master_seed=args.seed,
            metrics=metrics,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    outcome = harness.run_time_sweep(cfg)
    if outcome.failures:
        raise RuntimeError(f"single run failed: {outcome.failures[0].error}")
    record = outcome.records[0]
    json.dump(_record_to_dict(record), sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "single-run":
            return _cmd_single_run(args)
        return _cmd_sweep(args, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

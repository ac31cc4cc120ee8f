"""Command line runner: ``rightinverse run --config cfg.json`` and ``rightinverse list``.

A run writes ``report.json`` (check reports, deterministic for a given config
and seed), ``tables/*.csv`` and ``manifest.json`` (seed, package version,
config hash and a timestamp) to the output directory.

Exit codes: 0 when every check passes, 1 when a check fails or lacks data,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from importlib import metadata
from pathlib import Path

from .experiments import (DEFAULT_CONFIGS, ExperimentConfig, list_experiments, run_experiment)
from .exponent import PreconditionError
from .fluctuation import InsufficientData
from .levy_model import ModelSpecError
from .path_sim import ConfigError

__all__ = ["main", "build_parser", "write_artifacts", "OUT_ENV"]

log = logging.getLogger("rightinverse")

OUT_ENV = "RIGHTINVERSE_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _version() -> str:
    try:
        return metadata.version("rightinverse")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rightinverse",
                                description="Right inverse of Lévy paths: simulation checks.")
    p.add_argument("command", nargs="?", choices=["run", "list"], default="run",
                   help="run an experiment (default) or list the catalog")
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--out", type=Path, default=None,
                   help=f"output directory (default: ${OUT_ENV} or ./rightinverse-out)")
    p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides config)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: available CPUs)")
    p.add_argument("--experiment", default=None, help="experiment name (overrides config)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(args) -> ExperimentConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    name = args.experiment or data.get("experiment")
    if name is None:
        raise ConfigError("no experiment given (use --experiment or an 'experiment' key)")
    merged = dict(DEFAULT_CONFIGS.get(name, {}))
    merged.update(data)
    merged["experiment"] = name
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        merged["seed"] = args.seed
    return ExperimentConfig.from_dict(merged)


def _write_csv(path: Path, rows: list[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def write_artifacts(out: Path, cfg: ExperimentConfig, result) -> dict:
    """Write report, tables and manifest; returns the report document."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "experiment": result.name,
        "anchor": result.anchor,
        "pass": result.passed,
        "config": cfg.to_dict(),
        "config_hash": cfg.digest(),
        "info": result.info,
        "checks": [r.to_json() for r in result.reports],
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for name, rows in result.tables.items():
        _write_csv(out / "tables" / f"{name}.csv", rows)
    manifest = {
        "seed": cfg.seed,
        "version": _version(),
        "config_hash": cfg.digest(),
        "experiment": cfg.experiment,
        "tables": sorted(f"tables/{n}.csv" for n in result.tables),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return report


def _print_list():
    rows = list_experiments()
    width = max(len(r[0]) for r in rows)
    for name, desc, anchor in rows:
        print(f"{name:<{width}}  {desc}  {anchor}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        _print_list()
        return EXIT_OK
    try:
        cfg = _load_config(args)
    except (ConfigError, ModelSpecError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    workers = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(os.environ.get(OUT_ENV, "rightinverse-out"))
    try:
        result = run_experiment(cfg, workers=workers)
    except (ConfigError, ModelSpecError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InsufficientData as exc:
        print(f"FAIL {cfg.experiment}: insufficient data: {exc}", file=sys.stderr)
        return EXIT_FAIL
    write_artifacts(out, cfg, result)
    for rep in result.reports:
        print(rep.line())
    if not result.passed:
        failed = [r for r in result.reports if not r.passed]
        for r in failed:
            print(f"failed check {r.name}: statistic {r.statistic:.4g}, tolerance {r.tolerance:g}",
                  file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command line front end.

    facsim run --config cfg.json [--seed N] [--out DIR] [--parallel K]
    facsim validate --config cfg.json
    facsim summarize --series timeseries.csv

Exit codes: 0 success, 1 config error, 2 runtime failure (calibration,
missing profiles, internal faults), 3 invariant audit failure. The
FACSIM_LOG environment variable sets the log level (DEBUG, INFO, WARNING,
ERROR). Flag-usage errors follow the argparse convention (exit 2).

Run artifacts land under <out>/<mode>/<target percent>/ and are byte-stable
for a fixed config and seed. Every write happens only after the consistency
audits pass, so a failed run leaves no partial target directory behind.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, load_weights
from .distributions import derive_seed
from .engine import audit_concurrency, schedule_fifo, simulate
from .errors import AuditFailure, ConfigInvalid, ConfigParse, FacsimError
from .inference import calibrate_daily_requests, simulate_inference
from .jobgen import CalibrationTarget, calibrate_daily_jobs, validate_fits
from .metrics import periodic_profile, summarize_run, summarize_series
from .profiles import ProfileBank
from .seriesio import (read_timeseries_csv, write_json, write_periodic_csv,
                       write_timeseries_csv)

log = logging.getLogger("facsim.cli")

_SUMMARY_COLUMNS = ("power_kw", "occupied_nodes", "utilization", "incoming_pps",
                    "effective_pps", "incomplete_pps")


def _setup_logging() -> None:
    level = os.environ.get("FACSIM_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=getattr(logging, level),
                        format="%(levelname)s %(name)s: %(message)s")


def _audit_inference(result) -> None:
    recon = result.effective_pps + result.incomplete_pps
    scale = np.maximum(1.0, np.abs(result.incoming_pps))
    if np.any(np.abs(result.incoming_pps - recon) > 1e-9 * scale):
        raise AuditFailure("request split mismatch: incoming != effective + incomplete")
    if np.any(result.incomplete_pps < -1e-12):
        raise AuditFailure("negative incomplete request rate")
    if np.any(result.occupied_nodes > result.facility.n_total):
        raise AuditFailure("occupied nodes exceed the facility")
    if np.any((result.utilization < 0) | (result.utilization > 1 + 1e-12)):
        raise AuditFailure("utilization out of [0, 1]")
    floor = result.facility.idle_floor_kw
    if result.power_kw.size and float(result.power_kw.min()) < floor - 1e-6:
        raise AuditFailure("power fell below the all-idle floor")


def _flatten(payload: dict, prefix: str = "") -> list[tuple[str, object]]:
    out: list[tuple[str, object]] = []
    for key, value in payload.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            out.extend(_flatten(value, f"{dotted}."))
        else:
            out.append((dotted, value))
    return out


def _format_value(value: object) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


def write_summary_text(path: Path, payload: dict) -> None:
    """Key/value rendering of the summary, one `key = value` line, stable order."""
    lines = [f"{key} = {_format_value(value)}" for key, value in _flatten(payload)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _summaries(columns: dict[str, np.ndarray]) -> dict:
    return {name: summarize_series(columns[name]).to_dict()
            for name in _SUMMARY_COLUMNS if name in columns}


def _target_dir(out_dir: Path, mode: str, target: float) -> Path:
    return out_dir / mode / f"{round(target * 100)}"


def _write_target_artifacts(cfg: RunConfig, target: float, out_dir: Path,
                            timestamps: list[str], columns: dict[str, np.ndarray],
                            calibration: dict, summary: dict) -> Path:
    tdir = _target_dir(out_dir, cfg.mode, target)
    tdir.mkdir(parents=True, exist_ok=True)
    write_timeseries_csv(tdir / "timeseries.csv", timestamps, columns)
    write_json(tdir / "calibration.json", calibration)
    write_json(tdir / "summary.json", summary)
    write_summary_text(tdir / "summary.txt", summary)
    grid = cfg.grid()
    write_periodic_csv(tdir / "daily_profile.csv",
                       periodic_profile(columns["power_kw"], grid, "day"))
    if cfg.days >= 7:
        write_periodic_csv(tdir / "weekly_profile.csv",
                           periodic_profile(columns["power_kw"], grid, "week"))
    return tdir


def run_one_target(config_path: str, seed_override: int | None, out: str,
                   target_index: int) -> str:
    """Calibrate and simulate a single utilization target, then write artifacts.

    Standalone so process pools can run targets in parallel; everything is
    reloaded from disk, and the result depends only on the config and seed.
    """
    cfg = load_config(config_path)
    if seed_override is not None:
        cfg = RunConfig(**{**cfg.__dict__, "seed": seed_override})
    cfg.validate()
    target = cfg.targets[target_index]
    # disjoint per-target seeds keep parallel sweep workers independent
    target_seed = cfg.seed ^ target_index
    cal_target = CalibrationTarget(mu_avg_target=target,
                                   tolerance_pp=cfg.calibration.tolerance_pp,
                                   max_iterations=cfg.calibration.max_iterations)
    bank = ProfileBank.from_directory(cfg.profiles_dir)
    temporal, mix = load_weights(cfg.weights_path, cfg.mode)
    grid = cfg.grid()
    facility = cfg.facility()
    out_dir = Path(out)

    if cfg.mode == "colocation":
        mix.validate_against(bank)
        validate_fits(mix, facility.n_total)
        cal = calibrate_daily_jobs(cal_target, mix, temporal, bank,
                                   facility.n_total, grid, target_seed)
        scheduled = schedule_fifo(cal.jobs, facility.n_total)
        result = simulate(scheduled, grid, facility)
        report = audit_concurrency(result, facility)
        if not report.passed:
            raise AuditFailure(report.message)
        aggregate = summarize_run(result)
        columns = {
            "power_kw": result.power_kw,
            "occupied_nodes": result.occupied_nodes,
            "utilization": result.utilization,
            "running_jobs": result.running_jobs,
            "queued_jobs": result.queued_jobs,
        }
        calibration = {
            "daily_jobs": cal.daily_count,
            "estimated_utilization": cal.estimate,
            "achieved_utilization": result.utilization_avg,
            "iterations": cal.iterations,
            "converged": cal.converged,
            "history": [{"daily_jobs": d, "estimated_utilization": u}
                        for d, u in cal.history],
        }
        extra = {
            "energy_kwh": result.energy_kwh,
            "job_energy_kwh": result.job_energy_kwh,
            "idle_energy_kwh": result.idle_energy_kwh,
            "n_jobs": result.n_jobs,
            "truncated_jobs": result.truncated_jobs,
            "never_started_jobs": result.never_started_jobs,
        }
    else:
        cal = calibrate_daily_requests(cal_target, mix, temporal, bank,
                                       facility, grid, target_seed)
        result = simulate_inference(bank, mix, temporal, grid, facility,
                                    cal.daily_requests)
        _audit_inference(result)
        aggregate = summarize_run(result)
        columns = {
            "power_kw": result.power_kw,
            "occupied_nodes": result.occupied_nodes,
            "utilization": result.utilization,
            # active instances stand in for jobs; nothing queues in this mode
            "running_jobs": sum(result.instances.values()),
            "queued_jobs": np.zeros(grid.n_steps),
            "incoming_pps": result.incoming_pps,
            "effective_pps": result.effective_pps,
            "incomplete_pps": result.incomplete_pps,
        }
        for name in sorted(result.instances):
            columns[f"instances_{name}"] = result.instances[name]
        calibration = {
            "daily_requests": cal.daily_requests,
            "achieved_utilization": cal.utilization,
            "iterations": cal.iterations,
            "converged": cal.converged,
            "history": [{"daily_requests": d, "utilization": u}
                        for d, u in cal.history],
        }
        extra = {
            "energy_kwh": result.energy_kwh,
            "allocated_nodes": result.allocated_nodes,
            "requests": {
                "incoming": result.requests_incoming,
                "served": result.requests_served,
                "incomplete": result.requests_incomplete,
            },
        }

    summary = {
        "mode": cfg.mode,
        "target_utilization": target,
        "n_nodes": cfg.n_nodes,
        "aggregate": aggregate.to_dict(),
        "series": _summaries(columns),
    }
    summary.update(extra)
    tdir = _write_target_artifacts(cfg, target, out_dir, grid.iso_timestamps(),
                                   columns, calibration, summary)
    return str(tdir)


def _config_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = RunConfig(**{**cfg.__dict__, "seed": args.seed})
    cfg.validate()
    out = args.out if args.out is not None else (
        str(cfg.out_dir) if cfg.out_dir is not None else "out")
    out_dir = Path(out)

    worker_args = [(args.config, args.seed, out, i)
                   for i in range(len(cfg.targets))]
    if args.parallel > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            dirs = list(pool.map(run_one_target, *zip(*worker_args)))
    else:
        dirs = [run_one_target(*wa) for wa in worker_args]

    manifest = {
        "config": cfg.echo(),
        "config_sha256": _config_digest(args.config),
        "seed": cfg.seed,
        "targets": list(cfg.targets),
        "target_dirs": [str(Path(d).relative_to(out_dir)) for d in dirs],
        "versions": {
            "facsim": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    (out_dir / cfg.mode).mkdir(parents=True, exist_ok=True)
    write_json(out_dir / cfg.mode / "manifest.json", manifest)
    for target, tdir in zip(cfg.targets, dirs):
        print(f"target {target:.2f}: wrote {tdir}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    problems = cfg.violations()
    if not problems:
        try:
            load_weights(cfg.weights_path, cfg.mode)
        except ConfigParse as exc:
            problems.append(str(exc))
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return 1
    print(f"config ok: mode={cfg.mode} nodes={cfg.n_nodes} "
          f"targets={list(cfg.targets)}")
    return 0


def _cmd_summarize(args: argparse.Namespace) -> int:
    _, columns = read_timeseries_csv(args.series)
    if "power_kw" not in columns:
        raise ConfigParse(f"{args.series} has no power_kw column")
    print(json.dumps(_summaries(columns), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facsim",
        description="Facility-level energy simulation from node power profiles")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="calibrate and simulate every target")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--out", default=None,
                       help="artifact root (default: config out_dir, else ./out)")
    p_run.add_argument("--parallel", type=int, default=1,
                       help="worker processes across targets")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config and its weights file")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=_cmd_validate)

    p_sum = sub.add_parser("summarize", help="print statistics for a series CSV")
    p_sum.add_argument("--series", required=True)
    p_sum.set_defaults(func=_cmd_summarize)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParse, ConfigInvalid) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AuditFailure as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return 3
    except FacsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Run configuration: JSON on disk, validated dataclasses in memory.

A run config names the facility (node count, per-node idle and peak draw),
the horizon and reporting step, the utilization targets, the profile bank
directory, and a weights file. The weights file carries the temporal shape
(keys ``hourly``, ``day_of_week``, ``monthly``) plus the workload mix:
``type_probs`` and ``node_count_probs`` for batch mode, ``inference_mix``
for inference mode. Relative paths resolve against the config file's
directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .distributions import InferenceType, JobMixDistribution, TemporalWeights
from .engine import FacilityConfig
from .errors import (AllZeroWeights, ConfigInvalid, ConfigParse,
                     NegativeWeight)
from .profiles import WorkloadType
from .timegrid import SECONDS_PER_DAY, TimeGrid

MODES = ("colocation", "inference")

CONFIG_KEYS = {"mode", "n_nodes", "targets", "profiles_dir", "weights",
               "out_dir", "start", "days", "timestep_s", "idle_node_kw",
               "node_tdp_kw", "rated_power_mw", "seed", "calibration"}
REQUIRED_KEYS = ("mode", "n_nodes", "targets", "profiles_dir", "weights")

WEIGHT_KEYS = {"hourly", "day_of_week", "monthly", "type_probs",
               "node_count_probs", "inference_mix"}


@dataclass(frozen=True)
class CalibrationSettings:
    tolerance_pp: float = 0.5
    max_iterations: int = 40


@dataclass(frozen=True)
class RunConfig:
    mode: str
    n_nodes: int
    targets: tuple[float, ...]
    profiles_dir: Path
    weights_path: Path
    out_dir: Path | None = None  # flag --out overrides; default ./out
    start: str = "2026-01-05"  # a Monday, so weekly shapes align by default
    days: int = 30
    timestep_s: float = 60.0
    idle_node_kw: float = 0.42
    node_tdp_kw: float = 3.52
    rated_power_mw: float | None = None
    seed: int = 0
    calibration: CalibrationSettings = field(default_factory=CalibrationSettings)

    def violations(self) -> list[str]:
        out: list[str] = []
        if self.mode not in MODES:
            out.append(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_nodes < 1:
            out.append(f"n_nodes must be >= 1, got {self.n_nodes}")
        if not self.targets:
            out.append("targets must be a non-empty list")
        for t in self.targets:
            if not 0 < t <= 1:
                out.append(f"target out of (0,1]: {t}")
        if self.days < 1:
            out.append(f"days must be >= 1, got {self.days}")
        if self.timestep_s <= 0:
            out.append(f"timestep_s must be > 0, got {self.timestep_s}")
        elif SECONDS_PER_DAY % self.timestep_s != 0:
            out.append(f"timestep_s must divide a day, got {self.timestep_s}")
        if self.idle_node_kw < 0:
            out.append(f"idle_node_kw must be >= 0, got {self.idle_node_kw}")
        if self.node_tdp_kw <= 0:
            out.append(f"node_tdp_kw must be > 0, got {self.node_tdp_kw}")
        if self.idle_node_kw > self.node_tdp_kw:
            out.append("idle_node_kw cannot exceed node_tdp_kw")
        if self.rated_power_mw is not None and self.rated_power_mw <= 0:
            out.append(f"rated_power_mw must be > 0, got {self.rated_power_mw}")
        if self.seed < 0:
            out.append(f"seed must be >= 0, got {self.seed}")
        try:
            datetime.fromisoformat(self.start)
        except ValueError:
            out.append(f"start must be an ISO date, got {self.start!r}")
        if self.calibration.tolerance_pp <= 0:
            out.append("calibration.tolerance_pp must be > 0")
        if self.calibration.max_iterations < 1:
            out.append("calibration.max_iterations must be >= 1")
        if not self.profiles_dir.is_dir():
            out.append(f"profiles_dir does not exist: {self.profiles_dir}")
        if not self.weights_path.is_file():
            out.append(f"weights file does not exist: {self.weights_path}")
        return out

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ConfigInvalid(problems)

    def grid(self) -> TimeGrid:
        return TimeGrid(start=datetime.fromisoformat(self.start), days=self.days,
                        timestep_s=self.timestep_s)

    def facility(self) -> FacilityConfig:
        return FacilityConfig(n_total=self.n_nodes, node_idle_kw=self.idle_node_kw,
                              node_tdp_kw=self.node_tdp_kw,
                              rated_power_mw=self.rated_power_mw)

    def echo(self) -> dict:
        """Config as written, for the run manifest (paths as given)."""
        return {
            "mode": self.mode,
            "n_nodes": self.n_nodes,
            "targets": list(self.targets),
            "profiles_dir": str(self.profiles_dir),
            "weights": str(self.weights_path),
            "out_dir": None if self.out_dir is None else str(self.out_dir),
            "start": self.start,
            "days": self.days,
            "timestep_s": self.timestep_s,
            "idle_node_kw": self.idle_node_kw,
            "node_tdp_kw": self.node_tdp_kw,
            "rated_power_mw": self.rated_power_mw,
            "seed": self.seed,
            "calibration": {
                "tolerance_pp": self.calibration.tolerance_pp,
                "max_iterations": self.calibration.max_iterations,
            },
        }


def _read_json_object(path: Path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read {what} {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{what} {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigParse(f"{what} {path} must be a JSON object")
    return raw


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    raw = _read_json_object(path, "config")

    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        raise ConfigParse(f"config {path} has unknown keys: {unknown}")
    missing = sorted(k for k in REQUIRED_KEYS if k not in raw)
    if missing:
        raise ConfigParse(f"config {path} is missing keys: {missing}")

    cal_raw = raw.get("calibration", {})
    if not isinstance(cal_raw, dict):
        raise ConfigParse(f"config {path}: calibration must be an object")
    base = path.parent
    try:
        return RunConfig(
            mode=str(raw["mode"]),
            n_nodes=int(raw["n_nodes"]),
            targets=tuple(float(t) for t in raw["targets"]),
            profiles_dir=(base / raw["profiles_dir"]).resolve(),
            weights_path=(base / raw["weights"]).resolve(),
            out_dir=None if raw.get("out_dir") is None
            else (base / raw["out_dir"]).resolve(),
            start=str(raw.get("start", RunConfig.start)),
            days=int(raw.get("days", RunConfig.days)),
            timestep_s=float(raw.get("timestep_s", RunConfig.timestep_s)),
            idle_node_kw=float(raw.get("idle_node_kw", RunConfig.idle_node_kw)),
            node_tdp_kw=float(raw.get("node_tdp_kw", RunConfig.node_tdp_kw)),
            rated_power_mw=None if raw.get("rated_power_mw") is None
            else float(raw["rated_power_mw"]),
            seed=int(raw.get("seed", RunConfig.seed)),
            calibration=CalibrationSettings(
                tolerance_pp=float(cal_raw.get("tolerance_pp", 0.5)),
                max_iterations=int(cal_raw.get("max_iterations", 40)),
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigParse(f"config {path} has a malformed field: {exc}") from exc


def _parse_job_mix(raw: dict, path: Path) -> JobMixDistribution:
    for key in ("type_probs", "node_count_probs"):
        if key not in raw:
            raise ConfigParse(f"weights {path} is missing {key}")
        if not isinstance(raw[key], dict):
            raise ConfigParse(f"weights {path}: {key} must be an object")
    try:
        type_weights = {WorkloadType(t): float(w)
                        for t, w in raw["type_probs"].items()}
        count_weights = {WorkloadType(t): {int(n): float(w)
                                           for n, w in counts.items()}
                         for t, counts in raw["node_count_probs"].items()}
    except (KeyError, ValueError, TypeError, AttributeError) as exc:
        raise ConfigParse(f"weights {path}: bad job mix entry: {exc}") from exc
    return JobMixDistribution.from_weights(type_weights, count_weights)


def _parse_inference_mix(raw: dict, path: Path) -> list[InferenceType]:
    entries = raw.get("inference_mix")
    if not isinstance(entries, list) or not entries:
        raise ConfigParse(f"weights {path} needs a non-empty inference_mix list")
    mix: list[InferenceType] = []
    try:
        for e in entries:
            mix.append(InferenceType(
                name=str(e["name"]),
                share=float(e["share"]),
                max_rate_pps=float(e["max_rate_pps"]),
                nodes_per_instance=int(e.get("nodes_per_instance", 1)),
                latency_cap_s=None if e.get("latency_cap_s") is None
                else float(e["latency_cap_s"]),
            ))
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigParse(f"weights {path}: bad inference_mix entry: {exc}") from exc
    total = sum(t.share for t in mix)
    if total <= 0:
        raise ConfigParse(f"weights {path}: inference_mix shares are all zero")
    if abs(total - 1.0) > 1e-9:
        # shares are probabilities over request types; rescale quietly
        mix = [InferenceType(name=t.name, share=t.share / total,
                             max_rate_pps=t.max_rate_pps,
                             nodes_per_instance=t.nodes_per_instance,
                             latency_cap_s=t.latency_cap_s) for t in mix]
    names = [t.name for t in mix]
    if len(set(names)) != len(names):
        raise ConfigParse(f"weights {path}: duplicate inference type names")
    return mix


def load_weights(path: str | Path, mode: str
                 ) -> tuple[TemporalWeights, JobMixDistribution | list[InferenceType]]:
    """Parse a weights file into (temporal shape, mode-specific mix)."""
    if mode not in MODES:
        raise ConfigParse(f"mode must be one of {MODES}, got {mode!r}")
    path = Path(path)
    raw = _read_json_object(path, "weights")

    unknown = sorted(set(raw) - WEIGHT_KEYS)
    if unknown:
        raise ConfigParse(f"weights {path} has unknown keys: {unknown}")
    for key in ("hourly", "day_of_week", "monthly"):
        if key not in raw:
            raise ConfigParse(f"weights {path} is missing {key}")

    try:
        temporal = TemporalWeights.from_weights(raw["hourly"], raw["day_of_week"],
                                                raw["monthly"])
        if mode == "colocation":
            return temporal, _parse_job_mix(raw, path)
        return temporal, _parse_inference_mix(raw, path)
    except (AllZeroWeights, NegativeWeight, ValueError) as exc:
        raise ConfigParse(f"weights {path}: {exc}") from exc

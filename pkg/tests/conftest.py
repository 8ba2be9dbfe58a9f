"""Shared fixtures: synthetic profile banks, weights, grids.

Also hosts the acceptance reporting hook: tests register one line per
criterion and the summary block prints them at the end of the run.
"""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path

import pytest

from facsim.distributions import InferenceType, JobMixDistribution, TemporalWeights
from facsim.engine import FacilityConfig
from facsim.profiles import (ProfileBank, WorkloadType, synthesize_profile,
                             synthesize_rate_sample, write_trace)
from facsim.timegrid import TimeGrid

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def build_job_bank(node_counts=(1, 2, 4), replicates=2, duration_s=3600.0,
                   types=(WorkloadType.TRAINING, WorkloadType.FINE_TUNING)) -> ProfileBank:
    bank = ProfileBank()
    for wtype in types:
        for n in node_counts:
            for r in range(replicates):
                bank.add(synthesize_profile(
                    base_kw=0.6 * n, plateau_kw=3.0 * n, ramp_s=120.0,
                    period_s=900.0, dip_fraction=0.25,
                    duration_s=duration_s * (1 + 0.5 * r), node_count=n,
                    seed=1000 + 37 * n + r, workload_type=wtype))
    return bank


def build_rate_bank(services=(("chat", 50.0), ("code", 100.0)),
                    saturated_kw=2.8, duration_s=1800.0) -> ProfileBank:
    bank = ProfileBank()
    for svc, cap in services:
        for frac in (0.125, 0.25, 0.5, 1.0):
            bank.add(synthesize_rate_sample(
                service=svc, request_rate_pps=cap * frac,
                saturated_kw=saturated_kw, idle_kw=0.42,
                rate_scale_pps=cap / 3.0, duration_s=duration_s,
                seed=int(cap * frac) + 11))
    return bank


@pytest.fixture(scope="session")
def job_bank() -> ProfileBank:
    return build_job_bank()


@pytest.fixture(scope="session")
def rate_bank() -> ProfileBank:
    return build_rate_bank()


@pytest.fixture(scope="session")
def basic_mix() -> JobMixDistribution:
    return JobMixDistribution.from_weights(
        {WorkloadType.TRAINING: 0.7, WorkloadType.FINE_TUNING: 0.3},
        {WorkloadType.TRAINING: {2: 0.6, 4: 0.4},
         WorkloadType.FINE_TUNING: {1: 1.0}})


@pytest.fixture(scope="session")
def paper_like_inference_mix() -> list[InferenceType]:
    return [InferenceType("chat", 0.619, 50.0),
            InferenceType("code", 0.381, 100.0)]


@pytest.fixture(scope="session")
def flat_weights() -> TemporalWeights:
    return TemporalWeights.flat()


@pytest.fixture(scope="session")
def evening_weights() -> TemporalWeights:
    hourly = [0.4 + (1.2 if 17 <= h <= 22 else 0.0) for h in range(24)]
    return TemporalWeights.from_weights(hourly, [1, 1, 1, 1.3, 1.5, 1.4, 0.9],
                                        [1 + 0.05 * m for m in range(12)])


@pytest.fixture
def week_grid() -> TimeGrid:
    return TimeGrid(start=datetime(2026, 1, 5), days=7, timestep_s=300.0)


@pytest.fixture
def day_grid() -> TimeGrid:
    return TimeGrid(start=datetime(2026, 1, 5), days=1, timestep_s=60.0)


@pytest.fixture
def small_facility() -> FacilityConfig:
    return FacilityConfig(n_total=16)


PEAKED_TEMPORAL = {
    "hourly": [0.5 + (1.5 if 9 <= h < 21 else 0.0) for h in range(24)],
    "day_of_week": [1, 1, 1, 1, 1.2, 0.8, 0.7],
    "monthly": [1] * 12,
}

JOB_WEIGHTS_FILE = {
    **PEAKED_TEMPORAL,
    "type_probs": {"training": 0.7, "fine_tuning": 0.3},
    "node_count_probs": {"training": {"2": 0.6, "4": 0.4},
                         "fine_tuning": {"1": 1.0}},
}

RATE_WEIGHTS_FILE = {
    **PEAKED_TEMPORAL,
    "inference_mix": [
        {"name": "chat", "share": 0.619, "max_rate_pps": 50.0},
        {"name": "code", "share": 0.381, "max_rate_pps": 100.0},
    ],
}


@pytest.fixture(scope="session")
def bank_dir(tmp_path_factory) -> Path:
    """Profile bank on disk: batch traces plus rate samples, coarse enough
    to keep CLI runs quick."""
    dest = tmp_path_factory.mktemp("bank")
    for n in (1, 2, 4):
        for wtype in (WorkloadType.TRAINING, WorkloadType.FINE_TUNING):
            for r in range(2):
                prof = synthesize_profile(
                    base_kw=0.6 * n, plateau_kw=3.0 * n, ramp_s=120.0,
                    period_s=900.0, dip_fraction=0.25,
                    duration_s=2100.0 * (1 + r), node_count=n,
                    seed=500 + 13 * n + r, workload_type=wtype,
                    sample_interval_s=1.0)
                write_trace(prof, dest / f"{prof.id}.csv")
    for svc, cap in (("chat", 50.0), ("code", 100.0)):
        for frac in (0.125, 0.25, 0.5, 1.0):
            prof = synthesize_rate_sample(
                service=svc, request_rate_pps=cap * frac, saturated_kw=2.8,
                idle_kw=0.42, rate_scale_pps=cap / 3.0, duration_s=1200.0,
                seed=int(cap * frac) + 3, sample_interval_s=1.0)
            write_trace(prof, dest / f"{prof.id}.csv")
    return dest


def write_run_config(tmp_path: Path, bank_dir: Path, mode: str,
                     **overrides) -> Path:
    weights = JOB_WEIGHTS_FILE if mode == "colocation" else RATE_WEIGHTS_FILE
    wpath = tmp_path / "weights.json"
    wpath.write_text(json.dumps(weights), encoding="utf-8")
    cfg = {
        "mode": mode,
        "n_nodes": 32,
        "targets": [0.35],
        "profiles_dir": str(bank_dir),
        "weights": str(wpath),
        "days": 7,
        "timestep_s": 300.0,
        "seed": 5,
        **overrides,
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path

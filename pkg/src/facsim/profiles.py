"""Node-level power traces: loading, resampling, synthesis, and summaries.

A trace is a sequence of (elapsed seconds, watts) samples at a nominal fixed
interval (0.1 s for the measured data). Profiles are immutable once loaded;
the bank groups replicate runs under a (workload type, node count) key for
batch jobs and a (service, request rate) key for sustained-rate inference
samples.

Integration convention: each sample holds its value for one nominal interval,
clipped at the profile duration (left-hold). Resampling to a coarser step
takes the plain mean of the samples in each bucket, so a bucket-integrated
trace and its resampled form agree to within one raw sample at the tail, and
exactly when the coarse step divides the sample grid.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .errors import (
    EmptyTrace,
    InvalidShapeParams,
    MalformedTrace,
    MissingRateSample,
    NegativePower,
    TimestepTooSmall,
    UnknownProfileKey,
)

TRACE_HEADER = ("elapsed_s", "power_w")
W_PER_KW = 1_000.0
KWH_PER_WS = 1.0 / 3.6e6


class WorkloadType(Enum):
    TRAINING = "training"
    FINE_TUNING = "fine_tuning"
    INFERENCE_OFFLINE = "inference_offline"
    INFERENCE_RATE_SAMPLE = "inference_rate_sample"


class PowerSample(NamedTuple):
    elapsed_s: float
    power_w: float


@dataclass(frozen=True)
class PowerProfile:
    """One workload execution's aggregate power trace plus metadata.

    ``service`` labels the inference service a sustained-rate sample belongs
    to; the bank needs it to key rate samples independently of batch jobs.
    """

    id: str
    workload_type: WorkloadType
    node_count: int
    elapsed_s: np.ndarray
    power_w: np.ndarray
    sample_interval_s: float = 0.1
    request_rate_pps: float | None = None
    service: str | None = None

    def __post_init__(self):
        elapsed = np.asarray(self.elapsed_s, dtype=np.float64)
        power = np.asarray(self.power_w, dtype=np.float64)
        object.__setattr__(self, "elapsed_s", elapsed)
        object.__setattr__(self, "power_w", power)
        if elapsed.size == 0:
            raise EmptyTrace(f"profile {self.id!r} has no samples")
        if elapsed.size != power.size:
            raise MalformedTrace(f"profile {self.id!r}: time/power length mismatch")
        if elapsed[0] < 0:
            raise MalformedTrace(f"profile {self.id!r}: negative elapsed time")
        if elapsed.size > 1 and np.any(np.diff(elapsed) <= 0):
            raise MalformedTrace(f"profile {self.id!r}: elapsed_s not strictly increasing")
        if np.any(power < 0):
            raise NegativePower(f"profile {self.id!r} contains negative power")
        if self.node_count < 1:
            raise MalformedTrace(f"profile {self.id!r}: node_count must be >= 1")
        if self.sample_interval_s <= 0:
            raise MalformedTrace(f"profile {self.id!r}: sample_interval_s must be > 0")
        is_rate = self.workload_type is WorkloadType.INFERENCE_RATE_SAMPLE
        if is_rate and (self.request_rate_pps is None or self.request_rate_pps <= 0):
            raise MalformedTrace(
                f"profile {self.id!r}: rate samples need a positive request_rate_pps")
        if not is_rate and self.request_rate_pps is not None:
            raise MalformedTrace(
                f"profile {self.id!r}: request_rate_pps only applies to rate samples")

    @property
    def duration_s(self) -> float:
        """Duration is defined by the trace itself (last sample's elapsed time)."""
        last = float(self.elapsed_s[-1])
        return last if last > 0 else self.sample_interval_s

    @property
    def n_samples(self) -> int:
        return int(self.elapsed_s.size)

    @property
    def samples(self) -> Iterator[PowerSample]:
        for t, p in zip(self.elapsed_s, self.power_w):
            yield PowerSample(float(t), float(p))

    def bucket_widths_s(self) -> np.ndarray:
        """Left-hold cell width of each sample, clipped at the duration."""
        edges = np.append(self.elapsed_s, self.elapsed_s[-1] + self.sample_interval_s)
        edges = np.minimum(edges, self.duration_s)
        widths = np.diff(edges)
        if self.n_samples == 1:
            widths[:] = self.duration_s
        return widths

    def energy_kwh(self) -> float:
        """Bucket-consistent trace energy (left-hold cells, duration-clipped)."""
        joules = float(np.dot(self.power_w, self.bucket_widths_s()))
        return joules * KWH_PER_WS


@dataclass(frozen=True)
class ProfileSummary:
    mean_power_kw: float
    std_power_kw: float
    duration_h: float
    energy_kwh: float


def load_trace(path: str | Path, metadata: dict | None = None,
               columns: tuple[str, str] = TRACE_HEADER) -> PowerProfile:
    """Read one trace CSV (header ``elapsed_s,power_w``) into a profile.

    ``metadata`` supplies id, workload_type, node_count and, for rate
    samples, request_rate_pps and service; when omitted it is read from the
    ``<stem>.meta.json`` sidecar next to the trace. ``columns`` is the
    adapter hook for foreign column names.
    """
    path = Path(path)
    if metadata is None:
        metadata = load_sidecar(path)

    elapsed: list[float] = []
    power: list[float] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyTrace(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        try:
            t_col, p_col = (header.index(c) for c in columns)
        except ValueError:
            raise MalformedTrace(f"{path}: header {header} lacks columns {columns}") from None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                t = float(row[t_col])
                p = float(row[p_col])
            except (ValueError, IndexError):
                raise MalformedTrace(f"{path}:{lineno}: bad row {row!r}") from None
            if elapsed and t <= elapsed[-1]:
                raise MalformedTrace(f"{path}:{lineno}: elapsed_s not strictly increasing")
            if p < 0:
                raise NegativePower(f"{path}:{lineno}: negative power {p}")
            elapsed.append(t)
            power.append(p)
    if not elapsed:
        raise EmptyTrace(f"{path}: no data rows")

    wtype = metadata["workload_type"]
    if isinstance(wtype, str):
        wtype = WorkloadType(wtype)
    return PowerProfile(
        id=str(metadata["id"]),
        workload_type=wtype,
        node_count=int(metadata["node_count"]),
        elapsed_s=np.asarray(elapsed),
        power_w=np.asarray(power),
        sample_interval_s=float(metadata.get("sample_interval_s", 0.1)),
        request_rate_pps=(float(metadata["request_rate_pps"])
                          if metadata.get("request_rate_pps") is not None else None),
        service=metadata.get("service"),
    )


def load_sidecar(trace_path: Path) -> dict:
    meta_path = trace_path.with_suffix(".meta.json")
    if not meta_path.exists():
        raise MalformedTrace(f"{trace_path}: missing sidecar {meta_path.name}")
    with open(meta_path, encoding="utf-8") as fh:
        return json.load(fh)


def write_trace(profile: PowerProfile, path: str | Path) -> None:
    """Write a trace CSV plus its metadata sidecar (inverse of load_trace)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for t, p in zip(profile.elapsed_s, profile.power_w):
            writer.writerow([f"{t:.3f}", f"{p:.3f}"])
    meta = {
        "id": profile.id,
        "workload_type": profile.workload_type.value,
        "node_count": profile.node_count,
        "sample_interval_s": profile.sample_interval_s,
    }
    if profile.request_rate_pps is not None:
        meta["request_rate_pps"] = profile.request_rate_pps
    if profile.service is not None:
        meta["service"] = profile.service
    with open(path.with_suffix(".meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def resample(profile: PowerProfile, timestep_s: float) -> PowerProfile:
    """Coarsen a trace to ``timestep_s`` by plain per-bucket sample means.

    Bucket k covers [k*timestep, (k+1)*timestep); its value is the mean of
    the source samples falling inside. Duration carries over unchanged, so
    bucket-consistent energy is preserved up to one raw sample at the tail
    (exactly when the coarse step divides the source grid).
    """
    if timestep_s < profile.sample_interval_s:
        raise TimestepTooSmall(
            f"timestep {timestep_s}s finer than source interval {profile.sample_interval_s}s")
    idx = np.floor(profile.elapsed_s / timestep_s).astype(np.int64)
    n_buckets = int(idx[-1]) + 1
    sums = np.bincount(idx, weights=profile.power_w, minlength=n_buckets)
    counts = np.bincount(idx, minlength=n_buckets)
    filled = counts > 0
    means = np.zeros(n_buckets)
    means[filled] = sums[filled] / counts[filled]
    # gaps (possible with sparse sources) hold the previous bucket's level
    if not filled.all():
        last = 0.0
        for k in range(n_buckets):
            if filled[k]:
                last = means[k]
            else:
                means[k] = last
    elapsed = np.arange(n_buckets, dtype=np.float64) * timestep_s
    if n_buckets > 1:
        elapsed[-1] = min(elapsed[-1] + timestep_s, profile.duration_s)
        elapsed[-1] = max(elapsed[-1], (n_buckets - 1) * timestep_s + 1e-9)
    else:
        elapsed[-1] = profile.duration_s
    return replace(
        profile,
        id=f"{profile.id}@{timestep_s:g}s",
        elapsed_s=elapsed,
        power_w=means,
        sample_interval_s=timestep_s,
    )


def summarize(profile: PowerProfile) -> ProfileSummary:
    """Mean/std power in kW plus energy as mean power times duration."""
    if profile.n_samples == 0:
        raise EmptyTrace(f"profile {profile.id!r} has no samples")
    mean_kw = float(np.mean(profile.power_w)) / W_PER_KW
    std_kw = float(np.std(profile.power_w)) / W_PER_KW
    duration_h = profile.duration_s / 3600.0
    return ProfileSummary(
        mean_power_kw=mean_kw,
        std_power_kw=std_kw,
        duration_h=duration_h,
        energy_kwh=mean_kw * duration_h,
    )


def synthesize_profile(*, base_kw: float, plateau_kw: float, ramp_s: float,
                       period_s: float, dip_fraction: float, duration_s: float,
                       node_count: int, seed: int,
                       workload_type: WorkloadType = WorkloadType.TRAINING,
                       sample_interval_s: float = 0.1,
                       profile_id: str | None = None) -> PowerProfile:
    """Generate a stand-in trace: linear ramp to a plateau, then a jittered
    square-wave oscillation dipping to plateau*(1-dip_fraction).

    Deterministic for a given seed; output never exceeds plateau_kw.
    """
    if not 0 <= base_kw <= plateau_kw:
        raise InvalidShapeParams(f"need 0 <= base_kw <= plateau_kw, got {base_kw}, {plateau_kw}")
    if not duration_s > ramp_s >= 0:
        raise InvalidShapeParams(f"need duration_s > ramp_s >= 0, got {duration_s}, {ramp_s}")
    if not 0 <= dip_fraction <= 1:
        raise InvalidShapeParams(f"dip_fraction must be in [0,1], got {dip_fraction}")
    if dip_fraction > 0 and period_s <= 0:
        raise InvalidShapeParams("period_s must be positive when dip_fraction > 0")

    rng = np.random.default_rng(seed)
    t = np.arange(0.0, duration_s + sample_interval_s / 2, sample_interval_s)
    power = np.full(t.size, plateau_kw)
    if ramp_s > 0:
        ramping = t < ramp_s
        power[ramping] = base_kw + (plateau_kw - base_kw) * (t[ramping] / ramp_s)
    if dip_fraction > 0:
        # jitter the phase per period so replicates decorrelate
        phase = (t - ramp_s) / period_s
        jitter = rng.uniform(-0.15, 0.15, int(np.ceil(phase.max())) + 2)
        wobbled = phase + jitter[np.floor(phase).astype(np.int64).clip(0)]
        dipping = (t >= ramp_s) & ((wobbled % 1.0) >= 0.5)
        depth = dip_fraction * (1.0 - 0.1 * rng.random(t.size))
        power[dipping] *= 1.0 - depth[dipping]
        power = np.minimum(power, plateau_kw)
    pid = profile_id or f"synthetic-{workload_type.value}-n{node_count}-s{seed}"
    return PowerProfile(
        id=pid,
        workload_type=workload_type,
        node_count=node_count,
        elapsed_s=t,
        power_w=power * W_PER_KW,
        sample_interval_s=sample_interval_s,
    )


def synthesize_rate_sample(*, service: str, request_rate_pps: float,
                           saturated_kw: float, idle_kw: float, rate_scale_pps: float,
                           duration_s: float, seed: int, node_count: int = 1,
                           dip_fraction: float = 0.05,
                           sample_interval_s: float = 0.1) -> PowerProfile:
    """Sustained-rate inference sample: power saturates with request rate."""
    level = idle_kw + (saturated_kw - idle_kw) * (
        1.0 - math.exp(-request_rate_pps / rate_scale_pps))
    prof = synthesize_profile(
        base_kw=level, plateau_kw=level, ramp_s=0.0, period_s=30.0,
        dip_fraction=dip_fraction, duration_s=duration_s, node_count=node_count,
        seed=seed, workload_type=WorkloadType.TRAINING,
        sample_interval_s=sample_interval_s,
        profile_id=f"synthetic-rate-{service}-r{request_rate_pps:g}-s{seed}")
    return replace(prof, workload_type=WorkloadType.INFERENCE_RATE_SAMPLE,
                   request_rate_pps=request_rate_pps, service=service)


JobKey = tuple[WorkloadType, int]


@dataclass
class ProfileBank:
    """Immutable-after-load collection of replicate profiles.

    Batch jobs key on (workload_type, node_count); sustained-rate inference
    samples key on (service, request_rate_pps). Replicates under one key are
    sampled uniformly per job.
    """

    job_profiles: dict[JobKey, list[PowerProfile]] = field(default_factory=dict)
    rate_samples: dict[str, dict[float, list[PowerProfile]]] = field(default_factory=dict)
    _by_id: dict[str, PowerProfile] = field(default_factory=dict, repr=False)

    def add(self, profile: PowerProfile) -> None:
        if profile.id in self._by_id:
            raise MalformedTrace(f"duplicate profile id {profile.id!r}")
        self._by_id[profile.id] = profile
        if profile.workload_type is WorkloadType.INFERENCE_RATE_SAMPLE:
            per_rate = self.rate_samples.setdefault(profile.service or "", {})
            per_rate.setdefault(float(profile.request_rate_pps), []).append(profile)
        else:
            key = (profile.workload_type, profile.node_count)
            self.job_profiles.setdefault(key, []).append(profile)

    def by_id(self, profile_id: str) -> PowerProfile:
        try:
            return self._by_id[profile_id]
        except KeyError:
            raise UnknownProfileKey(f"no profile with id {profile_id!r}") from None

    def replicates(self, key: JobKey) -> list[PowerProfile]:
        try:
            return self.job_profiles[key]
        except KeyError:
            raise UnknownProfileKey(f"no profiles for {key[0].value}/n{key[1]}") from None

    def node_counts(self, workload_type: WorkloadType) -> set[int]:
        return {n for (w, n) in self.job_profiles if w is workload_type}

    def rate_points(self, service: str) -> list[float]:
        try:
            rates = self.rate_samples[service]
        except KeyError:
            raise MissingRateSample(f"no rate samples for service {service!r}") from None
        if not rates:
            raise MissingRateSample(f"no rate samples for service {service!r}")
        return sorted(rates)

    def nearest_rate_sample(self, service: str, rate_pps: float,
                            rng: np.random.Generator | None = None) -> PowerProfile:
        """Rate sample whose measured rate is closest to ``rate_pps``."""
        points = self.rate_points(service)
        nearest = min(points, key=lambda r: (abs(r - rate_pps), r))
        group = self.rate_samples[service][nearest]
        if rng is None or len(group) == 1:
            return group[0]
        return group[int(rng.integers(len(group)))]

    @classmethod
    def from_directory(cls, directory: str | Path) -> "ProfileBank":
        bank = cls()
        paths = sorted(Path(directory).glob("*.csv"))
        if not paths:
            raise UnknownProfileKey(f"no trace files under {directory}")
        for p in paths:
            bank.add(load_trace(p))
        return bank


def lookup(bank: ProfileBank, key: JobKey, replicate_rng: np.random.Generator) -> PowerProfile:
    """Uniformly pick one replicate profile for a job key."""
    group = bank.replicates(key)
    if len(group) == 1:
        return group[0]
    return group[int(replicate_rng.integers(len(group)))]

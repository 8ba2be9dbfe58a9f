"""Colocation-mode job synthesis and daily-count calibration.

Jobs arrive over the horizon following the temporal weights, draw a workload
type and node count from the configured mix, and inherit their runtime from
a uniformly chosen replicate trace. Calibration bisects the average daily
job count until the queue-free utilization estimate of a freshly generated
list lands on the target; the full simulation then reports how close the
scheduled facility actually gets.

Storage is columnar so year-scale runs stay cheap; ``Job`` views materialize
on demand.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .distributions import (Categorical, JobMixDistribution, TemporalWeights,
                            derive_seed, make_rng)
from .errors import CannotReachTarget, JobTooLarge, NonConvergence
from .profiles import PowerProfile, ProfileBank
from .timegrid import SECONDS_PER_DAY, TimeGrid

log = logging.getLogger("facsim.jobgen")

# substream tags so generation draws stay order-independent
_STREAM_COUNTS = 1
_STREAM_ARRIVALS = 2
_STREAM_MIX = 3
_STREAM_REPLICATES = 4


@dataclass(frozen=True)
class Job:
    """Row view over a JobList entry."""

    arrival_s: float
    nodes: int
    duration_s: float
    profile: PowerProfile

    @property
    def node_seconds(self) -> float:
        return self.nodes * self.duration_s


@dataclass
class JobList:
    """Arrival-ordered columnar job store."""

    arrival_s: np.ndarray
    nodes: np.ndarray
    duration_s: np.ndarray
    profile_idx: np.ndarray
    profiles: tuple[PowerProfile, ...]

    def __post_init__(self):
        n = self.arrival_s.size
        if not (self.nodes.size == self.duration_s.size == self.profile_idx.size == n):
            raise ValueError("JobList columns must share one length")
        if n and np.any(np.diff(self.arrival_s) < 0):
            raise ValueError("JobList must be sorted by arrival time")
        if n and (self.profile_idx.min() < 0 or self.profile_idx.max() >= len(self.profiles)):
            raise ValueError("profile_idx out of range")

    def __len__(self) -> int:
        return int(self.arrival_s.size)

    def job(self, i: int) -> Job:
        return Job(
            arrival_s=float(self.arrival_s[i]),
            nodes=int(self.nodes[i]),
            duration_s=float(self.duration_s[i]),
            profile=self.profiles[int(self.profile_idx[i])],
        )

    def __iter__(self):
        return (self.job(i) for i in range(len(self)))

    @property
    def total_node_seconds(self) -> float:
        return float(np.dot(self.nodes, self.duration_s))

    @classmethod
    def from_jobs(cls, jobs: list[Job]) -> "JobList":
        """Build from row objects (test construction path)."""
        jobs = sorted(jobs, key=lambda j: j.arrival_s)
        profiles: list[PowerProfile] = []
        index: dict[str, int] = {}
        idx = np.empty(len(jobs), dtype=np.int64)
        for i, j in enumerate(jobs):
            if j.profile.id not in index:
                index[j.profile.id] = len(profiles)
                profiles.append(j.profile)
            idx[i] = index[j.profile.id]
        return cls(
            arrival_s=np.asarray([j.arrival_s for j in jobs], dtype=np.float64),
            nodes=np.asarray([j.nodes for j in jobs], dtype=np.int64),
            duration_s=np.asarray([j.duration_s for j in jobs], dtype=np.float64),
            profile_idx=idx,
            profiles=tuple(profiles),
        )

    @classmethod
    def empty(cls) -> "JobList":
        z = np.empty(0)
        return cls(arrival_s=z, nodes=z.astype(np.int64), duration_s=z,
                   profile_idx=z.astype(np.int64), profiles=())


def generate_jobs(bank: ProfileBank, mix: JobMixDistribution,
                  weights: TemporalWeights, grid: TimeGrid, daily_count: float,
                  seed: int) -> JobList:
    """Draw one horizon's worth of jobs.

    Per-day counts are Poisson with mean ``daily_count`` scaled by that day's
    composed day-of-week and monthly weight (mean one over the horizon);
    arrival offsets follow the hourly weights. Each job's runtime is the
    duration of its uniformly selected replicate trace. Deterministic for a
    fixed (bank, mix, weights, grid, daily_count, seed).
    """
    if daily_count < 0:
        raise ValueError(f"daily_count must be >= 0, got {daily_count}")
    mix.validate_against(bank)
    flat = Categorical.from_weights(mix.flat_pairs())

    lam = daily_count * weights.horizon_day_weights(grid)
    counts = make_rng(seed, _STREAM_COUNTS).poisson(lam)
    total = int(counts.sum())
    if total == 0:
        return JobList.empty()

    day_of_job = np.repeat(np.arange(grid.days), counts)
    offsets = weights.sample_day_offsets(make_rng(seed, _STREAM_ARRIVALS), total)
    arrivals = day_of_job * float(SECONDS_PER_DAY) + offsets

    key_idx = flat.sample_indices(make_rng(seed, _STREAM_MIX), total)

    # replicate choice per key, in fixed key order for stream stability
    rng_rep = make_rng(seed, _STREAM_REPLICATES)
    profiles: list[PowerProfile] = []
    profile_of_job = np.empty(total, dtype=np.int64)
    for k, key in enumerate(flat.keys):
        members = np.flatnonzero(key_idx == k)
        group = bank.replicates(key)
        base = len(profiles)
        profiles.extend(group)
        picks = rng_rep.integers(len(group), size=members.size)
        profile_of_job[members] = base + picks

    durations = np.asarray([p.duration_s for p in profiles])[profile_of_job]
    nodes = np.asarray([p.node_count for p in profiles], dtype=np.int64)[profile_of_job]

    order = np.argsort(arrivals, kind="stable")
    return JobList(
        arrival_s=arrivals[order],
        nodes=nodes[order],
        duration_s=durations[order],
        profile_idx=profile_of_job[order],
        profiles=tuple(profiles),
    )


def estimate_utilization(jobs: JobList, n_total: int, horizon_s: float) -> float:
    """Demand-over-capacity ratio: total job node-seconds per capacity.

    Ignores queueing and horizon clipping, so it can exceed 1 when the
    facility is oversubscribed.
    """
    if n_total < 1:
        raise ValueError(f"n_total must be >= 1, got {n_total}")
    if horizon_s <= 0:
        raise ValueError(f"horizon_s must be > 0, got {horizon_s}")
    return jobs.total_node_seconds / (n_total * horizon_s)


@dataclass(frozen=True)
class CalibrationTarget:
    """Target average utilization plus search settings."""

    mu_avg_target: float
    tolerance_pp: float = 0.5
    max_iterations: int = 40

    def __post_init__(self):
        if not 0 < self.mu_avg_target <= 1:
            raise ValueError(
                f"mu_avg_target must be in (0, 1], got {self.mu_avg_target}")
        if self.tolerance_pp <= 0:
            raise ValueError(f"tolerance_pp must be > 0, got {self.tolerance_pp}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class CalibrationResult:
    daily_count: float
    estimate: float  # utilization estimate of the accepted job list
    iterations: int
    converged: bool
    history: tuple[tuple[float, float], ...]  # (daily_count, estimate)
    jobs: JobList


def mean_node_seconds_per_job(bank: ProfileBank, mix: JobMixDistribution) -> float:
    """Expected node-seconds demanded by one job under the mix."""
    expected = 0.0
    for (wtype, n), p in mix.flat_pairs():
        group = bank.replicates((wtype, n))
        expected += p * float(np.mean([g.node_count * g.duration_s for g in group]))
    return expected


def closed_form_daily_count(target_utilization: float, n_total: int,
                            node_seconds_per_job: float) -> float:
    """Daily job count whose queue-free demand estimate equals the target."""
    return target_utilization * n_total * SECONDS_PER_DAY / node_seconds_per_job


def calibrate_daily_jobs(target: CalibrationTarget, mix: JobMixDistribution,
                         weights: TemporalWeights, bank: ProfileBank,
                         n_total: int, grid: TimeGrid, seed: int, *,
                         daily_ceiling: float = 1e12) -> CalibrationResult:
    """Bisect the daily job count until a generated list's utilization
    estimate lands on the target.

    The upper bracket doubles from the closed-form guess until the estimate
    reaches twice the target (erroring out at ``daily_ceiling``). Every
    iterate regenerates jobs under a fresh sub-seed so the search follows the
    distribution rather than one frozen draw. The converged iterate's job
    list is returned with the count.
    """
    per_job = mean_node_seconds_per_job(bank, mix)
    if per_job <= 0:
        raise CannotReachTarget("every job in the mix demands zero node-seconds")
    tol = target.tolerance_pp / 100.0
    horizon = grid.horizon_s

    hi = max(closed_form_daily_count(target.mu_avg_target, n_total, per_job), 1.0)
    bracket = 0
    while True:
        probe = generate_jobs(bank, mix, weights, grid, hi,
                              derive_seed(seed, 0, bracket))
        if estimate_utilization(probe, n_total, horizon) >= 2 * target.mu_avg_target:
            break
        hi *= 2.0
        bracket += 1
        if hi > daily_ceiling:
            raise CannotReachTarget(
                f"no bracket below the daily-count ceiling {daily_ceiling:g}")

    lo = 0.0
    history: list[tuple[float, float]] = []
    best: tuple[float, float, JobList] | None = None
    for it in range(1, target.max_iterations + 1):
        mid = (lo + hi) / 2.0
        jobs = generate_jobs(bank, mix, weights, grid, mid, derive_seed(seed, 1, it))
        est = estimate_utilization(jobs, n_total, horizon)
        history.append((mid, est))
        if best is None or abs(est - target.mu_avg_target) < abs(
                best[1] - target.mu_avg_target):
            best = (mid, est, jobs)
        log.debug("calibration iter %d: daily_count=%.3f estimate=%.4f", it, mid, est)
        if abs(est - target.mu_avg_target) <= tol:
            return CalibrationResult(daily_count=mid, estimate=est, iterations=it,
                                     converged=True, history=tuple(history),
                                     jobs=jobs)
        if est < target.mu_avg_target:
            lo = mid
        else:
            hi = mid
    raise NonConvergence(
        f"no daily job count within {target.tolerance_pp} pp of target "
        f"{target.mu_avg_target:.3f} after {target.max_iterations} iterations",
        best=CalibrationResult(daily_count=best[0], estimate=best[1],
                               iterations=target.max_iterations, converged=False,
                               history=tuple(history), jobs=best[2]))


def validate_fits(mix: JobMixDistribution, n_total: int) -> None:
    """Reject mixes that request more nodes per job than the facility has."""
    for (wtype, n), p in mix.flat_pairs():
        if p > 0 and n > n_total:
            raise JobTooLarge(
                f"mix requests {n}-node {wtype.value} jobs on a "
                f"{n_total}-node facility")

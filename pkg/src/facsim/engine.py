"""Facility simulation core (colocation mode).

Schedules an arrival-ordered job list onto a finite node pool under strict
first-come-first-served order (no backfill), then integrates power onto the
reporting grid. Power accounting is bucket-exact: every watt-second of each
job's trace is apportioned to the reporting buckets it overlaps, and idle
draw covers the remaining node-time, so facility energy equals job energy
plus idle energy by construction.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSchedule, JobTooLarge
from .jobgen import Job, JobList
from .profiles import KWH_PER_WS, PowerProfile, W_PER_KW, resample
from .timegrid import TimeGrid

log = logging.getLogger("facsim.engine")

# cap on flattened (job, trace-bucket) pairs per vectorized block
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True)
class FacilityConfig:
    """Node pool size and per-node power envelope."""

    n_total: int
    node_idle_kw: float = 0.42
    node_tdp_kw: float = 3.52
    rated_power_mw: float | None = None

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError(f"n_total must be >= 1, got {self.n_total}")
        if not 0 <= self.node_idle_kw <= self.node_tdp_kw:
            raise ValueError(
                f"need 0 <= idle ({self.node_idle_kw}) <= tdp ({self.node_tdp_kw})")

    @property
    def idle_floor_kw(self) -> float:
        return self.n_total * self.node_idle_kw

    @property
    def capacity_kw(self) -> float:
        return self.n_total * self.node_tdp_kw


@dataclass(frozen=True)
class ScheduledJobs:
    """A job list with assigned start times (arrival order preserved)."""

    jobs: JobList
    start_s: np.ndarray

    def __post_init__(self):
        if self.start_s.size != len(self.jobs):
            raise ValueError("one start time per job required")
        if self.start_s.size and np.any(self.start_s < self.jobs.arrival_s):
            raise ValueError("a job cannot start before it arrives")

    @property
    def end_s(self) -> np.ndarray:
        return self.start_s + self.jobs.duration_s

    @property
    def wait_s(self) -> np.ndarray:
        return self.start_s - self.jobs.arrival_s

    def __len__(self) -> int:
        return len(self.jobs)

    def job(self, i: int) -> Job:
        return self.jobs.job(i)


def schedule_fifo(jobs: JobList, n_total: int) -> ScheduledJobs:
    """Assign start times under strict FIFO on ``n_total`` nodes.

    Jobs are taken strictly in arrival order: a job waits until every earlier
    job has started and enough nodes are free, so start times are
    non-decreasing (no backfill). Nodes freed at instant t are usable by a
    job starting at t.
    """
    if len(jobs) and int(np.max(jobs.nodes)) > n_total:
        worst = int(np.max(jobs.nodes))
        raise JobTooLarge(f"job needs {worst} nodes but the facility has {n_total}")
    starts = np.empty(len(jobs), dtype=np.float64)
    free = n_total
    running: list[tuple[float, int]] = []  # (end time, nodes) min-heap
    t_prev = float("-inf")
    arr = jobs.arrival_s.tolist()
    nds = jobs.nodes.tolist()
    dur = jobs.duration_s.tolist()
    for i in range(len(arr)):
        t = arr[i] if arr[i] > t_prev else t_prev
        while running and running[0][0] <= t:
            free += heapq.heappop(running)[1]
        while free < nds[i]:
            end, k = heapq.heappop(running)
            free += k
            if end > t:
                t = end
        starts[i] = t
        free -= nds[i]
        heapq.heappush(running, (t + dur[i], nds[i]))
        t_prev = t
    return ScheduledJobs(jobs=jobs, start_s=starts)


@dataclass(frozen=True)
class QueueStats:
    """Waiting summary over jobs that queued (started later than they arrived)."""

    queued_jobs: int
    mean_wait_s: float | None
    max_wait_s: float


@dataclass(frozen=True)
class SimulationResult:
    """Facility time series plus schedule bookkeeping for one run."""

    grid: TimeGrid
    facility: FacilityConfig
    power_kw: np.ndarray
    occupied_nodes: np.ndarray  # time-weighted mean per bucket, fractional
    utilization: np.ndarray
    running_jobs: np.ndarray  # bucket-start snapshots
    queued_jobs: np.ndarray
    scheduled: ScheduledJobs
    truncated_jobs: int  # ran past the horizon (clipped in the series)
    never_started_jobs: int
    queue: QueueStats
    job_energy_kwh: float
    idle_energy_kwh: float

    @property
    def n_jobs(self) -> int:
        return len(self.scheduled)

    @property
    def utilization_avg(self) -> float:
        return float(np.mean(self.utilization)) if self.utilization.size else 0.0

    @property
    def energy_kwh(self) -> float:
        return float(np.sum(self.power_kw)) * self.grid.timestep_s / 3600.0

    @property
    def mean_power_kw(self) -> float:
        return float(np.mean(self.power_kw)) if self.power_kw.size else 0.0


def _integrate_rectangles(starts: np.ndarray, ends: np.ndarray, weights: np.ndarray,
                          n_steps: int, dt: float) -> np.ndarray:
    """Exact per-bucket integral of summed weight-valued rectangles.

    Each rectangle holds ``weight`` over [start, end) with end <= n_steps*dt.
    Event-difference form: the level at each bucket start via summed deltas,
    plus a correction for the within-bucket tail of each start/end event.
    """
    delta = np.zeros(n_steps)
    partial = np.zeros(n_steps)
    idx_s = np.minimum((starts / dt).astype(np.int64), n_steps - 1)
    idx_e = np.minimum((ends / dt).astype(np.int64), n_steps - 1)
    w = weights.astype(np.float64)
    np.add.at(delta, idx_s, w)
    np.add.at(delta, idx_e, -w)
    np.add.at(partial, idx_s, w * ((idx_s + 1) * dt - starts))
    np.add.at(partial, idx_e, -w * ((idx_e + 1) * dt - ends))
    at_bucket_start = np.concatenate([[0.0], np.cumsum(delta)[:-1]])
    return at_bucket_start * dt + partial


def _spread_job_power(bucket_ws: np.ndarray, trace: PowerProfile,
                      starts: np.ndarray, horizon_s: float, dt: float) -> None:
    """Distribute one profile's trace energy for many jobs onto the grid.

    Trace cell k of a job starting at s holds power_w[k] over the absolute
    interval [s + elapsed_s[k], s + elapsed_s[k] + width_k), clipped at the
    horizon; its energy spreads over every reporting bucket it overlaps.
    """
    n_steps = bucket_ws.size
    n_local = trace.n_samples
    widths_s = trace.bucket_widths_s()
    per_job = max(1, _CHUNK_ENTRIES // n_local)
    for lo in range(0, starts.size, per_job):
        s = starts[lo:lo + per_job]
        t0 = (s[:, None] + trace.elapsed_s[None, :]).ravel()
        t1 = np.minimum(t0 + np.broadcast_to(widths_s, (s.size, n_local)).ravel(),
                        horizon_s)
        keep = t1 > t0
        p = np.broadcast_to(trace.power_w, (s.size, n_local)).ravel()[keep]
        bucket_ws += _integrate_rectangles(t0[keep], t1[keep], p, n_steps, dt)


def simulate(scheduled: ScheduledJobs, grid: TimeGrid,
             facility: FacilityConfig) -> SimulationResult:
    """Integrate power and occupancy of a scheduled job list over the horizon.

    Active jobs contribute their resampled trace; free nodes draw idle power.
    Jobs still running at the horizon end are truncated in the series and
    counted; jobs whose start falls beyond it contribute nothing.
    """
    dt = grid.timestep_s
    n_steps = grid.n_steps
    horizon = grid.horizon_s
    jobs = scheduled.jobs
    starts = scheduled.start_s
    ends = scheduled.end_s

    ran = starts < horizon
    clipped_ends = np.minimum(ends, horizon)
    truncated = int(np.count_nonzero(ends[ran] > horizon))
    never_started = int(np.count_nonzero(~ran))
    if truncated or never_started:
        log.info("horizon clipping: %d jobs truncated, %d never started",
                 truncated, never_started)

    node_seconds = _integrate_rectangles(
        starts[ran], clipped_ends[ran], jobs.nodes[ran], n_steps, dt)
    occupied = node_seconds / dt
    if occupied.size and float(occupied.max()) > facility.n_total * (1 + 1e-9):
        raise InfeasibleSchedule(
            f"schedule occupies {occupied.max():.3f} nodes on a "
            f"{facility.n_total}-node facility")

    bucket_ws = np.zeros(n_steps)
    cache: dict[str, PowerProfile] = {}
    for pidx, profile in enumerate(jobs.profiles):
        members = np.flatnonzero((jobs.profile_idx == pidx) & ran)
        if members.size == 0:
            continue
        res = cache.get(profile.id)
        if res is None:
            res = profile if dt <= profile.sample_interval_s else resample(profile, dt)
            cache[profile.id] = res
        _spread_job_power(bucket_ws, res, starts[members], horizon, dt)

    idle_nodes = facility.n_total - occupied
    power_kw = bucket_ws / dt / W_PER_KW + facility.node_idle_kw * idle_nodes

    edges = grid.step_offsets_s
    starts_sorted = np.sort(starts)
    ends_sorted = np.sort(ends)
    running = (np.searchsorted(starts_sorted, edges, side="right")
               - np.searchsorted(ends_sorted, edges, side="right"))
    queued = (np.searchsorted(jobs.arrival_s, edges, side="right")
              - np.searchsorted(starts_sorted, edges, side="right"))

    waits = scheduled.wait_s[ran]
    waited = waits > 0
    queue = QueueStats(
        queued_jobs=int(np.count_nonzero(waited)) + never_started,
        mean_wait_s=float(np.mean(waits[waited])) if np.any(waited) else None,
        max_wait_s=float(np.max(waits[waited])) if np.any(waited) else 0.0,
    )

    return SimulationResult(
        grid=grid,
        facility=facility,
        power_kw=power_kw,
        occupied_nodes=occupied,
        utilization=occupied / facility.n_total,
        running_jobs=running.astype(np.int64),
        queued_jobs=queued.astype(np.int64),
        scheduled=scheduled,
        truncated_jobs=truncated,
        never_started_jobs=never_started,
        queue=queue,
        job_energy_kwh=float(bucket_ws.sum()) * KWH_PER_WS,
        idle_energy_kwh=float(idle_nodes.sum()) * dt * facility.node_idle_kw / 3600.0,
    )


def run_colocation(jobs: JobList, grid: TimeGrid,
                   facility: FacilityConfig) -> SimulationResult:
    """Schedule FIFO and simulate in one call."""
    return simulate(schedule_fifo(jobs, facility.n_total), grid, facility)


def job_energy_kwh(profile: PowerProfile, timestep_s: float, start_s: float,
                   horizon_s: float) -> float:
    """Energy one job contributes within the horizon, matching the engine's
    bucket-level accounting (resampled trace, left-hold cells, horizon clip)."""
    res = profile if timestep_s <= profile.sample_interval_s else resample(profile, timestep_s)
    t0 = start_s + res.elapsed_s
    width = np.clip(np.minimum(res.bucket_widths_s(), horizon_s - t0), 0.0, None)
    return float(np.dot(res.power_w, width)) * KWH_PER_WS


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    first_bad_step: int | None
    message: str


def audit_concurrency(result: SimulationResult,
                      facility: FacilityConfig) -> AuditReport:
    """Check capacity and energy bookkeeping of a finished run.

    Returns a report rather than raising, so callers can decide whether a
    violation aborts the run or just gets logged.
    """
    over = np.flatnonzero(result.occupied_nodes > facility.n_total * (1 + 1e-9))
    if over.size:
        step = int(over[0])
        return AuditReport(False, step,
                           f"occupied nodes exceed capacity at step {step}")
    bad_util = np.flatnonzero((result.utilization < -1e-12)
                              | (result.utilization > 1 + 1e-9))
    if bad_util.size:
        step = int(bad_util[0])
        return AuditReport(False, step, f"utilization out of [0, 1] at step {step}")
    parts = result.job_energy_kwh + result.idle_energy_kwh
    scale = max(1.0, abs(result.energy_kwh))
    if abs(result.energy_kwh - parts) > 1e-9 * scale:
        return AuditReport(False, None,
                           f"energy split mismatch: series {result.energy_kwh} "
                           f"vs jobs+idle {parts}")
    floor = facility.idle_floor_kw
    low = np.flatnonzero(result.power_kw < floor - 1e-6)
    if low.size:
        step = int(low[0])
        return AuditReport(False, step,
                           f"power below the all-idle floor at step {step}")
    return AuditReport(True, None, "ok")

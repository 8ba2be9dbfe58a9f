"""Inference-mode facility model.

The node pool is partitioned across inference types proportionally to their
demand weight (traffic share times instance size over per-instance
throughput), apportioned exactly; every positive-share type is guaranteed
room for at least one instance. Each timestep, a type spins up just enough
instances for its incoming request rate, capped by its partition; requests
beyond capacity are recorded as incomplete (there is no queue to carry them
over). Instance power replays the sustained-rate trace nearest the
per-instance processed rate, with instance phases staggered so replicate
dips do not align.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import InferenceType, TemporalWeights, largest_remainder
from .engine import FacilityConfig
from .errors import (CannotReachTarget, DegenerateMixWarning, NonConvergence,
                     OrphanedLoadWarning)
from .jobgen import CalibrationTarget
from .profiles import PowerProfile, ProfileBank, W_PER_KW, resample
from .timegrid import TimeGrid

log = logging.getLogger("facsim.inference")


def allocate_nodes(mix: list[InferenceType], n_total: int) -> np.ndarray:
    """Partition the pool by demand weight share*nodes_per_instance/max_rate.

    Largest-remainder apportionment sums to ``n_total`` exactly. If rounding
    leaves a positive-share type without room for one instance, that is
    reported and the type is bumped to its instance size, rebalancing the
    rest.
    """
    weights = np.array([t.share * t.nodes_per_instance / t.max_rate_pps
                        for t in mix])
    alloc = largest_remainder(n_total, weights)

    need = np.array([t.nodes_per_instance if t.share > 0 else 0 for t in mix])
    if int(need.sum()) > n_total:
        raise ValueError(
            f"cannot fit one instance of every positive-share type into "
            f"{n_total} nodes (needs {int(need.sum())})")
    fixed = np.zeros(len(mix), dtype=bool)
    while True:
        deficient = (alloc < need) & ~fixed
        if not deficient.any():
            break
        names = [mix[i].name for i in np.flatnonzero(deficient)]
        warnings.warn(
            f"allocation rounded positive-share type(s) {names} below one "
            "instance; enforcing the minimum and rebalancing",
            DegenerateMixWarning, stacklevel=2)
        fixed |= deficient
        alloc = np.where(fixed, need, 0)
        rest = np.flatnonzero(~fixed)
        remaining = n_total - int(alloc.sum())
        if rest.size and remaining > 0 and weights[rest].sum() > 0:
            alloc[rest] = largest_remainder(remaining, weights[rest])
        elif rest.size and remaining > 0:
            alloc[rest] = largest_remainder(remaining, np.ones(rest.size))
    return alloc


def instances_required(rate_pps: np.ndarray | float, entry: InferenceType,
                       allocated_nodes: int) -> np.ndarray:
    """Instances spun up for a request rate: enough to absorb it, capped by
    the type's partition. Zero rate needs zero instances."""
    rate = np.asarray(rate_pps, dtype=np.float64)
    if np.any(rate < 0):
        raise ValueError("request rate must be >= 0")
    cap = allocated_nodes // entry.nodes_per_instance
    return np.minimum(np.ceil(rate / entry.max_rate_pps).astype(np.int64), cap)


def distribute_rate(rate_pps: np.ndarray | float, instances: np.ndarray | int,
                    entry: InferenceType) -> tuple[np.ndarray, np.ndarray]:
    """Spread a request rate uniformly over instances.

    Returns (processed rate per instance, incomplete rate). The per-instance
    rate never exceeds the cap; the overflow is incomplete, and it is exactly
    zero whenever capacity covers demand. Rates arriving with no instances at
    all are reported and recorded entirely as incomplete.
    """
    rate = np.asarray(rate_pps, dtype=np.float64)
    k = np.asarray(instances, dtype=np.int64)
    if np.any((rate > 0) & (k == 0)):
        warnings.warn(
            f"requests arrived for type {entry.name!r} with no instances; "
            "recording them as incomplete", OrphanedLoadWarning, stacklevel=2)
    capped = rate > k * entry.max_rate_pps
    safe_k = np.maximum(k, 1)
    processed = np.where(k > 0,
                         np.where(capped, entry.max_rate_pps, rate / safe_k),
                         0.0)
    incomplete = np.where(capped, rate - k * entry.max_rate_pps, 0.0)
    return processed, incomplete


def build_request_series(daily_requests: float, mix: list[InferenceType],
                         weights: TemporalWeights, grid: TimeGrid) -> np.ndarray:
    """Expected request counts per (type, step) bucket.

    The facility-wide daily total splits by traffic share, scales by the
    day's composed weight (mean one over the horizon), and spreads across the
    day by the hourly weights. This is the expected load, so repeated builds
    are identical by design.
    """
    if daily_requests < 0:
        raise ValueError(f"daily_requests must be >= 0, got {daily_requests}")
    day_mult = weights.horizon_day_weights(grid)
    step_frac = weights.step_fractions(grid.steps_per_day)
    per_day = np.outer(day_mult, step_frac).ravel()
    shares = np.array([t.share for t in mix])
    return daily_requests * shares[:, None] * per_day[None, :]


@dataclass(frozen=True)
class InferenceResult:
    """Facility time series plus request accounting for one run."""

    grid: TimeGrid
    facility: FacilityConfig
    allocated_nodes: dict[str, int]
    power_kw: np.ndarray
    occupied_nodes: np.ndarray  # nodes inside active instances
    utilization: np.ndarray
    incoming_pps: np.ndarray
    effective_pps: np.ndarray
    incomplete_pps: np.ndarray
    instances: dict[str, np.ndarray]
    requests_incoming: float
    requests_served: float
    requests_incomplete: float

    @property
    def utilization_avg(self) -> float:
        return float(np.mean(self.utilization)) if self.utilization.size else 0.0

    @property
    def energy_kwh(self) -> float:
        return float(np.sum(self.power_kw)) * self.grid.timestep_s / 3600.0

    @property
    def mean_power_kw(self) -> float:
        return float(np.mean(self.power_kw)) if self.power_kw.size else 0.0


def _cyclic_window_power(trace_w: np.ndarray, phase: np.ndarray,
                         k: np.ndarray) -> np.ndarray:
    """Total watts of ``k`` staggered instances replaying a cyclic trace.

    Instance j reads the trace at (phase + j) mod L, so the sum is a length-k
    circular window: full cycles plus a doubled-prefix remainder window.
    """
    length = trace_w.size
    prefix = np.concatenate([[0.0], np.cumsum(np.concatenate([trace_w, trace_w]))])
    cycle_total = prefix[length]
    full, rem = np.divmod(k, length)
    return full * cycle_total + prefix[phase + rem] - prefix[phase]


def simulate_inference(bank: ProfileBank, mix: list[InferenceType],
                       weights: TemporalWeights, grid: TimeGrid,
                       facility: FacilityConfig,
                       daily_requests: float) -> InferenceResult:
    """Drive the partitioned pool with the expected request series."""
    if not mix:
        raise ValueError("need at least one inference type")
    alloc = allocate_nodes(mix, facility.n_total)
    for entry in mix:
        bank.rate_points(entry.name)  # raises MissingRateSample early

    dt = grid.timestep_s
    n_steps = grid.n_steps
    series = build_request_series(daily_requests, mix, weights, grid)

    power_w = np.zeros(n_steps)
    occupied = np.zeros(n_steps)
    incoming_pps = np.zeros(n_steps)
    effective_pps = np.zeros(n_steps)
    incomplete_pps = np.zeros(n_steps)
    instances: dict[str, np.ndarray] = {}
    steps = np.arange(n_steps)
    trace_cache: dict[str, PowerProfile] = {}

    for idx, entry in enumerate(mix):
        rate = series[idx] / dt
        k = instances_required(rate, entry, int(alloc[idx]))
        per_instance, incomplete = distribute_rate(rate, k, entry)

        points = np.asarray(bank.rate_points(entry.name))
        # nearest measured rate, ties to the lower point
        pos = np.searchsorted(points, per_instance)
        left = np.clip(pos - 1, 0, points.size - 1)
        right = np.clip(pos, 0, points.size - 1)
        pick = np.where(per_instance - points[left] <= points[right] - per_instance,
                        left, right)
        pick[k == 0] = 0

        for pi in np.unique(pick[k > 0]):
            members = (pick == pi) & (k > 0)
            group = bank.rate_samples[entry.name][float(points[pi])]
            sample = min(group, key=lambda p: p.id)
            trace = trace_cache.get(sample.id)
            if trace is None:
                trace = (sample if dt <= sample.sample_interval_s
                         else resample(sample, dt))
                trace_cache[sample.id] = trace
            phase = steps[members] % trace.n_samples
            power_w[members] += _cyclic_window_power(trace.power_w, phase, k[members])

        occupied += k * entry.nodes_per_instance
        incoming_pps += rate
        effective_pps += rate - incomplete
        incomplete_pps += incomplete
        instances[entry.name] = k

    power_kw = power_w / W_PER_KW + facility.node_idle_kw * (facility.n_total - occupied)
    return InferenceResult(
        grid=grid,
        facility=facility,
        allocated_nodes={t.name: int(a) for t, a in zip(mix, alloc)},
        power_kw=power_kw,
        occupied_nodes=occupied,
        utilization=occupied / facility.n_total,
        incoming_pps=incoming_pps,
        effective_pps=effective_pps,
        incomplete_pps=incomplete_pps,
        instances=instances,
        requests_incoming=float(incoming_pps.sum()) * dt,
        requests_served=float(effective_pps.sum()) * dt,
        requests_incomplete=float(incomplete_pps.sum()) * dt,
    )


def utilization_ceiling(mix: list[InferenceType], allocation: np.ndarray,
                        n_total: int) -> float:
    """Highest reachable occupancy fraction: every partition fully instanced."""
    usable = sum((int(a) // t.nodes_per_instance) * t.nodes_per_instance
                 for t, a in zip(mix, allocation))
    return usable / n_total


def estimate_node_demand(mix: list[InferenceType], weights: TemporalWeights,
                         grid: TimeGrid, n_total: int,
                         daily_requests: float) -> float:
    """Queue-free, cap-free node demand fraction (can exceed 1)."""
    series = build_request_series(daily_requests, mix, weights, grid)
    demand = 0.0
    for idx, entry in enumerate(mix):
        rate = series[idx] / grid.timestep_s
        demand += float(np.sum(rate / entry.max_rate_pps)) * entry.nodes_per_instance
    return demand / (n_total * grid.n_steps)


@dataclass(frozen=True)
class RequestCalibration:
    daily_requests: float
    utilization: float
    iterations: int
    converged: bool
    history: tuple[tuple[float, float], ...]  # (daily_requests, utilization)


def calibrate_daily_requests(target: CalibrationTarget, mix: list[InferenceType],
                             weights: TemporalWeights, bank: ProfileBank,
                             facility: FacilityConfig, grid: TimeGrid,
                             seed: int = 0) -> RequestCalibration:
    """Bisect the daily request count to the target average utilization.

    ``seed`` mirrors the colocation calibrator's signature; the request
    series is the expected load, so the search itself is deterministic.
    Targets above the instance-capacity ceiling (or above what the temporal
    shape can deliver) fail with the maximum achievable utilization attached.
    """
    del seed
    n_total = facility.n_total
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMixWarning)
        alloc = allocate_nodes(mix, n_total)
    ceiling = utilization_ceiling(mix, alloc, n_total)
    if target.mu_avg_target > ceiling:
        raise CannotReachTarget(
            f"target {target.mu_avg_target:.3f} exceeds the instance-capacity "
            f"ceiling {ceiling:.3f}", max_achievable=ceiling)
    tol = target.tolerance_pp / 100.0

    def achieved(daily: float) -> float:
        return simulate_inference(bank, mix, weights, grid, facility,
                                  daily).utilization_avg

    demand_unit = estimate_node_demand(mix, weights, grid, n_total, 1.0)
    if demand_unit <= 0:
        raise CannotReachTarget("request shape delivers no load")
    hi = max(2 * target.mu_avg_target / demand_unit, 1.0)
    for _ in range(64):
        if estimate_node_demand(mix, weights, grid, n_total,
                                hi) >= 2 * target.mu_avg_target:
            break
        hi *= 2.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OrphanedLoadWarning)
        warnings.simplefilter("ignore", DegenerateMixWarning)
        util_hi = achieved(hi)
        for _ in range(64):
            if util_hi >= target.mu_avg_target:
                break
            wider = achieved(hi * 2.0)
            if wider <= util_hi:  # saturated below the target
                raise CannotReachTarget(
                    f"target {target.mu_avg_target:.3f} above what the request "
                    "shape can deliver", max_achievable=wider)
            hi, util_hi = hi * 2.0, wider
        else:
            raise CannotReachTarget(
                f"target {target.mu_avg_target:.3f} above what the request "
                "shape can deliver", max_achievable=util_hi)

        lo = 0.0
        history: list[tuple[float, float]] = []
        best: tuple[float, float] | None = None
        for it in range(1, target.max_iterations + 1):
            mid = (lo + hi) / 2.0
            util = achieved(mid)
            history.append((mid, util))
            if best is None or abs(util - target.mu_avg_target) < abs(
                    best[1] - target.mu_avg_target):
                best = (mid, util)
            log.debug("calibration iter %d: daily_requests=%.1f utilization=%.4f",
                      it, mid, util)
            if abs(util - target.mu_avg_target) <= tol:
                return RequestCalibration(daily_requests=mid, utilization=util,
                                          iterations=it, converged=True,
                                          history=tuple(history))
            if util < target.mu_avg_target:
                lo = mid
            else:
                hi = mid
    raise NonConvergence(
        f"no daily request count within {target.tolerance_pp} pp of target "
        f"{target.mu_avg_target:.3f} after {target.max_iterations} iterations",
        best=RequestCalibration(daily_requests=best[0], utilization=best[1],
                                iterations=target.max_iterations, converged=False,
                                history=tuple(history)))

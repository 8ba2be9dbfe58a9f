"""Summary statistics over facility time series.

All quantiles use the nearest-rank convention (value at rank ceil(p/100 * n)
of the sorted data), including the median, so every reported number is an
actual sample. Spread is population standard deviation. The peak-to-average
ratio is the plain max over mean of the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import ScheduledJobs, SimulationResult
from .errors import EmptySeries, InsufficientSpan
from .timegrid import TimeGrid

HOURS_PER_DAY = 24
HOURS_PER_WEEK = 168
KW_PER_MW = 1_000.0
SECONDS_PER_HOUR = 3_600.0


def nearest_rank_percentile(values: np.ndarray, p: float) -> float:
    """Nearest-rank percentile: sorted value at rank ceil(p/100 * n), rank >= 1."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptySeries("cannot take a percentile of an empty series")
    if not 0 <= p <= 100:
        raise ValueError(f"percentile must be in [0, 100], got {p}")
    rank = max(1, math.ceil(p / 100.0 * v.size))
    return float(np.partition(v, rank - 1)[rank - 1])


def peak_to_average(values: np.ndarray) -> float:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptySeries("cannot take a peak-to-average ratio of an empty series")
    mean = float(np.mean(v))
    if mean <= 0:
        raise ValueError(f"peak-to-average needs a positive mean, got {mean}")
    return float(np.max(v)) / mean


@dataclass(frozen=True)
class SeriesSummary:
    n_samples: int
    mean: float
    std: float  # population
    minimum: float
    maximum: float
    p10: float
    p25: float
    median: float
    p75: float
    p90: float
    peak_to_average: float | None  # absent for series with no positive mean

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "mean": self.mean,
            "std": self.std,
            "min": self.minimum,
            "max": self.maximum,
            "p10": self.p10,
            "p25": self.p25,
            "median": self.median,
            "p75": self.p75,
            "p90": self.p90,
            "peak_to_average": self.peak_to_average,
        }


def summarize_series(values: np.ndarray) -> SeriesSummary:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptySeries("cannot summarize an empty series")
    mean = float(np.mean(v))
    return SeriesSummary(
        n_samples=int(v.size),
        mean=mean,
        std=float(np.std(v)),
        minimum=float(np.min(v)),
        maximum=float(np.max(v)),
        p10=nearest_rank_percentile(v, 10),
        p25=nearest_rank_percentile(v, 25),
        median=nearest_rank_percentile(v, 50),
        p75=nearest_rank_percentile(v, 75),
        p90=nearest_rank_percentile(v, 90),
        peak_to_average=peak_to_average(v) if mean > 0 else None,
    )


@dataclass(frozen=True)
class PeriodicProfile:
    """Per-bin spread of a series folded onto a daily or weekly cycle.

    Daily profiles use 24 hour-of-day bins; weekly profiles use 168
    (day-of-week, hour) bins with Monday 00:00 first.
    """

    period: str
    median: np.ndarray
    p10: np.ndarray
    p25: np.ndarray
    p75: np.ndarray
    p90: np.ndarray

    @property
    def n_bins(self) -> int:
        return int(self.median.size)

    def rows(self) -> list[tuple[int, float, float, float, float, float]]:
        return [(b, float(self.median[b]), float(self.p10[b]), float(self.p25[b]),
                 float(self.p75[b]), float(self.p90[b]))
                for b in range(self.n_bins)]


def periodic_profile(values: np.ndarray, grid: TimeGrid, period: str) -> PeriodicProfile:
    """Fold a per-step series onto its daily or weekly cycle.

    The horizon must cover at least one full period so every bin has data.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptySeries("cannot fold an empty series")
    if v.size != grid.n_steps:
        raise ValueError(f"series length {v.size} does not match grid ({grid.n_steps})")
    if period == "day":
        n_bins = HOURS_PER_DAY
        bin_of_step = grid.hour_of_step
    elif period == "week":
        if grid.days < 7:
            raise InsufficientSpan(
                f"weekly profile needs at least 7 days, grid has {grid.days}")
        n_bins = HOURS_PER_WEEK
        bin_of_step = (grid.day_of_week[grid.day_of_step] * HOURS_PER_DAY
                       + grid.hour_of_step)
    else:
        raise ValueError(f"period must be 'day' or 'week', got {period!r}")

    order = np.argsort(bin_of_step, kind="stable")
    sorted_bins = bin_of_step[order]
    sorted_vals = v[order]
    bounds = np.searchsorted(sorted_bins, np.arange(n_bins + 1))
    out = {name: np.empty(n_bins) for name in ("median", "p10", "p25", "p75", "p90")}
    for b in range(n_bins):
        chunk = sorted_vals[bounds[b]:bounds[b + 1]]
        if chunk.size == 0:
            raise InsufficientSpan(f"{period} bin {b} has no samples")
        out["median"][b] = nearest_rank_percentile(chunk, 50)
        out["p10"][b] = nearest_rank_percentile(chunk, 10)
        out["p25"][b] = nearest_rank_percentile(chunk, 25)
        out["p75"][b] = nearest_rank_percentile(chunk, 75)
        out["p90"][b] = nearest_rank_percentile(chunk, 90)
    return PeriodicProfile(period=period, **out)


@dataclass(frozen=True)
class StatBlock:
    """The table row shape used for power and utilization columns."""

    mean: float
    std: float
    median: float
    p90: float
    maximum: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "median": self.median,
                "p90": self.p90, "max": self.maximum}


def _stat_block(values: np.ndarray, scale: float) -> StatBlock:
    v = np.asarray(values, dtype=np.float64) * scale
    return StatBlock(
        mean=float(np.mean(v)),
        std=float(np.std(v)),
        median=nearest_rank_percentile(v, 50),
        p90=nearest_rank_percentile(v, 90),
        maximum=float(np.max(v)),
    )


def queue_stats(scheduled: ScheduledJobs) -> dict:
    """Queued share (start after arrival) and mean wait over queued jobs.

    The wait is absent, not zero, when nothing queued.
    """
    waits = scheduled.wait_s
    queued = waits > 0
    n = waits.size
    frac_pct = 100.0 * float(np.count_nonzero(queued)) / n if n else 0.0
    mean_h = (float(np.mean(waits[queued])) / SECONDS_PER_HOUR
              if queued.any() else None)
    return {"queued_fraction_pct": frac_pct, "mean_queue_time_h": mean_h}


@dataclass(frozen=True)
class ColocationStats:
    jobs_per_day: float
    queued_fraction_pct: float
    mean_queue_time_h: float | None

    def to_dict(self) -> dict:
        return {"jobs_per_day": self.jobs_per_day,
                "queued_fraction_pct": self.queued_fraction_pct,
                "mean_queue_time_h": self.mean_queue_time_h}


@dataclass(frozen=True)
class InferenceStats:
    daily_prompts: float
    incoming_pps_mean: float
    effective_pps_mean: float
    incomplete_pps_mean: float

    def to_dict(self) -> dict:
        return {"daily_prompts": self.daily_prompts,
                "incoming_pps_mean": self.incoming_pps_mean,
                "effective_pps_mean": self.effective_pps_mean,
                "incomplete_pps_mean": self.incomplete_pps_mean}


@dataclass(frozen=True)
class AggregateSummary:
    """Whole-run facility metrics: power in MW, utilization in percent."""

    power_mw: StatBlock
    peak_to_average: float
    utilization_pct: StatBlock
    colocation: ColocationStats | None = None
    inference: InferenceStats | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "power_mw": self.power_mw.to_dict(),
            "peak_to_average": self.peak_to_average,
            "utilization_pct": self.utilization_pct.to_dict(),
        }
        if self.colocation is not None:
            out["colocation"] = self.colocation.to_dict()
        if self.inference is not None:
            out["inference"] = self.inference.to_dict()
        return out


def summarize_run(result, scheduled: ScheduledJobs | None = None) -> AggregateSummary:
    """Aggregate one run (batch or inference) into the headline table row.

    ``result`` is a simulation output carrying ``power_kw``, ``utilization``
    and ``grid``. Queue metrics come from ``scheduled`` when given, else from
    the schedule embedded in a batch result; request metrics come from the
    rate columns of an inference result.
    """
    power = np.asarray(result.power_kw, dtype=np.float64)
    if power.size == 0:
        raise EmptySeries("cannot summarize a run with no timesteps")

    colocation = None
    if scheduled is None and isinstance(result, SimulationResult):
        scheduled = result.scheduled
    if scheduled is not None:
        q = queue_stats(scheduled)
        colocation = ColocationStats(
            jobs_per_day=len(scheduled.jobs) / result.grid.days,
            queued_fraction_pct=q["queued_fraction_pct"],
            mean_queue_time_h=q["mean_queue_time_h"],
        )

    inference = None
    if hasattr(result, "incoming_pps"):
        inference = InferenceStats(
            daily_prompts=result.requests_incoming / result.grid.days,
            incoming_pps_mean=float(np.mean(result.incoming_pps)),
            effective_pps_mean=float(np.mean(result.effective_pps)),
            incomplete_pps_mean=float(np.mean(result.incomplete_pps)),
        )

    return AggregateSummary(
        power_mw=_stat_block(power, 1.0 / KW_PER_MW),
        peak_to_average=peak_to_average(power),
        utilization_pct=_stat_block(result.utilization, 100.0),
        colocation=colocation,
        inference=inference,
    )

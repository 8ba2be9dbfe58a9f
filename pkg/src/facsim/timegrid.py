"""Simulation time grid: a fixed-step horizon anchored to a calendar date.

Day-of-week and monthly utilization weights need a concrete calendar, so the
horizon is defined by a start datetime plus a whole number of days, stepped
at a fixed timestep. All internal math uses seconds since the start; only
output formatting touches datetime objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from functools import cached_property

import numpy as np

SECONDS_PER_DAY = 86_400


@dataclass(frozen=True)
class TimeGrid:
    start: datetime
    days: int
    timestep_s: float

    def __post_init__(self):
        if self.days <= 0:
            raise ValueError("horizon must span at least one day")
        if self.timestep_s <= 0:
            raise ValueError("timestep_s must be positive")
        if SECONDS_PER_DAY % self.timestep_s:
            raise ValueError("timestep_s must divide a day evenly")

    @classmethod
    def from_iso(cls, start: str, days: int, timestep_s: float) -> "TimeGrid":
        return cls(start=datetime.fromisoformat(start), days=days,
                   timestep_s=timestep_s)

    @property
    def horizon_s(self) -> float:
        return self.days * SECONDS_PER_DAY

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon_s / self.timestep_s))

    @property
    def steps_per_day(self) -> int:
        return int(round(SECONDS_PER_DAY / self.timestep_s))

    @cached_property
    def step_offsets_s(self) -> np.ndarray:
        """Start offset of each reporting bucket, in seconds."""
        return np.arange(self.n_steps, dtype=np.float64) * self.timestep_s

    @cached_property
    def day_of_week(self) -> np.ndarray:
        """Weekday index (Monday=0) for each day of the horizon."""
        first = self.start.weekday()
        return (first + np.arange(self.days)) % 7

    @cached_property
    def month_of_day(self) -> np.ndarray:
        """Month index (January=0) for each day of the horizon."""
        months = np.empty(self.days, dtype=np.int64)
        for d in range(self.days):
            months[d] = (self.start + timedelta(days=d)).month - 1
        return months

    @cached_property
    def hour_of_step(self) -> np.ndarray:
        """Hour of day (0-23) at the start of each reporting bucket."""
        sec_of_day = (self.step_offsets_s + self._start_sec_of_day) % SECONDS_PER_DAY
        return (sec_of_day // 3600).astype(np.int64)

    @cached_property
    def day_of_step(self) -> np.ndarray:
        """Horizon day index (0-based) of each reporting bucket."""
        return (self.step_offsets_s // SECONDS_PER_DAY).astype(np.int64)

    @property
    def _start_sec_of_day(self) -> float:
        s = self.start
        return s.hour * 3600 + s.minute * 60 + s.second

    def timestamps(self) -> list[datetime]:
        step = timedelta(seconds=self.timestep_s)
        return [self.start + i * step for i in range(self.n_steps)]

    def iso_timestamps(self) -> np.ndarray:
        """ISO-8601 strings per bucket, second resolution."""
        base = np.datetime64(self.start.replace(microsecond=0), "s")
        ticks = base + np.round(self.step_offsets_s).astype(np.int64).astype("timedelta64[s]")
        return np.datetime_as_string(ticks, unit="s")

    def day_start_s(self, day: int) -> float:
        return day * SECONDS_PER_DAY

"""User-behavior distributions: when work arrives and what it looks like.

Covers the temporal load shape (hour-of-day, day-of-week, month-of-year
weights composed multiplicatively), the categorical job mix (workload type,
then node count within type), the inference traffic mix, and exact integer
apportionment of a node pool. All sampling goes through caller-owned numpy
generators so runs stay reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Generic, Sequence, TypeVar

import numpy as np

from .errors import AllZeroWeights, NegativeWeight
from .profiles import ProfileBank, WorkloadType
from .timegrid import SECONDS_PER_DAY, TimeGrid

K = TypeVar("K")

HOURS_PER_DAY = 24
DAYS_PER_WEEK = 7
MONTHS_PER_YEAR = 12


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for a named substream of the run seed."""
    return np.random.default_rng((int(seed), *map(int, stream)))


def derive_seed(seed: int, *stream: int) -> int:
    """Stable integer sub-seed for APIs that take a plain seed."""
    return int(np.random.SeedSequence((int(seed), *map(int, stream))).generate_state(1)[0])


def normalize(weights: Sequence[float], what: str = "weights") -> np.ndarray:
    """Scale non-negative weights to sum to one."""
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise AllZeroWeights(f"{what}: empty")
    if np.any(w < 0):
        raise NegativeWeight(f"{what}: negative entry in {w.tolist()}")
    total = float(w.sum())
    if total <= 0:
        raise AllZeroWeights(f"{what}: all entries zero")
    return w / total


@dataclass(frozen=True)
class Categorical(Generic[K]):
    """Finite categorical distribution with stable key order."""

    keys: tuple[K, ...]
    probabilities: np.ndarray

    @classmethod
    def from_weights(cls, pairs: Sequence[tuple[K, float]]) -> "Categorical[K]":
        keys = tuple(k for k, _ in pairs)
        probs = normalize([w for _, w in pairs], what="categorical weights")
        return cls(keys=keys, probabilities=probs)

    def probability(self, key: K) -> float:
        return float(self.probabilities[self.keys.index(key)])

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(len(self.keys), size=n, p=self.probabilities)

    def sample(self, rng: np.random.Generator) -> K:
        return self.keys[int(rng.choice(len(self.keys), p=self.probabilities))]


def largest_remainder(total: int, weights: Sequence[float]) -> np.ndarray:
    """Apportion ``total`` units proportionally to ``weights``, summing exactly.

    Floors the proportional shares, then hands the leftover units to the
    largest fractional remainders (ties broken by position).
    """
    if total < 0:
        raise ValueError(f"total must be >= 0, got {total}")
    shares = normalize(weights, what="apportionment weights") * total
    counts = np.floor(shares).astype(np.int64)
    leftover = total - int(counts.sum())
    if leftover > 0:
        remainders = shares - counts
        # argsort is stable, so equal remainders resolve to the lower index
        order = np.argsort(-remainders, kind="stable")
        counts[order[:leftover]] += 1
    return counts


@dataclass(frozen=True)
class TemporalWeights:
    """Hour-of-day, day-of-week, and month-of-year load modulation.

    Each vector is stored normalized to sum to one. The three factors
    compose multiplicatively; anything that needs a per-day scale over a
    concrete horizon renormalizes the composed day weights there (see
    ``horizon_day_weights``), so the average daily load is preserved.
    """

    hourly: np.ndarray
    day_of_week: np.ndarray
    monthly: np.ndarray

    @classmethod
    def from_weights(cls, hourly: Sequence[float],
                     day_of_week: Sequence[float] | None = None,
                     monthly: Sequence[float] | None = None) -> "TemporalWeights":
        hours = normalize(hourly, what="hourly weights")
        if hours.size != HOURS_PER_DAY:
            raise ValueError(f"need {HOURS_PER_DAY} hourly weights, got {hours.size}")
        days = (np.full(DAYS_PER_WEEK, 1.0 / DAYS_PER_WEEK) if day_of_week is None
                else normalize(day_of_week, what="day_of_week weights"))
        if days.size != DAYS_PER_WEEK:
            raise ValueError(f"need {DAYS_PER_WEEK} day_of_week weights, got {days.size}")
        months = (np.full(MONTHS_PER_YEAR, 1.0 / MONTHS_PER_YEAR) if monthly is None
                  else normalize(monthly, what="monthly weights"))
        if months.size != MONTHS_PER_YEAR:
            raise ValueError(f"need {MONTHS_PER_YEAR} monthly weights, got {months.size}")
        return cls(hourly=hours, day_of_week=days, monthly=months)

    @classmethod
    def flat(cls) -> "TemporalWeights":
        return cls.from_weights([1.0] * HOURS_PER_DAY)

    def timestep_weight(self, hour: int, day_of_week: int, month: int) -> float:
        """Composed (unnormalized over any horizon) weight of one timestamp."""
        return float(self.hourly[hour] * self.day_of_week[day_of_week]
                     * self.monthly[month])

    def horizon_day_weights(self, grid: TimeGrid) -> np.ndarray:
        """Per-day multipliers over the grid, normalized to mean one.

        Composes day-of-week and monthly weights for each horizon day, then
        rescales so a calibrated daily count keeps its meaning as the
        horizon-average daily count.
        """
        raw = self.day_of_week[grid.day_of_week] * self.monthly[grid.month_of_day]
        total = float(raw.sum())
        if total <= 0:
            raise AllZeroWeights("temporal weights vanish on every horizon day")
        return raw * (grid.days / total)

    def sample_day_offsets(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Arrival offsets within one day (seconds): categorical over hours,
        uniform within the chosen hour."""
        hours = rng.choice(HOURS_PER_DAY, size=n, p=self.hourly)
        return (hours + rng.random(n)) * 3600.0

    def step_fractions(self, steps_per_day: int) -> np.ndarray:
        """Fraction of a day's load landing in each step of the day.

        Each hour's weight spreads evenly across the steps it covers; steps
        straddling an hour boundary take the length-weighted blend.
        """
        edges = np.linspace(0.0, HOURS_PER_DAY, steps_per_day + 1)
        cum_hours = np.concatenate([[0.0], np.cumsum(self.hourly)])
        cum = np.interp(edges, np.arange(HOURS_PER_DAY + 1), cum_hours)
        return np.diff(cum)


@dataclass(frozen=True)
class JobMixDistribution:
    """What a batch job looks like: workload type, then node count within type."""

    type_probs: Categorical[WorkloadType]
    node_count_probs: dict[WorkloadType, Categorical[int]]

    @classmethod
    def from_weights(cls, type_weights: dict[WorkloadType, float],
                     node_count_weights: dict[WorkloadType, dict[int, float]],
                     ) -> "JobMixDistribution":
        types = Categorical.from_weights(sorted(type_weights.items(),
                                                key=lambda kv: kv[0].value))
        per_type: dict[WorkloadType, Categorical[int]] = {}
        for wtype in types.keys:
            try:
                counts = node_count_weights[wtype]
            except KeyError:
                raise AllZeroWeights(
                    f"no node_count weights for workload type {wtype.value!r}") from None
            per_type[wtype] = Categorical.from_weights(sorted(counts.items()))
        return cls(type_probs=types, node_count_probs=per_type)

    def flat_pairs(self) -> list[tuple[tuple[WorkloadType, int], float]]:
        """Joint (type, node_count) probabilities, for vectorized sampling."""
        pairs = []
        for wtype, p_type in zip(self.type_probs.keys, self.type_probs.probabilities):
            inner = self.node_count_probs[wtype]
            for n, p_n in zip(inner.keys, inner.probabilities):
                pairs.append(((wtype, int(n)), float(p_type) * float(p_n)))
        return pairs

    def validate_against(self, bank: ProfileBank) -> None:
        for (wtype, n), _ in self.flat_pairs():
            bank.replicates((wtype, n))  # raises UnknownProfileKey


def sample_job(mix: JobMixDistribution, weights: TemporalWeights, day: int,
               rng: np.random.Generator) -> tuple[float, WorkloadType, int]:
    """Draw one job's arrival offset and shape for a given horizon day.

    The arrival hour follows the hourly weights with a uniform offset inside
    the hour; type and node count come from the categorical mix. Day-level
    scaling is the caller's business (it sets how many jobs land on the day).
    """
    offset = float(weights.sample_day_offsets(rng, 1)[0])
    wtype = mix.type_probs.sample(rng)
    nodes = int(mix.node_count_probs[wtype].sample(rng))
    return day * float(SECONDS_PER_DAY) + offset, wtype, nodes


@dataclass(frozen=True)
class InferenceType:
    """One inference traffic class: share, instance geometry, rate cap."""

    name: str
    share: float
    max_rate_pps: float  # per-instance sustainable request rate
    nodes_per_instance: int = 1
    latency_cap_s: float | None = None  # documentation; the rate cap stands in for it

    def __post_init__(self):
        if self.share < 0:
            raise ValueError(f"type {self.name!r}: share must be >= 0")
        if self.max_rate_pps <= 0:
            raise ValueError(f"type {self.name!r}: max_rate_pps must be > 0")
        if self.nodes_per_instance < 1:
            raise ValueError(f"type {self.name!r}: nodes_per_instance must be >= 1")
        if self.latency_cap_s is not None and self.latency_cap_s <= 0:
            raise ValueError(f"type {self.name!r}: latency_cap_s must be > 0")

"""Exception and warning types shared across the simulator."""


class FacsimError(Exception):
    """Base class for all simulator errors."""


# --- trace / profile errors ---

class MalformedTrace(FacsimError):
    """Trace file has a bad row or non-monotone timestamps."""


class EmptyTrace(FacsimError):
    """Trace contains no samples."""


class NegativePower(FacsimError):
    """Trace contains a negative power reading."""


class TimestepTooSmall(FacsimError):
    """Requested resampling timestep is finer than the source sampling."""


class InvalidShapeParams(FacsimError):
    """Synthetic profile parameters are inconsistent."""


class UnknownProfileKey(FacsimError):
    """No profile registered for the requested (type, node count) key."""


class MissingRateSample(FacsimError):
    """No sustained-rate power sample available for an inference type."""


# --- distribution errors ---

class AllZeroWeights(FacsimError):
    """Weight vector has no positive entry."""


class NegativeWeight(FacsimError):
    """Weight vector has a negative entry."""


# --- calibration errors ---

class CannotReachTarget(FacsimError):
    """Target utilization is unreachable for the given workload mix."""

    def __init__(self, msg: str, max_achievable: float | None = None):
        super().__init__(msg)
        self.max_achievable = max_achievable


class NonConvergence(FacsimError):
    """Bisection hit its iteration cap; carries the best iterate found."""

    def __init__(self, msg: str, best=None):
        super().__init__(msg)
        self.best = best


# --- scheduling / simulation errors ---

class JobTooLarge(FacsimError):
    """A job requests more nodes than the facility has."""


class InfeasibleSchedule(FacsimError):
    """A schedule exceeds the node pool at some instant."""


# --- metrics errors ---

class EmptySeries(FacsimError):
    """Operation requires a non-empty facility time series."""


class InsufficientSpan(FacsimError):
    """Series does not cover one full period of the requested profile."""


# --- config errors ---

class ConfigParse(FacsimError):
    """Config file could not be read or parsed."""


class ConfigInvalid(FacsimError):
    """Config parsed but failed validation; carries every violation found."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class AuditFailure(FacsimError):
    """A pre-write consistency audit failed; no artifacts were written."""


# --- warnings (reported conditions that do not abort) ---

class DegenerateMixWarning(UserWarning):
    """An inference type with positive probability rounded to zero nodes."""


class OrphanedLoadWarning(UserWarning):
    """Requests arrived for a type with no instances; recorded as incomplete."""

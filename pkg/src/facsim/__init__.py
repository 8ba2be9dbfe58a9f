"""facsim: whole-facility energy simulation from node-level power profiles.

Scales measured (or synthesized) node power traces of individual GenAI
workloads up to a facility of thousands of nodes, producing power,
utilization, and service-quality time series calibrated to a target average
utilization. Two operating modes: colocation (batch jobs scheduled FIFO onto
a shared pool) and inference (a partitioned pool autoscaling instances to a
request rate).
"""

__version__ = "0.1.0"

from .config import CalibrationSettings, RunConfig, load_config, load_weights
from .distributions import (Categorical, InferenceType, JobMixDistribution,
                            TemporalWeights, largest_remainder, sample_job)
from .engine import (AuditReport, FacilityConfig, ScheduledJobs,
                     SimulationResult, audit_concurrency, run_colocation,
                     schedule_fifo, simulate)
from .errors import FacsimError
from .inference import (InferenceResult, RequestCalibration, allocate_nodes,
                        calibrate_daily_requests, distribute_rate,
                        instances_required, simulate_inference)
from .jobgen import (CalibrationResult, CalibrationTarget, Job, JobList,
                     calibrate_daily_jobs, estimate_utilization, generate_jobs)
from .metrics import (AggregateSummary, PeriodicProfile, SeriesSummary,
                      nearest_rank_percentile, peak_to_average,
                      periodic_profile, queue_stats, summarize_run,
                      summarize_series)
from .profiles import (PowerProfile, ProfileBank, ProfileSummary, WorkloadType,
                       load_trace, resample, summarize, synthesize_profile,
                       synthesize_rate_sample, write_trace)
from .timegrid import TimeGrid

__all__ = [
    "__version__",
    "AggregateSummary",
    "AuditReport",
    "CalibrationResult",
    "CalibrationSettings",
    "CalibrationTarget",
    "Categorical",
    "FacilityConfig",
    "FacsimError",
    "InferenceResult",
    "InferenceType",
    "Job",
    "JobList",
    "JobMixDistribution",
    "PeriodicProfile",
    "PowerProfile",
    "ProfileBank",
    "ProfileSummary",
    "RequestCalibration",
    "RunConfig",
    "ScheduledJobs",
    "SeriesSummary",
    "SimulationResult",
    "TemporalWeights",
    "TimeGrid",
    "WorkloadType",
    "allocate_nodes",
    "audit_concurrency",
    "calibrate_daily_jobs",
    "calibrate_daily_requests",
    "distribute_rate",
    "estimate_utilization",
    "generate_jobs",
    "instances_required",
    "largest_remainder",
    "load_config",
    "load_trace",
    "load_weights",
    "nearest_rank_percentile",
    "peak_to_average",
    "periodic_profile",
    "queue_stats",
    "resample",
    "run_colocation",
    "sample_job",
    "schedule_fifo",
    "simulate",
    "simulate_inference",
    "summarize",
    "summarize_run",
    "summarize_series",
    "synthesize_profile",
    "synthesize_rate_sample",
    "write_trace",
]

#!/usr/bin/env python3
"""Write a synthetic node-level profile bank to disk.

Produces batch job traces (training and fine-tuning at several node counts)
plus sustained-rate serving samples for two services, in the trace CSV
format the simulator loads. Deterministic for a fixed seed.
"""

import argparse
from pathlib import Path

from facsim.profiles import (WorkloadType, synthesize_profile,
                             synthesize_rate_sample, write_trace)

BATCH_SHAPES = [
    # (workload type, node counts, base hours, per-node base kW, plateau kW)
    (WorkloadType.TRAINING, (2, 4, 8), 3.0, 0.8, 3.1),
    (WorkloadType.FINE_TUNING, (1, 2), 1.0, 0.7, 2.9),
]

RATE_SERVICES = [
    # (service, per-instance cap in requests/s, saturated kW)
    ("chat", 50.0, 2.8),
    ("code", 100.0, 3.0),
]

RATE_FRACTIONS = (0.125, 0.25, 0.5, 1.0)


def write_bank(dest: Path, seed: int, replicates: int,
               sample_interval_s: float) -> int:
    dest.mkdir(parents=True, exist_ok=True)
    written = 0
    for wtype, node_counts, base_h, base_kw, plateau_kw in BATCH_SHAPES:
        for n in node_counts:
            for r in range(replicates):
                prof = synthesize_profile(
                    base_kw=base_kw * n,
                    plateau_kw=plateau_kw * n,
                    ramp_s=180.0,
                    period_s=1200.0,
                    dip_fraction=0.2,
                    duration_s=base_h * 3600.0 * (1.0 + 0.4 * r),
                    node_count=n,
                    seed=seed + 101 * n + r,
                    workload_type=wtype,
                    sample_interval_s=sample_interval_s)
                write_trace(prof, dest / f"{prof.id}.csv")
                written += 1
    for service, cap_pps, sat_kw in RATE_SERVICES:
        for frac in RATE_FRACTIONS:
            prof = synthesize_rate_sample(
                service=service,
                request_rate_pps=cap_pps * frac,
                saturated_kw=sat_kw,
                idle_kw=0.42,
                rate_scale_pps=cap_pps / 3.0,
                duration_s=1800.0,
                seed=seed + int(cap_pps * frac),
                sample_interval_s=sample_interval_s)
            write_trace(prof, dest / f"{prof.id}.csv")
            written += 1
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True,
                        help="directory to write trace CSVs into")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--replicates", type=int, default=3,
                        help="traces per (type, node count) group")
    parser.add_argument("--interval", type=float, default=1.0,
                        help="trace sample interval in seconds")
    args = parser.parse_args(argv)
    count = write_bank(args.out, args.seed, args.replicates, args.interval)
    print(f"wrote {count} traces to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

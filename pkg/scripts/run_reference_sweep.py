#!/usr/bin/env python3
"""Run the reference facility sweep end to end and print the headline table.

Synthesizes a profile bank, calibrates both operating modes to each target
utilization on a 284-node facility, writes the per-target artifacts, and
prints one row per (mode, target) with the aggregate power and utilization
statistics. Everything lands under --out; reruns are byte-identical.
"""

import argparse
import json
import shutil
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from make_synthetic_profiles import write_bank

from facsim.cli import main as facsim_main
from facsim.seriesio import read_json

REPO = Path(__file__).resolve().parents[1]
MODES = ("colocation", "inference")


def prepare_config(mode: str, out: Path, args: argparse.Namespace) -> Path:
    base = json.loads((REPO / "configs" / f"{mode}_sweep.json").read_text())
    base["profiles_dir"] = "profiles"
    base["weights"] = f"weights_{mode}.json"
    base["n_nodes"] = args.nodes
    base["days"] = args.days
    base["timestep_s"] = args.timestep
    base["seed"] = args.seed
    shutil.copy(REPO / "configs" / f"weights_{mode}.json",
                out / f"weights_{mode}.json")
    path = out / f"{mode}_run.json"
    path.write_text(json.dumps(base, indent=2) + "\n", encoding="utf-8")
    return path


def print_table(out: Path, modes: list[str]) -> None:
    header = (f"{'mode':<12} {'target':>6} {'mean MW':>8} {'max MW':>7} "
              f"{'PAR':>5} {'util %':>7} {'load/day':>10}")
    print(header)
    print("-" * len(header))
    for mode in modes:
        manifest = read_json(out / mode / "manifest.json")
        for tdir in manifest["target_dirs"]:
            summary = read_json(out / tdir / "summary.json")
            agg = summary["aggregate"]
            per_day = (agg["colocation"]["jobs_per_day"] if mode == "colocation"
                       else agg["inference"]["daily_prompts"])
            print(f"{mode:<12} {summary['target_utilization']:>5.0%} "
                  f"{agg['power_mw']['mean']:>8.3f} {agg['power_mw']['max']:>7.3f} "
                  f"{agg['peak_to_average']:>5.2f} "
                  f"{agg['utilization_pct']['mean']:>7.2f} {per_day:>10.0f}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=REPO / "runs" / "reference")
    parser.add_argument("--nodes", type=int, default=284)
    parser.add_argument("--days", type=int, default=30)
    parser.add_argument("--timestep", type=float, default=60.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--parallel", type=int, default=1)
    parser.add_argument("--modes", nargs="+", choices=MODES, default=list(MODES))
    args = parser.parse_args(argv)

    args.out.mkdir(parents=True, exist_ok=True)
    n_traces = write_bank(args.out / "profiles", args.seed, replicates=3,
                          sample_interval_s=1.0)
    print(f"profile bank: {n_traces} traces under {args.out / 'profiles'}")

    for mode in args.modes:
        cfg = prepare_config(mode, args.out, args)
        code = facsim_main(["run", "--config", str(cfg), "--out", str(args.out),
                            "--parallel", str(args.parallel)])
        if code != 0:
            print(f"{mode} sweep failed with exit code {code}", file=sys.stderr)
            return code
    print_table(args.out, args.modes)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

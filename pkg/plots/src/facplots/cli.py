"""Shared command line runner for the two figure scripts."""

from __future__ import annotations

import argparse
import sys

from . import theme
from .io import MissingInput, discover_targets, read_profile
from .render import daily_ticks, render_figure, weekly_ticks, write_echo


def _run(argv, *, kind: str, profile_name: str, x_label: str, ticks) -> int:
    parser = argparse.ArgumentParser(
        description=f"Render the {kind} percentile-band panels of a sweep.")
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="mode directory of a completed sweep "
                             "(e.g. out/colocation)")
    parser.add_argument("--out", dest="out_file", required=True,
                        help="image file to write")
    parser.add_argument("--echo", dest="echo_file", default=None,
                        help="also dump the plotted arrays to this JSON file")
    args = parser.parse_args(argv)
    try:
        panels = [(label, read_profile(path))
                  for label, path in discover_targets(args.in_dir, profile_name)]
    except MissingInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.echo_file is not None:
        write_echo(args.echo_file, kind, panels)
    render_figure(args.out_file, panels, x_label, ticks)
    print(f"wrote {args.out_file} ({len(panels)} panels)")
    return 0


def daily_main(argv=None) -> int:
    return _run(argv, kind="daily", profile_name="daily_profile.csv",
                x_label=theme.DAILY_X_LABEL, ticks=daily_ticks())


def weekly_main(argv=None) -> int:
    return _run(argv, kind="weekly", profile_name="weekly_profile.csv",
                x_label=theme.WEEKLY_X_LABEL, ticks=weekly_ticks())

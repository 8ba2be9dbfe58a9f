#!/usr/bin/env python3
"""Render weekly percentile-band load panels from a sweep output directory."""

import sys

from facplots.cli import weekly_main

if __name__ == "__main__":
    raise SystemExit(weekly_main(sys.argv[1:]))

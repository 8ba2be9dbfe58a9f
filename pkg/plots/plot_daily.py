#!/usr/bin/env python3
"""Render daily percentile-band load panels from a sweep output directory."""

import sys

from facplots.cli import daily_main

if __name__ == "__main__":
    raise SystemExit(daily_main(sys.argv[1:]))

"""Batch figure scripts for sweep output directories."""

from .io import MissingInput, discover_targets, read_profile

__all__ = ["MissingInput", "discover_targets", "read_profile"]

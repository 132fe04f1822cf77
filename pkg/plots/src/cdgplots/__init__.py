"""Batch figure rendering for cdgrmhd solver outputs."""

__version__ = "0.1.0"

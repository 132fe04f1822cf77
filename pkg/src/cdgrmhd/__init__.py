"""Bound-preserving, locally divergence-free central DG solver for special
relativistic magnetohydrodynamics on overlapping meshes."""

__version__ = "0.1.0"

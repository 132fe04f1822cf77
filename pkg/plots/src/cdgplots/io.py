"""Readers for the solver's documented output formats.

The contract (see the solver's docs/config.md): 1D profiles are CSV with
header ``x,rho,v1,v2,v3,B1,B2,B3,p,W``; 2D snapshots are per-variable
little-endian float64 binary dumps ``<prefix>_<var>.bin`` shaped (nx, ny)
row-major, described by a ``<prefix>.meta`` sidecar of ``key = value``
lines; convergence tables and divergence series are plain CSV.
"""

from __future__ import annotations

import os

import numpy as np

PROFILE_COLUMNS = ("x", "rho", "v1", "v2", "v3", "B1", "B2", "B3", "p", "W")


class SchemaError(ValueError):
    """Input does not match the documented solver output formats."""


def read_profile(path: str):
    """1D profile CSV -> dict of column name to array."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if tuple(header) != PROFILE_COLUMNS:
        raise SchemaError(f"{path}: unexpected profile columns {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim == 1:
        data = data[None, :]
    return {name: data[:, i] for i, name in enumerate(PROFILE_COLUMNS)}


def read_meta(prefix: str) -> dict:
    path = prefix + ".meta"
    if not os.path.exists(path):
        raise SchemaError(f"missing sidecar {path}")
    meta = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                key, val = line.split("=", 1)
                meta[key.strip()] = val.strip()
    for key in ("nx", "ny", "variables", "xmin", "xmax", "ymin", "ymax"):
        if key not in meta:
            raise SchemaError(f"{path}: sidecar lacks {key!r}")
    return meta


def read_grid(prefix: str, var: str):
    """One variable of a 2D snapshot -> (meta, (nx, ny) array)."""
    meta = read_meta(prefix)
    names = meta["variables"].split(",")
    if var not in names:
        raise SchemaError(f"{prefix}: variable {var!r} not in {names}")
    nx, ny = int(meta["nx"]), int(meta["ny"])
    arr = np.fromfile(f"{prefix}_{var}.bin", dtype="<f8")
    if arr.size != nx * ny:
        raise SchemaError(f"{prefix}_{var}.bin: expected {nx * ny} values, got {arr.size}")
    return meta, arr.reshape(nx, ny)


def read_convergence(path: str):
    """Convergence CSV -> list of row dicts (numbers parsed)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    expected = ["n", "l1", "order_l1", "l2", "order_l2", "linf", "order_linf"]
    if header != expected:
        raise SchemaError(f"{path}: unexpected convergence columns {header}")
    rows = []
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim == 1:
        data = data[None, :]
    for row in data:
        rows.append({name: row[i] for i, name in enumerate(expected)})
    return rows


def read_divergence_series(path: str):
    with open(path) as fh:
        header = fh.readline().strip()
    if header != "t,eps_div":
        raise SchemaError(f"{path}: unexpected series header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim == 1:
        data = data[None, :]
    return data[:, 0], data[:, 1]

"""Run configuration parsing and structured result output.

The config format is flat ``key = value`` lines (INI style, no sections);
``#`` starts a comment.  Unknown keys are rejected.  Command-line overrides
use the same ``key=value`` syntax.  All keys are documented in
``docs/config.md``.

Snapshots: 1D runs emit a CSV profile sampled at primal cell centers; 2D
runs emit one little-endian float64 binary grid dump per variable plus a
text sidecar describing the grid, which together form the contract with the
plotting frontend.  The divergence time series goes to ``eps_div.csv``.
"""

from __future__ import annotations

import os
import subprocess
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .problems import PROBLEM_IDS


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


_BOOL = {"true": True, "on": True, "1": True, "yes": True,
         "false": False, "off": False, "0": False, "no": False}

SNAPSHOT_VARIABLES = ("rho", "v1", "v2", "v3", "B1", "B2", "B3", "p", "W")


@dataclass
class RunConfig:
    problem: str = "rp1"
    nx: int = 0              # 0: use the problem's default mesh
    ny: int = 0
    k: int = 2
    eos: str = ""            # empty: problem default
    cfl: float = 0.25
    theta: float = 1.0
    cad: str = "cui-ding-wu"
    tvb_m: float = -1.0      # negative: problem default (off for smooth)
    bp_limiter: bool = True
    sources: bool = True
    strict_bp_cfl: bool = False
    integrator: str = "rk3"
    t_end: float = -1.0      # negative: problem default
    out: str = "out"
    output_every: float = 0.0  # 0: final snapshot only
    divergence_report: bool = True
    blast_ba: float = 0.5
    seed: int = 2024
    threads: int = 0         # 0: leave the runtime default

    def validate(self) -> "RunConfig":
        if self.problem not in PROBLEM_IDS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.k not in (1, 2, 3):
            raise ConfigError(f"k must be 1, 2, or 3, got {self.k}")
        if self.cfl <= 0.0:
            raise ConfigError("cfl must be positive")
        if not 0.0 < self.theta <= 1.0:
            raise ConfigError("theta must lie in (0, 1]")
        if self.cad not in ("cui-ding-wu", "zhang-shu"):
            raise ConfigError(f"cad must be cui-ding-wu or zhang-shu, got {self.cad!r}")
        if self.integrator not in ("rk3", "ms3"):
            raise ConfigError(f"integrator must be rk3 or ms3, got {self.integrator!r}")
        if self.nx and self.nx < 4 or self.ny and self.ny < 4:
            raise ConfigError("mesh must have at least 4 cells per axis")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        return self


_KEY_ALIASES = {"n": "nx", "ba": "blast_ba", "blast.ba": "blast_ba",
                "tvb": "tvb_m", "output": "out"}


def _coerce(name: str, raw: str):
    ftypes = {f.name: f.type for f in fields(RunConfig)}
    t = ftypes[name]
    raw = raw.strip()
    if t == "bool":
        low = raw.lower()
        if low not in _BOOL:
            raise ConfigError(f"cannot parse boolean {name} = {raw!r}")
        return _BOOL[low]
    if t == "int":
        return int(raw)
    if t == "float":
        return float(raw)
    return raw.strip("\"'")


def parse_config(path: Optional[str] = None, overrides: Optional[list[str]] = None
                 ) -> RunConfig:
    """Build a validated RunConfig from an optional file plus overrides."""
    cfg = RunConfig()
    entries: list[tuple[str, str, str]] = []
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = stripped.split("=", 1)
                entries.append((key.strip(), val, f"{path}:{lineno}"))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, val = item.split("=", 1)
        entries.append((key.strip(), val, "command line"))
    known = {f.name for f in fields(RunConfig)}
    for key, val, where in entries:
        key = _KEY_ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            setattr(cfg, key, _coerce(key, val))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from exc
    return cfg.validate()


def emit_config(cfg: RunConfig) -> str:
    """Canonical textual form; parsing it back reproduces the config."""
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def _git_hash() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             capture_output=True, text=True, timeout=5,
                             cwd=os.path.dirname(os.path.abspath(__file__)))
        if out.returncode == 0:
            return out.stdout.strip()
    except Exception:
        pass
    return "unknown"


def write_snapshot_1d(path: str, x: np.ndarray, prim: np.ndarray, W: np.ndarray):
    """CSV profile: x, rho, v1..v3, B1..B3, p, W at cell centers."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    header = "x," + ",".join(SNAPSHOT_VARIABLES)
    data = np.column_stack([x, prim[:, 0], prim[:, 1], prim[:, 2], prim[:, 3],
                            prim[:, 4], prim[:, 5], prim[:, 6], prim[:, 7], W])
    np.savetxt(path, data, delimiter=",", header=header, comments="",
               fmt="%.17g")


def read_snapshot_1d(path: str):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 0], data[:, 1:]


def write_snapshot_2d(prefix: str, meta: dict, grids: dict):
    """Per-variable float64 little-endian binary dumps plus a text sidecar.

    ``grids`` maps variable name -> (nx, ny) array stored row-major (x fastest
    varying dimension last).  The sidecar lists the grid geometry and the
    variables present.
    """
    os.makedirs(os.path.dirname(prefix) or ".", exist_ok=True)
    names = []
    for name, arr in grids.items():
        arr = np.ascontiguousarray(arr, dtype="<f8")
        arr.tofile(f"{prefix}_{name}.bin")
        names.append(name)
    side = dict(meta)
    side.setdefault("git", _git_hash())
    side["variables"] = ",".join(names)
    side["dtype"] = "<f8"
    side["order"] = "C"
    with open(f"{prefix}.meta", "w") as fh:
        for key, val in side.items():
            fh.write(f"{key} = {val}\n")


def read_snapshot_2d(prefix: str):
    meta = {}
    with open(f"{prefix}.meta") as fh:
        for line in fh:
            if "=" in line:
                key, val = line.split("=", 1)
                meta[key.strip()] = val.strip()
    nx, ny = int(meta["nx"]), int(meta["ny"])
    grids = {}
    for name in meta["variables"].split(","):
        grids[name] = np.fromfile(f"{prefix}_{name}.bin", dtype="<f8").reshape(nx, ny)
    return meta, grids


class DivergenceSeries:
    """Appends (t, eps_div) rows to ``eps_div.csv`` in the output directory."""

    def __init__(self, outdir: str):
        os.makedirs(outdir, exist_ok=True)
        self.path = os.path.join(outdir, "eps_div.csv")
        with open(self.path, "w") as fh:
            fh.write("t,eps_div\n")

    def append(self, t: float, value: float):
        with open(self.path, "a") as fh:
            fh.write(f"{t:.17g},{value:.17g}\n")

"""Figure rendering for the five supported figure types.

Jobs are described by flat ``key = value`` INI files: ``type`` selects the
figure kind (profile / pseudocolor / schlieren / convergence / divergence),
``input`` points at the snapshot or CSV, ``out`` names the image file.
Inputs are never modified; schema mismatches raise loudly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (PROFILE_COLUMNS, SchemaError, read_convergence,
                 read_divergence_series, read_grid, read_profile)

FIGURE_TYPES = ("profile", "pseudocolor", "schlieren", "convergence", "divergence")


@dataclass
class PlotJob:
    type: str
    input: str
    out: str
    var: str = "rho"
    reference: Optional[str] = None
    cmap: str = "viridis"
    contrast: float = 60.0
    log: bool = False
    title: str = ""

    def __post_init__(self):
        if self.type not in FIGURE_TYPES:
            raise SchemaError(f"unknown figure type {self.type!r}")


def parse_job(path: str) -> PlotJob:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise SchemaError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in stripped.split("=", 1))
            values[key] = val
    known = {"type", "input", "out", "var", "reference", "cmap", "contrast",
             "log", "title"}
    unknown = set(values) - known
    if unknown:
        raise SchemaError(f"{path}: unknown job keys {sorted(unknown)}")
    for req in ("type", "input", "out"):
        if req not in values:
            raise SchemaError(f"{path}: job needs {req!r}")
    if "contrast" in values:
        values["contrast"] = float(values["contrast"])
    if "log" in values:
        values["log"] = values["log"].lower() in ("1", "true", "yes", "on")
    return PlotJob(**values)


def _save(fig, out):
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def render_profile(job: PlotJob):
    data = read_profile(job.input)
    if job.var not in PROFILE_COLUMNS[1:]:
        raise SchemaError(f"unknown profile variable {job.var!r}")
    fig, ax = plt.subplots(figsize=(6, 4))
    if job.reference:
        ref = read_profile(job.reference)
        ax.plot(ref["x"], ref[job.var], "-", color="0.6", lw=1.0, label="reference")
    ax.plot(data["x"], data[job.var], "o", ms=2.2, color="tab:blue", label="CDG")
    if job.log:
        ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel(job.var)
    ax.legend(loc="best", fontsize=8)
    ax.set_title(job.title or job.var)
    return _save(fig, job.out)


def _grid_extent(meta):
    return (float(meta["xmin"]), float(meta["xmax"]),
            float(meta["ymin"]), float(meta["ymax"]))


def render_pseudocolor(job: PlotJob):
    meta, grid = read_grid(job.input, job.var)
    vals = np.log10(np.abs(grid) + 1e-300) if job.log else grid
    fig, ax = plt.subplots(figsize=(5.4, 4.5))
    im = ax.imshow(vals.T, origin="lower", extent=_grid_extent(meta),
                   cmap=job.cmap, aspect="equal")
    fig.colorbar(im, ax=ax, shrink=0.85)
    label = f"log10|{job.var}|" if job.log else job.var
    ax.set_title(job.title or f"{meta.get('problem', '')} {label} t={meta.get('t', '?')}")
    return _save(fig, job.out)


def render_schlieren(job: PlotJob):
    """Exponentially scaled gradient magnitude of the selected field."""
    meta, grid = read_grid(job.input, job.var)
    dx = (float(meta["xmax"]) - float(meta["xmin"])) / int(meta["nx"])
    dy = (float(meta["ymax"]) - float(meta["ymin"])) / int(meta["ny"])
    gx, gy = np.gradient(grid, dx, dy)
    mag = np.hypot(gx, gy)
    top = mag.max()
    shade = np.exp(-job.contrast * mag / top) if top > 0 else np.ones_like(mag)
    fig, ax = plt.subplots(figsize=(5.4, 4.5))
    ax.imshow(shade.T, origin="lower", extent=_grid_extent(meta),
              cmap="gray", vmin=0.0, vmax=1.0, aspect="equal")
    ax.set_title(job.title or f"schlieren {job.var} t={meta.get('t', '?')}")
    return _save(fig, job.out)


def render_convergence(job: PlotJob):
    """Log-log error plot plus the table values, verbatim from the CSV."""
    rows = read_convergence(job.input)
    fig, (ax, axt) = plt.subplots(
        1, 2, figsize=(9, 4), gridspec_kw={"width_ratios": [1.2, 1.0]})
    ns = np.array([r["n"] for r in rows])
    for norm, marker in (("l1", "o"), ("l2", "s"), ("linf", "^")):
        ax.loglog(ns, [r[norm] for r in rows], marker + "-", label=norm)
    ref = rows[0]["l1"] * (ns / ns[0]) ** -3.0
    ax.loglog(ns, ref, "k--", lw=0.8, label="order 3")
    ax.set_xlabel("N")
    ax.set_ylabel("error")
    ax.legend(fontsize=8)
    cell_text = [[f"{int(r['n'])}", f"{r['l1']:.3e}", f"{r['order_l1']:.2f}",
                  f"{r['l2']:.3e}", f"{r['order_l2']:.2f}",
                  f"{r['linf']:.3e}", f"{r['order_linf']:.2f}"] for r in rows]
    axt.axis("off")
    table = axt.table(cellText=cell_text,
                      colLabels=["N", "l1", "ord", "l2", "ord", "linf", "ord"],
                      loc="center")
    table.auto_set_font_size(False)
    table.set_fontsize(7.5)
    fig.suptitle(job.title or "convergence")
    _save(fig, job.out)
    return rows


def render_divergence(job: PlotJob):
    t, eps = read_divergence_series(job.input)
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.semilogy(t, np.maximum(eps, 1e-300), "-", color="tab:red")
    ax.set_xlabel("t")
    ax.set_ylabel("relative divergence error")
    ax.set_title(job.title or "divergence error history")
    return _save(fig, job.out)


RENDERERS = {
    "profile": render_profile,
    "pseudocolor": render_pseudocolor,
    "schlieren": render_schlieren,
    "convergence": render_convergence,
    "divergence": render_divergence,
}


def render(job: PlotJob):
    """Dispatch a job; returns the output path (convergence: the rows)."""
    return RENDERERS[job.type](job)

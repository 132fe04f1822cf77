"""Run orchestration: setup, limiting cadence, time loop, outputs, stats.

A run owns a problem, a mesh, the solver tables, and the limiter tables.
Every stage output is oscillation-limited (optional) then BP-limited, and
ghost layers are refreshed before the next right-hand-side evaluation, so
the solver only ever sees admissible point values.  The BP limiter doubles
as the cell-average admissibility monitor: it fails loudly the moment any
stage average leaves the admissible set.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .admissibility import in_g
from .basis import Mesh1D, Mesh2D
from .io_config import (DivergenceSeries, RunConfig, write_snapshot_1d,
                        write_snapshot_2d)
from .limiters import (AverageInadmissible, bp_limit_1d_kernel,
                       bp_limit_2d_kernel, limiter_points_1d, limiter_points_2d,
                       tvb_limit_1d_kernel, tvb_limit_2d_kernel)
from .problems import ProblemSpec, make_problem
from .quadrature import _gauss_nodes_unit, cad_cui_ding_wu, cad_zhang_shu
from .solver1d import Solution1D, Solver1D, fill_ghosts_1d
from .solver2d import Solution2D, Solver2D, eps_div, fill_ghosts_2d
from .state import cons_to_prim_batch, prim_to_cons
from .timestepping import TimeController, ssp_multistep3, ssp_rk3


class PhysicsFailure(RuntimeError):
    """Recovery breakdown or inadmissible cell average during a run."""


def _copy_state(state):
    return tuple(a.copy() for a in state)


def _advance_state(run, state, dt):
    """One step with the configured integrator; ms3 starts up with rk3 and
    needs a fixed step size, so clipped steps fall back to rk3."""
    if run.cfg.integrator != "ms3":
        return ssp_rk3(state, run._rhs, dt, post_stage=run._limit_state)
    if not hasattr(run, "_ms_hist"):
        run._ms_hist = []
        run._ms_dt = -1.0
    rhs_n = run._rhs(state)
    run._ms_hist.append((_copy_state(state), rhs_n))
    if len(run._ms_hist) > 4:
        run._ms_hist.pop(0)
    same_dt = abs(dt - run._ms_dt) <= 1e-12 * max(dt, run._ms_dt)
    run._ms_dt = dt
    if len(run._ms_hist) == 4 and same_dt:
        hist = [h[0] for h in run._ms_hist]
        rhss = [h[1] for h in run._ms_hist]
        return ssp_multistep3(hist, rhss, dt, post_stage=run._limit_state)
    return ssp_rk3(state, run._rhs, dt, post_stage=run._limit_state)


@dataclass
class RunStats:
    steps: int = 0
    bp_limited_cells: int = 0
    tvb_flagged_cells: int = 0
    beta_max: tuple = (0.0, 0.0)
    eps_div_max: float = 0.0
    wall_time: float = 0.0
    dt_min: float = math.inf


def _problem_from_config(cfg: RunConfig) -> ProblemSpec:
    kwargs = {}
    if cfg.problem == "blast":
        kwargs["ba"] = cfg.blast_ba
    if cfg.eos:
        kwargs["eos_key"] = cfg.eos
    if cfg.t_end >= 0.0:
        kwargs["t_end"] = cfg.t_end
    return make_problem(cfg.problem, **kwargs)


class Run1D:
    def __init__(self, cfg: RunConfig, problem: ProblemSpec | None = None):
        self.cfg = cfg
        self.problem = problem or _problem_from_config(cfg)
        n = cfg.nx or self.problem.default_mesh[0]
        self.mesh = Mesh1D(n, *self.problem.domain, bc=self.problem.bc)
        self.solver = Solver1D(cfg.k)
        self.sol = Solution1D.from_primitive(self.mesh, self.problem.eos, cfg.k,
                                             self.problem.initial)
        self.phi_lim = self.solver.basis.eval(limiter_points_1d(cfg.k))[0]
        self.tvb_m = cfg.tvb_m if cfg.tvb_m >= 0.0 else (self.problem.tvb_m or -1.0)
        self.controller = TimeController(cfg.cfl, cfg.theta, self.problem.t_end,
                                         cfg.strict_bp_cfl, cfg.k, cfg.cad)
        self.stats = RunStats()
        self._tau = None
        self._limit_state((self.sol.UI, self.sol.UJ))

    def _limit_state(self, state):
        UI, UJ = state
        self.sol.UI, self.sol.UJ = UI, UJ
        for arr, n in ((UI, self.mesh.n), (UJ, self.mesh.nd)):
            if self.tvb_m >= 0.0:
                flags = np.zeros(arr.shape[0], dtype=np.int64)
                tvb_limit_1d_kernel(arr, n, self.tvb_m * self.mesh.dx**2, flags)
                self.stats.tvb_flagged_cells += int(flags.sum())
            if self.cfg.bp_limiter:
                stats = np.zeros(arr.shape[0], dtype=np.int64)
                status = np.zeros(arr.shape[0], dtype=np.int64)
                bp_limit_1d_kernel(arr, n, self.phi_lim, stats, status)
                if status.any():
                    bad = int(np.nonzero(status)[0][0]) - 1
                    raise AverageInadmissible(f"1D cell average left G at cell {bad}")
                self.stats.bp_limited_cells += int((stats > 0).sum())
            else:
                avg = arr[1:n + 1, 0, :]
                ok = np.array([in_g(*u) for u in avg])
                if not ok.all():
                    raise AverageInadmissible(
                        f"1D cell average left G at cell {int(np.argmin(ok))}")
        fill_ghosts_1d(self.sol)
        return state

    def _rhs(self, state):
        self.sol.UI, self.sol.UJ = state
        return self.solver.rhs(self.sol, self._tau)

    def advance(self, dt: float):
        self._tau = dt / self.cfg.theta
        state = _advance_state(self, (self.sol.UI, self.sol.UJ), dt)
        self.sol.UI, self.sol.UJ = state
        self.sol.t += dt
        self.stats.steps += 1
        self.stats.dt_min = min(self.stats.dt_min, dt)

    def run(self, t_end: float | None = None, snapshot_hook=None):
        t_end = self.problem.t_end if t_end is None else t_end
        wall = time.time()
        next_out = self.cfg.output_every if self.cfg.output_every > 0 else math.inf
        while self.sol.t < t_end - 1e-13 * max(1.0, t_end):
            dt = self.controller.dt_1d(self.mesh.dx)
            dt = min(dt, t_end - self.sol.t)
            self.advance(dt)
            if snapshot_hook and self.sol.t >= next_out:
                snapshot_hook(self)
                next_out += self.cfg.output_every
        self.stats.wall_time = time.time() - wall
        return self.stats

    def primitive_profile(self):
        """(x, primitive array, Lorentz factor) at primal cell centers."""
        xc = self.mesh.primal_centers()
        u = self.sol.sample(xc, "primal")
        W, ok, _ = cons_to_prim_batch(u, self.problem.eos)
        if not ok.all():
            raise PhysicsFailure("snapshot recovery failed")
        lor = 1.0 / np.sqrt(1.0 - np.einsum("pc,pc->p", W[:, 1:4], W[:, 1:4]))
        return xc, W, lor

    def write_snapshot(self, outdir: str, tag: str = "final"):
        xc, W, lor = self.primitive_profile()
        path = os.path.join(outdir, f"{self.problem.id}_{tag}.csv")
        write_snapshot_1d(path, xc, W, lor)
        return path

    def error_norms(self, component: int = 2, npts: int = 4):
        """Integral error norms of a primitive component against the exact
        solution (mean-normalized L1/L2 plus the pointwise max)."""
        if self.problem.exact is None:
            raise ValueError("problem has no exact solution")
        g, w = _gauss_nodes_unit(npts)
        xc = self.mesh.primal_centers()
        X = (xc[:, None] + 0.5 * self.mesh.dx * g[None, :]).ravel()
        u = self.sol.sample(X, "primal")
        Wr, ok, _ = cons_to_prim_batch(u, self.problem.eos)
        if not ok.all():
            raise PhysicsFailure("error sampling hit an unrecoverable state")
        ex = self.problem.exact(X, self.sol.t)
        err = np.abs(Wr[:, component] - ex[:, component]).reshape(self.mesh.n, npts)
        wn = w / 2.0
        length = self.problem.domain[1] - self.problem.domain[0]
        l1 = float(np.einsum("cq,q->", err, wn)) * self.mesh.dx / length
        l2 = math.sqrt(float(np.einsum("cq,q->", err**2, wn)) * self.mesh.dx / length)
        return l1, l2, float(err.max())


class Run2D:
    def __init__(self, cfg: RunConfig, problem: ProblemSpec | None = None):
        self.cfg = cfg
        self.problem = problem or _problem_from_config(cfg)
        nx = cfg.nx or self.problem.default_mesh[0]
        ny = cfg.ny or self.problem.default_mesh[1]
        self.mesh = Mesh2D(nx, ny, *self.problem.domain, bc=self.problem.bc)
        self.solver = Solver2D(cfg.k, self.mesh)
        self.sol = Solution2D.from_primitive(self.mesh, self.problem.eos, cfg.k,
                                             self.problem.initial)
        if cfg.cad == "cui-ding-wu" and cfg.k <= 3:
            cad = cad_cui_ding_wu(cfg.k, 1.0 / self.mesh.dx, 1.0 / self.mesh.dy)
        else:
            cad = cad_zhang_shu(cfg.k, 1.0 / self.mesh.dx, 1.0 / self.mesh.dy)
        pts = limiter_points_2d(cfg.k, cad)
        self.phi_lim = self.solver.sb.eval(pts[:, 0], pts[:, 1])[0]
        ps1, ps2 = self.solver.vb.eval(pts[:, 0], pts[:, 1])
        self.ps1_lim, self.ps2_lim = ps1, ps2
        self.tvb_m = cfg.tvb_m if cfg.tvb_m >= 0.0 else (self.problem.tvb_m or -1.0)
        self.controller = TimeController(cfg.cfl, cfg.theta, self.problem.t_end,
                                         cfg.strict_bp_cfl, cfg.k, cfg.cad)
        self.stats = RunStats()
        self._tau = None
        self._beta = (0.0, 0.0)
        self._inflow_left = None
        if self.problem.inflow_left is not None:
            self._inflow_left = prim_to_cons(self.problem.inflow_left,
                                             self.problem.eos)
        self._bottom_inflow = None
        if self.problem.bottom_inflow is not None:
            fn = self.problem.bottom_inflow

            def conv(xc):
                mask, prim = fn(xc)
                return mask, prim_to_cons(prim, self.problem.eos)

            self._bottom_inflow = conv
        self._limit_state(self._state())

    def _state(self):
        return (self.sol.URI, self.sol.UBI, self.sol.URJ, self.sol.UBJ)

    def _limit_state(self, state):
        self.sol.URI, self.sol.UBI, self.sol.URJ, self.sol.UBJ = state
        mesh = self.mesh
        for UR, UB, ncx, ncy in ((self.sol.URI, self.sol.UBI, mesh.nx, mesh.ny),
                                 (self.sol.URJ, self.sol.UBJ, mesh.ndx, mesh.ndy)):
            if self.tvb_m >= 0.0:
                flags = np.zeros(UR.shape[:2], dtype=np.int64)
                tvb_limit_2d_kernel(UR, ncx, ncy, self.tvb_m * mesh.dx**2,
                                    self.tvb_m * mesh.dy**2, flags)
                self.stats.tvb_flagged_cells += int(flags.sum())
            if self.cfg.bp_limiter:
                stats = np.zeros(UR.shape[:2], dtype=np.int64)
                status = np.zeros(UR.shape[:2], dtype=np.int64)
                bp_limit_2d_kernel(UR, UB, ncx, ncy, self.phi_lim, self.ps1_lim,
                                   self.ps2_lim, stats, status)
                if status.any():
                    ii, jj = np.argwhere(status)[0]
                    raise AverageInadmissible(
                        f"2D cell average left G at cell ({ii - 1},{jj - 1})")
                self.stats.bp_limited_cells += int((stats > 0).sum())
            else:
                avg = np.empty(UR.shape[:2] + (8,))
                avg[..., [0, 1, 2, 3, 6, 7]] = UR[..., 0, :]
                avg[..., 4] = UB[..., 1]
                avg[..., 5] = UB[..., 0]
                inner = avg[1:ncx + 1, 1:ncy + 1].reshape(-1, 8)
                ok = np.array([in_g(*u) for u in inner])
                if not ok.all():
                    raise AverageInadmissible(
                        f"2D cell average left G ({int((~ok).sum())} cells)")
        fill_ghosts_2d(self.sol, inflow_left=self._inflow_left,
                       bottom_inflow=self._bottom_inflow)
        return state

    def _rhs(self, state):
        self.sol.URI, self.sol.UBI, self.sol.URJ, self.sol.UBJ = state
        out = self.solver.rhs(self.sol, self._tau, self.cfg.sources)
        self._beta = (max(self._beta[0], out[4]), max(self._beta[1], out[5]))
        return out[:4]

    def advance(self, dt: float):
        self._tau = dt / self.cfg.theta
        state = _advance_state(self, self._state(), dt)
        self.sol.URI, self.sol.UBI, self.sol.URJ, self.sol.UBJ = state
        self.sol.t += dt
        self.stats.steps += 1
        self.stats.dt_min = min(self.stats.dt_min, dt)
        self.stats.beta_max = (max(self.stats.beta_max[0], self._beta[0]),
                               max(self.stats.beta_max[1], self._beta[1]))

    def run(self, t_end: float | None = None, div_series: DivergenceSeries | None = None,
            snapshot_hook=None):
        t_end = self.problem.t_end if t_end is None else t_end
        wall = time.time()
        next_out = self.cfg.output_every if self.cfg.output_every > 0 else math.inf
        while self.sol.t < t_end - 1e-13 * max(1.0, t_end):
            self._beta = (0.0, 0.0)
            alpha = (max(1.0, self.stats.beta_max[0]), max(1.0, self.stats.beta_max[1]))
            dt = self.controller.dt_2d(self.mesh.dx, self.mesh.dy, alpha)
            dt = min(dt, t_end - self.sol.t)
            self.advance(dt)
            if div_series is not None and (self.stats.steps % 10 == 0
                                           or self.sol.t >= t_end - 1e-13):
                val = eps_div(self.sol)
                self.stats.eps_div_max = max(self.stats.eps_div_max, val)
                div_series.append(self.sol.t, val)
            if snapshot_hook and self.sol.t >= next_out:
                snapshot_hook(self)
                next_out += self.cfg.output_every
        self.stats.wall_time = time.time() - wall
        return self.stats

    def primitive_grids(self):
        vals = self.sol.eval_at(np.zeros(1), np.zeros(1), "primal")[:, :, 0, :]
        W, ok, _ = cons_to_prim_batch(vals, self.problem.eos)
        if not ok.all():
            raise PhysicsFailure("snapshot recovery failed")
        lor = 1.0 / np.sqrt(1.0 - np.einsum("xyc,xyc->xy", W[..., 1:4], W[..., 1:4]))
        grids = {
            "rho": W[..., 0], "v1": W[..., 1], "v2": W[..., 2], "v3": W[..., 3],
            "B1": W[..., 4], "B2": W[..., 5], "B3": W[..., 6], "p": W[..., 7],
            "W": lor,
        }
        return grids

    def write_snapshot(self, outdir: str, tag: str = "final"):
        mesh = self.mesh
        meta = {
            "problem": self.problem.id, "t": f"{self.sol.t:.17g}",
            "nx": mesh.nx, "ny": mesh.ny,
            "xmin": mesh.xmin, "xmax": mesh.xmax,
            "ymin": mesh.ymin, "ymax": mesh.ymax,
        }
        prefix = os.path.join(outdir, f"{self.problem.id}_{tag}")
        write_snapshot_2d(prefix, meta, self.primitive_grids())
        return prefix

    def error_norms(self, component: int = 5, npts: int = 4):
        """Integral error norms of a conserved/magnetic component vs exact."""
        if self.problem.exact is None:
            raise ValueError("problem has no exact solution")
        g, w = _gauss_nodes_unit(npts)
        GX, GY = np.meshgrid(g, g, indexing="ij")
        vals = self.sol.eval_at(GX.ravel(), GY.ravel(), "primal")
        cx, cy = self.mesh.primal_centers()
        X = cx[:, None, None] + 0.5 * self.mesh.dx * GX.ravel()[None, None, :]
        Y = cy[None, :, None] + 0.5 * self.mesh.dy * GY.ravel()[None, None, :]
        ex = self.problem.exact(X, Y, self.sol.t)
        err = np.abs(vals[..., component] - ex[..., component])
        W2 = np.outer(w, w).ravel() / 4.0
        area = ((self.problem.domain[1] - self.problem.domain[0])
                * (self.problem.domain[3] - self.problem.domain[2]))
        cell = self.mesh.dx * self.mesh.dy
        l1 = float(np.einsum("xyq,q->", err, W2)) * cell / area
        l2 = math.sqrt(float(np.einsum("xyq,q->", err**2, W2)) * cell / area)
        return l1, l2, float(err.max())


def make_run(cfg: RunConfig):
    problem = _problem_from_config(cfg)
    if problem.dim == 1:
        return Run1D(cfg, problem)
    return Run2D(cfg, problem)

"""First-order Lax-Friedrichs finite-volume reference solver (1D).

Used to generate comparison profiles for the Riemann problems on a fine
mesh.  The numerical dissipation speed is the light speed (1), which bounds
every signal speed, so the scheme keeps cell averages admissible under
dt <= dx/2 and never needs a limiter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .eos import EosKind
from .problems import ProblemSpec
from .state import RecoveryFailure, flux_pt, prim_to_cons_batch, recover_pt


@dataclass
class FvState1D:
    """Cell averages on a uniform mesh with one ghost layer per side."""

    U: np.ndarray  # (n + 2, 8)
    xmin: float
    dx: float
    t: float = 0.0

    @property
    def n(self) -> int:
        return self.U.shape[0] - 2

    def centers(self) -> np.ndarray:
        return self.xmin + (np.arange(self.n) + 0.5) * self.dx


@nb.njit(cache=True, parallel=True, fastmath=True)
def _lf_step_kernel(U, Unew, n, lam, code, gamma, status):
    # interface fluxes with alpha = 1 dissipation; U has ghost cells
    F = np.empty((n + 2, 8))
    for i in nb.prange(n + 2):
        w8 = np.empty(8)
        ok, _, _, _ = recover_pt(U[i, 0], U[i, 1], U[i, 2], U[i, 3], U[i, 4],
                                 U[i, 5], U[i, 6], U[i, 7], code, gamma, w8)
        if not ok:
            status[i] = 1
            continue
        flux_pt(U[i], w8, 1, F[i])
    if status.sum() > 0:
        return
    for i in nb.prange(1, n + 1):
        for c in range(8):
            fr = 0.5 * (F[i, c] + F[i + 1, c]) - 0.5 * (U[i + 1, c] - U[i, c])
            fl = 0.5 * (F[i - 1, c] + F[i, c]) - 0.5 * (U[i, c] - U[i - 1, c])
            Unew[i, c] = U[i, c] - lam * (fr - fl)


def lf_step(state: FvState1D, dt: float, eos: EosKind) -> FvState1D:
    """One forward-Euler Lax-Friedrichs step with outflow ghosts."""
    if dt > 0.5 * state.dx * (1.0 + 1e-12):
        raise ValueError("LF reference requires dt <= dx/2")
    U = state.U
    U[0] = U[1]
    U[-1] = U[-2]
    Unew = U.copy()
    status = np.zeros(U.shape[0], dtype=np.int64)
    _lf_step_kernel(U, Unew, state.n, dt / state.dx, eos.code, eos.gamma, status)
    if status.any():
        bad = int(np.nonzero(status)[0][0]) - 1
        raise RecoveryFailure(f"LF reference: recovery failed in cell {bad}")
    return FvState1D(Unew, state.xmin, state.dx, state.t + dt)


def run_reference(problem: ProblemSpec, n: int, t_end: float | None = None,
                  cfl: float = 0.5) -> FvState1D:
    """Integrate a 1D problem with the LF scheme to its final time."""
    if problem.dim != 1:
        raise ValueError("reference solver is 1D only")
    eos = problem.eos
    xmin, xmax = problem.domain
    dx = (xmax - xmin) / n
    xc = xmin + (np.arange(n) + 0.5) * dx
    U = np.empty((n + 2, 8))
    U[1:-1] = prim_to_cons_batch(problem.initial(xc), eos)
    state = FvState1D(U, xmin, dx)
    t_end = problem.t_end if t_end is None else t_end
    while state.t < t_end - 1e-14:
        dt = min(cfl * dx, t_end - state.t)
        state = lf_step(state, dt, eos)
    return state

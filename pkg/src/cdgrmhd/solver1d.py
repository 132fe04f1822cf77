"""Semi-discrete 1D central DG right-hand sides on overlapping meshes.

Each mesh's update combines three ingredients evaluated from the *other*
mesh's solution: a relaxation (dissipation) term proportional to the
difference of the two solutions, a volume flux integral over the two half
cells, and flux values at the cell endpoints, where the other solution is
continuous (they are its cell centers), so no Riemann solver is involved.

The magnetic x-component has identically zero flux and zero dissipation
when both meshes carry the same constant, so its coefficients never move:
the 1D divergence-free constraint is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .admissibility import in_g
from .basis import BC_CODES, Mesh1D, ScalarBasis1D, fill_ghosts_axis, project_cells_1d
from .eos import EosKind
from .quadrature import _gauss_nodes_unit
from .state import RecoveryFailure, flux_pt, prim_to_cons_batch, recover_pt


@dataclass
class Tables1D:
    """Reference-cell evaluation tables shared by both mesh passes."""

    wq: np.ndarray        # (Q,) normalized Gauss weights (sum 1)
    phi_vol: np.ndarray   # (2, Q, nb) own basis at half-cell Gauss points
    dphi_vol: np.ndarray  # (2, Q, nb) d/dxi at the same points
    phi_vol_ot: np.ndarray  # (2, Q, nb) other-mesh basis at the same points
    phi_face: np.ndarray  # (2, nb) own traces at xi = -1, +1
    phi_center: np.ndarray  # (nb,) basis at xi = 0 (other-mesh face values)


def build_tables_1d(basis: ScalarBasis1D) -> Tables1D:
    k = basis.k
    Q = k + 1
    g, w = _gauss_nodes_unit(Q)
    wq = w / 2.0
    xi_half = np.stack([-0.5 + 0.5 * g, 0.5 + 0.5 * g])  # (2, Q)
    xi_other = np.stack([0.5 + 0.5 * g, -0.5 + 0.5 * g])
    phi_vol = np.empty((2, Q, basis.nb))
    dphi_vol = np.empty((2, Q, basis.nb))
    phi_vol_ot = np.empty((2, Q, basis.nb))
    for h in range(2):
        v, d = basis.eval(xi_half[h])
        phi_vol[h], dphi_vol[h] = v, d
        phi_vol_ot[h] = basis.eval(xi_other[h])[0]
    phi_face = basis.eval(np.array([-1.0, 1.0]))[0]
    phi_center = basis.eval(np.array([0.0]))[0][0]
    return Tables1D(wq, phi_vol, dphi_vol, phi_vol_ot, phi_face, phi_center)


@nb.njit(cache=True, parallel=True)
def rhs_1d_kernel(U_my, U_ot, n, off, inv_tau, dx, mass,
                  wq, phi_vol, dphi_vol, phi_vol_ot, phi_face, phi_center,
                  code, gamma, dU, status):
    nbase = mass.shape[0]
    Q = wq.shape[0]
    two_dx = 2.0 / dx
    for i in nb.prange(1, n + 1):
        u8 = np.empty(8)
        w8 = np.empty(8)
        f8 = np.empty(8)
        acc = np.zeros((nbase, 8))
        ok_cell = True
        # endpoint fluxes: the other solution at its cell centers
        for side in range(2):
            nb_i = i + off + side
            for c in range(8):
                v = 0.0
                for l in range(nbase):
                    v += U_ot[nb_i, l, c] * phi_center[l]
                u8[c] = v
            ok, _, _, _ = recover_pt(u8[0], u8[1], u8[2], u8[3], u8[4], u8[5],
                                     u8[6], u8[7], code, gamma, w8)
            if not ok:
                status[i] = 1 + side
                ok_cell = False
                break
            flux_pt(u8, w8, 1, f8)
            sgn = 1.0 if side == 0 else -1.0
            for l in range(nbase):
                ft = sgn * phi_face[side, l] / dx
                for c in range(8):
                    acc[l, c] += ft * f8[c]
        if not ok_cell:
            continue
        # dissipation + volume flux over the two half cells
        umy8 = np.empty(8)
        for h in range(2):
            nb_i = i + off + h
            for mu in range(Q):
                for c in range(8):
                    v = 0.0
                    vm = 0.0
                    for l in range(nbase):
                        v += U_ot[nb_i, l, c] * phi_vol_ot[h, mu, l]
                        vm += U_my[i, l, c] * phi_vol[h, mu, l]
                    u8[c] = v
                    umy8[c] = vm
                ok, _, _, _ = recover_pt(u8[0], u8[1], u8[2], u8[3], u8[4],
                                         u8[5], u8[6], u8[7], code, gamma, w8)
                if not ok:
                    status[i] = 3 + h
                    ok_cell = False
                    break
                flux_pt(u8, w8, 1, f8)
                wgt = 0.5 * wq[mu]
                for l in range(nbase):
                    phv = wgt * inv_tau * phi_vol[h, mu, l]
                    dph = wgt * dphi_vol[h, mu, l] * two_dx
                    for c in range(8):
                        acc[l, c] += (u8[c] - umy8[c]) * phv + f8[c] * dph
            if not ok_cell:
                break
        if not ok_cell:
            continue
        for l in range(nbase):
            inv_m = 1.0 / mass[l]
            for c in range(8):
                dU[i, l, c] = acc[l, c] * inv_m


@dataclass
class Solution1D:
    """Modal coefficients on the primal and dual meshes, with ghost layers."""

    mesh: Mesh1D
    eos: EosKind
    basis: ScalarBasis1D
    UI: np.ndarray  # (n+2, nb, 8)
    UJ: np.ndarray  # (nd+2, nb, 8)
    t: float = 0.0

    @classmethod
    def zeros(cls, mesh: Mesh1D, eos: EosKind, k: int) -> "Solution1D":
        basis = ScalarBasis1D(k)
        UI = np.zeros((mesh.n + 2, basis.nb, 8))
        UJ = np.zeros((mesh.nd + 2, basis.nb, 8))
        return cls(mesh, eos, basis, UI, UJ)

    @classmethod
    def from_primitive(cls, mesh: Mesh1D, eos: EosKind, k: int, w_fn,
                       npts: int | None = None) -> "Solution1D":
        """Project a pointwise primitive field w_fn(x) -> (..., 8)."""
        sol = cls.zeros(mesh, eos, k)
        npts = npts or (2 * k + 2)

        def u_fn(x):
            return prim_to_cons_batch(w_fn(x), eos)

        sol.UI[1:-1] = project_cells_1d(u_fn, mesh.primal_centers(), mesh.dx,
                                        sol.basis, npts)
        sol.UJ[1:-1] = project_cells_1d(u_fn, mesh.dual_centers(), mesh.dx,
                                        sol.basis, npts)
        return sol

    def averages(self, which: str = "primal") -> np.ndarray:
        arr = self.UI if which == "primal" else self.UJ
        return arr[1:-1, 0, :]

    def sample(self, x: np.ndarray, which: str = "primal") -> np.ndarray:
        """Point values of the chosen mesh's solution at positions x."""
        arr, centers = ((self.UI, self.mesh.primal_centers()) if which == "primal"
                        else (self.UJ, self.mesh.dual_centers()))
        dx = self.mesh.dx
        idx = np.clip(np.rint((x - centers[0]) / dx).astype(int), 0, len(centers) - 1)
        xi = 2.0 * (x - centers[idx]) / dx
        vals = self.basis.eval(xi)[0]
        return np.einsum("pl,plc->pc", vals, arr[idx + 1])


def reflect_signs_1d(basis: ScalarBasis1D) -> np.ndarray:
    """Coefficient scaling for a mirrored ghost cell (normal v and B flip)."""
    comp = np.ones(8)
    comp[1] = -1.0
    comp[4] = -1.0
    par = np.array([(-1.0) ** l for l in range(basis.nb)])
    return par[:, None] * comp[None, :]


def fill_ghosts_1d(sol: Solution1D, inflow: np.ndarray | None = None):
    """Refresh both meshes' ghost layers from the boundary condition tags."""
    bc_l, bc_r = (BC_CODES[b] for b in sol.mesh.bc)
    scale = reflect_signs_1d(sol.basis)

    def payload(side_code):
        if side_code != BC_CODES["inflow"]:
            return None
        out = np.zeros((sol.basis.nb, 8))
        out[0] = inflow
        return out

    for arr in (sol.UI, sol.UJ):
        fill_ghosts_axis(arr, 0, bc_l, bc_r, reflect_scale=scale,
                         inflow_lo=payload(bc_l), inflow_hi=payload(bc_r))


class Solver1D:
    """Owns the evaluation tables and produces right-hand sides."""

    def __init__(self, k: int):
        self.k = k
        self.basis = ScalarBasis1D(k)
        self.tables = build_tables_1d(self.basis)

    def rhs(self, sol: Solution1D, tau_max: float):
        """Time derivatives of all coefficients on both meshes."""
        t = self.tables
        mesh = sol.mesh
        dUI = np.zeros_like(sol.UI)
        dUJ = np.zeros_like(sol.UJ)
        status_I = np.zeros(sol.UI.shape[0], dtype=np.int64)
        status_J = np.zeros(sol.UJ.shape[0], dtype=np.int64)
        args = (1.0 / tau_max, mesh.dx, self.basis.mass, t.wq, t.phi_vol,
                t.dphi_vol, t.phi_vol_ot, t.phi_face, t.phi_center,
                sol.eos.code, sol.eos.gamma)
        rhs_1d_kernel(sol.UI, sol.UJ, mesh.n, 0, *args, dUI, status_I)
        rhs_1d_kernel(sol.UJ, sol.UI, mesh.nd, -1, *args, dUJ, status_J)
        for name, status in (("primal", status_I), ("dual", status_J)):
            bad = np.nonzero(status)[0]
            if bad.size:
                raise RecoveryFailure(
                    f"recovery failed in 1D RHS: {name} cell {bad[0] - 1}, "
                    f"point tag {status[bad[0]]}"
                )
        return dUI, dUJ


def cell_average_step_check(solver: Solver1D, sol: Solution1D, dt: float,
                            theta: float = 1.0):
    """Admissibility report for forward-Euler-updated cell averages."""
    dUI, dUJ = solver.rhs(sol, dt / theta)
    report = []
    for name, arr, darr, ncell in (("primal", sol.UI, dUI, sol.mesh.n),
                                   ("dual", sol.UJ, dUJ, sol.mesh.nd)):
        upd = arr[1:ncell + 1, 0, :] + dt * darr[1:ncell + 1, 0, :]
        ok = np.array([in_g(*u) for u in upd])
        report.append((name, ok))
    return report

"""Independent transcriptions of the cell-average update operators.

These deliberately re-derive the zeroth-moment right-hand sides from the
basis classes and scalar flux/source helpers, without touching the solver
kernels or their tables, so they can vouch for the production path.
"""

import numpy as np

from cdgrmhd.quadrature import _gauss_nodes_unit
from cdgrmhd.solver2d import RCOMP
from cdgrmhd.state import cons_to_prim, flux, source_vector


def avg_rhs_1d(sol, tau, which="primal"):
    """Average-update operator on one mesh; returns (ncells, 8)."""
    mesh, basis, eos = sol.mesh, sol.basis, sol.eos
    dx = mesh.dx
    if which == "primal":
        U_my, U_ot, off, ncell = sol.UI, sol.UJ, 0, mesh.n
    else:
        U_my, U_ot, off, ncell = sol.UJ, sol.UI, -1, mesh.nd
    g, w = _gauss_nodes_unit(2 * basis.k + 2)
    out = np.zeros((ncell, 8))
    V0 = basis.eval(np.array([0.0]))[0][0]
    for i in range(1, ncell + 1):
        acc = np.zeros(8)
        for h, nbi in enumerate((i + off, i + off + 1)):
            xi_o = 0.5 * g + (0.5 - h)
            xi_m = (h - 0.5) + 0.5 * g
            vals_o = np.einsum("ql,lc->qc", basis.eval(xi_o)[0], U_ot[nbi])
            vals_m = np.einsum("ql,lc->qc", basis.eval(xi_m)[0], U_my[i])
            acc += 0.5 * np.einsum("q,qc->c", w / 2.0, vals_o - vals_m) / tau
        uL = V0 @ U_ot[i + off]
        uR = V0 @ U_ot[i + off + 1]
        FL = flux(uL, cons_to_prim(uL, eos).primitive.as_array(), 1)
        FR = flux(uR, cons_to_prim(uR, eos).primitive.as_array(), 1)
        out[i - 1] = acc - (FR - FL) / dx
    return out


def _field_2d(sol, UR, UB, ci, cj, xi, eta):
    v = sol.sb.eval(np.atleast_1d(xi), np.atleast_1d(eta))[0]
    p1, p2 = sol.vb.eval(np.atleast_1d(xi), np.atleast_1d(eta))
    u = np.zeros((len(np.atleast_1d(xi)), 8))
    u[:, RCOMP] = np.einsum("lc,ql->qc", UR[ci, cj], v)
    u[:, 4] = p1 @ UB[ci, cj]
    u[:, 5] = p2 @ UB[ci, cj]
    return u


def avg_rhs_2d(sol, tau, i, j, which="primal", sources_on=True):
    """Average-update operator for one interior cell (1-based storage)."""
    mesh, eos = sol.mesh, sol.eos
    k = sol.sb.k
    Q = k + 1
    dx, dy = mesh.dx, mesh.dy
    if which == "primal":
        UR_my, UB_my, UR_ot, UB_ot, off = sol.URI, sol.UBI, sol.URJ, sol.UBJ, 0
    else:
        UR_my, UB_my, UR_ot, UB_ot, off = sol.URJ, sol.UBJ, sol.URI, sol.UBI, -1
    g, w = _gauss_nodes_unit(Q)
    wn = w / 2.0
    gq, wq = _gauss_nodes_unit(2 * k + 2)
    acc = np.zeros(8)
    ox, oy = i + off, j + off

    def F(u, d):
        return flux(u, cons_to_prim(u, eos).primitive.as_array(), d)

    for hx in range(2):
        for hy in range(2):
            XI = ((hx - 0.5) + 0.5 * gq)[:, None] + 0.0 * gq[None, :]
            ETA = 0.0 * gq[:, None] + ((hy - 0.5) + 0.5 * gq)[None, :]
            XO = (0.5 * gq + (0.5 - hx))[:, None] + 0.0 * gq[None, :]
            EO = 0.0 * gq[:, None] + (0.5 * gq + (0.5 - hy))[None, :]
            WW = np.outer(wq, wq).ravel() / 4.0 * 0.25
            uo = _field_2d(sol, UR_ot, UB_ot, ox + hx, oy + hy, XO.ravel(), EO.ravel())
            um = _field_2d(sol, UR_my, UB_my, i, j, XI.ravel(), ETA.ravel())
            acc += np.einsum("q,qc->c", WW, uo - um) / tau
    for hy in range(2):
        for mu in range(Q):
            eo = 0.5 * g[mu] + (0.5 - hy)
            uR = _field_2d(sol, UR_ot, UB_ot, ox + 1, oy + hy, 0.0, eo)[0]
            uL = _field_2d(sol, UR_ot, UB_ot, ox, oy + hy, 0.0, eo)[0]
            acc -= (wn[mu] / 2.0) * (F(uR, 1) - F(uL, 1)) / dx
    for hx in range(2):
        for mu in range(Q):
            xo = 0.5 * g[mu] + (0.5 - hx)
            uT = _field_2d(sol, UR_ot, UB_ot, ox + hx, oy + 1, xo, 0.0)[0]
            uB = _field_2d(sol, UR_ot, UB_ot, ox + hx, oy, xo, 0.0)[0]
            acc -= (wn[mu] / 2.0) * (F(uT, 2) - F(uB, 2)) / dy
    if sources_on:
        for hy in range(2):
            for mu in range(Q):
                eo = 0.5 * g[mu] + (0.5 - hy)
                uLt = _field_2d(sol, UR_ot, UB_ot, ox, oy + hy, 1.0, eo)[0]
                uRt = _field_2d(sol, UR_ot, UB_ot, ox + 1, oy + hy, -1.0, eo)[0]
                ua = 0.5 * (uLt + uRt)
                S = source_vector(ua, cons_to_prim(ua, eos).primitive.as_array())
                acc += (wn[mu] / 2.0) * (-(uRt[4] - uLt[4])) * S / dx
        for hx in range(2):
            for mu in range(Q):
                xo = 0.5 * g[mu] + (0.5 - hx)
                uBt = _field_2d(sol, UR_ot, UB_ot, ox + hx, oy, xo, 1.0)[0]
                uTt = _field_2d(sol, UR_ot, UB_ot, ox + hx, oy + 1, xo, -1.0)[0]
                ua = 0.5 * (uBt + uTt)
                S = source_vector(ua, cons_to_prim(ua, eos).primitive.as_array())
                acc += (wn[mu] / 2.0) * (-(uTt[5] - uBt[5])) * S / dy
    return acc

"""Scaling bound-preserving limiter and a TVB minmod oscillation limiter.

The BP limiter rescales the in-cell variation of the modal solution toward
the (assumed admissible) cell average in three sweeps: density first, then
the kinetic bound q, then the full admissibility function with small
round-off floors.  It touches point values only through evaluation tables,
preserves every cell average bitwise, and never modifies the mean magnetic
coefficients, so the locally divergence-free structure survives (a scaled
DF field plus a constant is still DF).

Point sets cover all nodes of the cell average decomposition plus the
tensor Gauss points where fluxes are evaluated, so primitive recovery is
guaranteed to succeed downstream of the limiter.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .admissibility import in_g, phi_cap_u, q_u
from .quadrature import CadDescriptor, _gauss_nodes_unit, _lobatto_nodes_unit

EPS_FLOOR = 1e-13


class AverageInadmissible(RuntimeError):
    """A cell average left the admissible set: CFL violation or logic error."""


def limiter_points_1d(k: int) -> np.ndarray:
    """Gauss-Lobatto and Gauss nodes of both half cells, in cell coordinates."""
    Q = k + 1
    L = math.ceil((k + 3) / 2)
    gl, _ = _lobatto_nodes_unit(L)
    gg, _ = _gauss_nodes_unit(Q)
    pts = []
    for m in (-1.0, 1.0):
        for node in np.concatenate([gl, gg]):
            pts.append(0.5 * m + 0.5 * node)
    return np.unique(np.round(np.array(pts), 13))


def limiter_points_2d(k: int, cad: CadDescriptor) -> np.ndarray:
    """CAD nodes of all four quarter cells plus the tensor Gauss points."""
    Q = k + 1
    gg, _ = _gauss_nodes_unit(Q)
    pts = []
    for m in (-1.0, 1.0):
        for s in (-1.0, 1.0):
            cx, cy = 0.5 * m, 0.5 * s
            for mu in range(Q):
                g = 0.5 * gg[mu]
                for xf in (cx - 0.5, cx + 0.5):
                    pts.append((xf, cy + g))
                for yf in (cy - 0.5, cy + 0.5):
                    pts.append((cx + g, yf))
                for nu in range(Q):
                    pts.append((cx + g, cy + 0.5 * gg[nu]))
            for s_i in range(len(cad.internal_weights)):
                pts.append((cx + 0.5 * cad.internal_nodes[s_i, 0],
                            cy + 0.5 * cad.internal_nodes[s_i, 1]))
    arr = np.round(np.array(pts), 13)
    return np.unique(arr, axis=0)


@nb.njit(cache=True)
def _theta3_bisect(base, diff, eps_E):
    """Largest admissible blend factor in [0, 1) for the Phi floor.

    ``base`` is the cell average, ``base + diff`` the offending point value.
    Assumes Phi_eps(base) >= 0 > Phi_eps(base + diff); unique root by
    convexity of the floored admissible set.
    """
    lo, hi = 0.0, 1.0
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        val = phi_cap_u(base[0] + mid * diff[0], base[1] + mid * diff[1],
                        base[2] + mid * diff[2], base[3] + mid * diff[3],
                        base[4] + mid * diff[4], base[5] + mid * diff[5],
                        base[6] + mid * diff[6], base[7] + mid * diff[7] - eps_E)
        if val >= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


@nb.njit(cache=True)
def _bp_limit_points(P, avg, eps_D, eps_q, eps_E):
    """Three-sweep scaling on point values P (npts, 8) toward ``avg``.

    Returns (theta1, theta2, theta3); P is updated in place so the caller
    can rescale modal coefficients by the same factors.
    """
    npts = P.shape[0]

    th1 = 1.0
    dmin = P[0, 0]
    for p in range(1, npts):
        if P[p, 0] < dmin:
            dmin = P[p, 0]
    if dmin < eps_D:
        th1 = (avg[0] - eps_D) / (avg[0] - dmin)
        if th1 < 0.0:
            th1 = 0.0
        for p in range(npts):
            P[p, 0] = th1 * (P[p, 0] - avg[0]) + avg[0]

    qbar = q_u(avg[0], avg[1], avg[2], avg[3], avg[4], avg[5], avg[6], avg[7])
    th2 = 1.0
    qmin = 1e300
    for p in range(npts):
        qp = q_u(P[p, 0], P[p, 1], P[p, 2], P[p, 3], P[p, 4], P[p, 5], P[p, 6], P[p, 7])
        if qp < qmin:
            qmin = qp
    if qmin < eps_q:
        th2 = (qbar - eps_q) / (qbar - qmin)
        if th2 < 0.0:
            th2 = 0.0
        for p in range(npts):
            for c in (0, 1, 2, 3, 7):
                P[p, c] = th2 * (P[p, c] - avg[c]) + avg[c]

    th3 = 1.0
    phibar = phi_cap_u(avg[0], avg[1], avg[2], avg[3], avg[4], avg[5], avg[6],
                       avg[7] - eps_E)
    diff = np.empty(8)
    for p in range(npts):
        val = phi_cap_u(P[p, 0], P[p, 1], P[p, 2], P[p, 3], P[p, 4], P[p, 5],
                        P[p, 6], P[p, 7] - eps_E)
        if val < 0.0:
            if phibar < 0.0:
                th3 = 0.0
                break
            for c in range(8):
                diff[c] = P[p, c] - avg[c]
            t = _theta3_bisect(avg, diff, eps_E)
            if t < th3:
                th3 = t
    return th1, th2, th3


@nb.njit(cache=True, parallel=True)
def bp_limit_1d_kernel(U, n, PHI, stats, status):
    """Limit interior cells of a 1D modal array U (n+2, nb, 8) in place."""
    npts, nbase = PHI.shape
    for i in nb.prange(1, n + 1):
        avg = U[i, 0].copy()
        if not in_g(avg[0], avg[1], avg[2], avg[3], avg[4], avg[5], avg[6], avg[7]):
            status[i] = 1
            continue
        eps_D = min(EPS_FLOOR, avg[0])
        eps_q = min(EPS_FLOOR, q_u(avg[0], avg[1], avg[2], avg[3], avg[4], avg[5],
                                   avg[6], avg[7]))
        eps_E = EPS_FLOOR * abs(avg[7])
        if eps_E <= 0.0:
            eps_E = EPS_FLOOR
        P = np.empty((npts, 8))
        for p in range(npts):
            for c in range(8):
                acc = 0.0
                for l in range(nbase):
                    acc += U[i, l, c] * PHI[p, l]
                P[p, c] = acc
        th1, th2, th3 = _bp_limit_points(P, avg, eps_D, eps_q, eps_E)
        if th1 < 1.0:
            for l in range(1, nbase):
                U[i, l, 0] *= th1
            stats[i] += 1
        if th2 < 1.0:
            for l in range(1, nbase):
                for c in (0, 1, 2, 3, 7):
                    U[i, l, c] *= th2
            stats[i] += 1
        if th3 < 1.0:
            for l in range(1, nbase):
                for c in range(8):
                    U[i, l, c] *= th3
            stats[i] += 1


@nb.njit(cache=True, parallel=True)
def bp_limit_2d_kernel(UR, UB, nx, ny, PHI, PS1, PS2, stats, status):
    """Limit interior cells of 2D modal arrays in place.

    UR: (nx+2, ny+2, nbR, 6) scalar part (D, m, B3, E); UB: (nx+2, ny+2, nbB)
    divergence-free part.  Sweep 3 scales every non-mean coefficient of both
    parts by the same factor.
    """
    npts, nbR = PHI.shape
    nbB = PS1.shape[1]
    for i in nb.prange(1, nx + 1):
      avg = np.empty(8)
      P = np.empty((npts, 8))
      for j in range(1, ny + 1):
        avg[0] = UR[i, j, 0, 0]
        avg[1] = UR[i, j, 0, 1]
        avg[2] = UR[i, j, 0, 2]
        avg[3] = UR[i, j, 0, 3]
        avg[4] = UB[i, j, 1]
        avg[5] = UB[i, j, 0]
        avg[6] = UR[i, j, 0, 4]
        avg[7] = UR[i, j, 0, 5]
        if not in_g(avg[0], avg[1], avg[2], avg[3], avg[4], avg[5], avg[6], avg[7]):
            status[i, j] = 1
            continue
        eps_D = min(EPS_FLOOR, avg[0])
        eps_q = min(EPS_FLOOR, q_u(avg[0], avg[1], avg[2], avg[3], avg[4], avg[5],
                                   avg[6], avg[7]))
        eps_E = EPS_FLOOR * abs(avg[7])
        if eps_E <= 0.0:
            eps_E = EPS_FLOOR
        for p in range(npts):
            d = 0.0
            m1 = 0.0
            m2 = 0.0
            m3 = 0.0
            b3 = 0.0
            e = 0.0
            for l in range(nbR):
                f = PHI[p, l]
                d += UR[i, j, l, 0] * f
                m1 += UR[i, j, l, 1] * f
                m2 += UR[i, j, l, 2] * f
                m3 += UR[i, j, l, 3] * f
                b3 += UR[i, j, l, 4] * f
                e += UR[i, j, l, 5] * f
            b1 = 0.0
            b2 = 0.0
            for l in range(nbB):
                b1 += UB[i, j, l] * PS1[p, l]
                b2 += UB[i, j, l] * PS2[p, l]
            P[p, 0] = d
            P[p, 1] = m1
            P[p, 2] = m2
            P[p, 3] = m3
            P[p, 4] = b1
            P[p, 5] = b2
            P[p, 6] = b3
            P[p, 7] = e
        th1, th2, th3 = _bp_limit_points(P, avg, eps_D, eps_q, eps_E)
        if th1 < 1.0:
            for l in range(1, nbR):
                UR[i, j, l, 0] *= th1
            stats[i, j] += 1
        if th2 < 1.0:
            for l in range(1, nbR):
                for c in (0, 1, 2, 3, 5):
                    UR[i, j, l, c] *= th2
            stats[i, j] += 1
        if th3 < 1.0:
            for l in range(1, nbR):
                for c in range(6):
                    UR[i, j, l, c] *= th3
            for l in range(2, nbB):
                UB[i, j, l] *= th3
            stats[i, j] += 1


@nb.njit(cache=True)
def _minmod3(a, b, c):
    if a > 0.0 and b > 0.0 and c > 0.0:
        return min(a, min(b, c))
    if a < 0.0 and b < 0.0 and c < 0.0:
        return max(a, max(b, c))
    return 0.0


@nb.njit(cache=True, parallel=True)
def tvb_limit_1d_kernel(U, n, m_dx2, flags):
    """Componentwise TVB minmod on the linear moments; B1 is never touched."""
    nbase = U.shape[1]
    for i in nb.prange(1, n + 1):
        for c in range(8):
            if c == 4:
                continue
            s = U[i, 1, c]
            if abs(s) <= m_dx2:
                continue
            dp = U[i + 1, 0, c] - U[i, 0, c]
            dm = U[i, 0, c] - U[i - 1, 0, c]
            mm = _minmod3(s, dp, dm)
            if mm != s:
                U[i, 1, c] = mm
                for l in range(2, nbase):
                    U[i, l, c] = 0.0
                flags[i] = 1


@nb.njit(cache=True, parallel=True)
def tvb_limit_2d_kernel(UR, nx, ny, m_dx2, m_dy2, flags):
    """TVB minmod on the scalar part's linear moments (xi and eta slopes)."""
    nbR = UR.shape[2]
    for idx in nb.prange(nx * ny):
        i = idx // ny + 1
        j = idx % ny + 1
        for c in range(6):
            trig = False
            s = UR[i, j, 1, c]
            if abs(s) > m_dx2:
                mm = _minmod3(s, UR[i + 1, j, 0, c] - UR[i, j, 0, c],
                              UR[i, j, 0, c] - UR[i - 1, j, 0, c])
                if mm != s:
                    UR[i, j, 1, c] = mm
                    trig = True
            s = UR[i, j, 2, c]
            if abs(s) > m_dy2:
                mm = _minmod3(s, UR[i, j + 1, 0, c] - UR[i, j, 0, c],
                              UR[i, j, 0, c] - UR[i, j - 1, 0, c])
                if mm != s:
                    UR[i, j, 2, c] = mm
                    trig = True
            if trig:
                for l in range(3, nbR):
                    UR[i, j, l, c] = 0.0
                flags[i, j] = 1


def theta3_root(u_try, u_avg, eps) -> float:
    """Blend factor bringing ``u_try`` back inside the floored admissible set."""
    u_try = np.asarray(u_try, dtype=float)
    u_avg = np.asarray(u_avg, dtype=float)
    if phi_cap_u(*(u_avg - np.array([0, 0, 0, 0, 0, 0, 0, eps.eps_E]))) < 0.0:
        raise ValueError("theta3_root requires Phi_eps(u_avg) >= 0")
    if phi_cap_u(*(u_try - np.array([0, 0, 0, 0, 0, 0, 0, eps.eps_E]))) >= 0.0:
        raise ValueError("theta3_root requires Phi_eps(u_try) < 0")
    return float(_theta3_bisect(u_avg, u_try - u_avg, eps.eps_E))


def bp_limit_cell(coeffs, points_phi, eps=None):
    """Limit a single 1D cell's (nb, 8) coefficients; returns new coefficients.

    ``points_phi`` is the (npts, nb) evaluation table of the limiter point
    set.  Provided for direct use and testing; production runs go through
    the batched kernels.
    """
    coeffs = np.array(coeffs, dtype=float)
    U = np.empty((3, coeffs.shape[0], 8))
    U[1] = coeffs
    stats = np.zeros(3, dtype=np.int64)
    status = np.zeros(3, dtype=np.int64)
    bp_limit_1d_kernel(U, 1, points_phi, stats, status)
    if status[1]:
        raise AverageInadmissible("cell average is outside the admissible set")
    return U[1]


def tvb_limit(sol, m: float):
    """Minmod-TVB pass over a Solution1D/Solution2D; returns per-cell flags.

    Modifies the scalar-part linear moments in place (never the magnetic
    part's divergence-free coefficients) and reports which interior cells
    were flagged as troubled, per mesh.
    """
    out = {}
    if hasattr(sol, "UI"):  # 1D
        dx2 = m * sol.mesh.dx ** 2
        for name, arr, n in (("primal", sol.UI, sol.mesh.n),
                             ("dual", sol.UJ, sol.mesh.nd)):
            flags = np.zeros(arr.shape[0], dtype=np.int64)
            tvb_limit_1d_kernel(arr, n, dx2, flags)
            out[name] = flags[1:-1].astype(bool)
        return out
    mdx2 = m * sol.mesh.dx ** 2
    mdy2 = m * sol.mesh.dy ** 2
    for name, arr, ncx, ncy in (("primal", sol.URI, sol.mesh.nx, sol.mesh.ny),
                                ("dual", sol.URJ, sol.mesh.ndx, sol.mesh.ndy)):
        flags = np.zeros(arr.shape[:2], dtype=np.int64)
        tvb_limit_2d_kernel(arr, ncx, ncy, mdx2, mdy2, flags)
        out[name] = flags[1:-1, 1:-1].astype(bool)
    return out

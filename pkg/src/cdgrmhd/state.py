"""Conserved/primitive state maps, fluxes, and the nonlinear recovery.

Conserved 8-vectors are ordered (D, m1, m2, m3, B1, B2, B3, E); primitive
8-vectors are ordered (rho, v1, v2, v3, B1, B2, B3, p), in units with c = 1.

The conserved-to-primitive map has no closed form: it requires solving a
scalar nonlinear equation for xi = rho*h*W^2.  The residual is evaluated in
a form that avoids the magnetically-dominated cancellation between the
energy and the magnetic pressure, and the root is found by a safeguarded
Newton iteration inside a maintained bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .eos import EosKind, dz_dh, h_of_z, z_of_h

_BIG = 1e300


class RecoveryFailure(RuntimeError):
    """Primitive recovery did not converge; the input state is inadmissible."""


@dataclass(frozen=True)
class Conserved:
    D: float
    m: np.ndarray
    B: np.ndarray
    E: float

    def as_array(self) -> np.ndarray:
        out = np.empty(8)
        out[0] = self.D
        out[1:4] = self.m
        out[4:7] = self.B
        out[7] = self.E
        return out

    @classmethod
    def from_array(cls, u) -> "Conserved":
        u = np.asarray(u, dtype=float)
        return cls(float(u[0]), u[1:4].copy(), u[4:7].copy(), float(u[7]))


@dataclass(frozen=True)
class Primitive:
    rho: float
    v: np.ndarray
    B: np.ndarray
    p: float

    def as_array(self) -> np.ndarray:
        out = np.empty(8)
        out[0] = self.rho
        out[1:4] = self.v
        out[4:7] = self.B
        out[7] = self.p
        return out

    @classmethod
    def from_array(cls, w) -> "Primitive":
        w = np.asarray(w, dtype=float)
        return cls(float(w[0]), w[1:4].copy(), w[4:7].copy(), float(w[7]))


@dataclass(frozen=True)
class RecoveryResult:
    primitive: Primitive
    xi: float
    iterations: int
    residual: float


def lorentz(v) -> float:
    """Lorentz factor of a 3-velocity; domain error at or beyond light speed."""
    v = np.asarray(v, dtype=float)
    v2 = float(np.dot(v, v))
    if v2 >= 1.0:
        raise ValueError(f"|v| must be < 1, got |v|^2 = {v2}")
    return 1.0 / math.sqrt(1.0 - v2)


@nb.njit(cache=True, fastmath=True)
def prim_to_cons_pt(rho, v1, v2, v3, B1, B2, B3, p, code, gamma, out):
    vs = v1 * v1 + v2 * v2 + v3 * v3
    Bs = B1 * B1 + B2 * B2 + B3 * B3
    vB = v1 * B1 + v2 * B2 + v3 * B3
    W2 = 1.0 / (1.0 - vs)
    h = h_of_z(code, gamma, p / rho)
    rhw = rho * h * W2
    pm = 0.5 * ((1.0 - vs) * Bs + vB * vB)
    ptot = p + pm
    out[0] = rho * math.sqrt(W2)
    out[1] = (rhw + Bs) * v1 - vB * B1
    out[2] = (rhw + Bs) * v2 - vB * B2
    out[3] = (rhw + Bs) * v3 - vB * B3
    out[4] = B1
    out[5] = B2
    out[6] = B3
    out[7] = rhw - ptot + Bs


@nb.njit(cache=True, fastmath=True)
def flux_pt(u, w, direction, out):
    """Physical flux along axis ``direction`` (1, 2, or 3) from (u, w)."""
    d = direction - 1
    vd = w[1 + d]
    Bd = w[4 + d]
    vs = w[1] * w[1] + w[2] * w[2] + w[3] * w[3]
    Bs = w[4] * w[4] + w[5] * w[5] + w[6] * w[6]
    vB = w[1] * w[4] + w[2] * w[5] + w[3] * w[6]
    pm = 0.5 * ((1.0 - vs) * Bs + vB * vB)
    ptot = w[7] + pm
    winv2 = 1.0 - vs
    out[0] = u[0] * vd
    for i in range(3):
        out[1 + i] = vd * u[1 + i] - Bd * (winv2 * w[4 + i] + vB * w[1 + i])
        out[4 + i] = vd * w[4 + i] - Bd * w[1 + i]
    out[4 + d] = 0.0  # v_d B_d - B_d v_d: keep the cancellation exact
    out[1 + d] += ptot
    out[7] = u[1 + d]


@nb.njit(cache=True, fastmath=True)
def source_pt(w, out):
    """Symmetrization source direction S(U), evaluated from the primitive."""
    vs = w[1] * w[1] + w[2] * w[2] + w[3] * w[3]
    vB = w[1] * w[4] + w[2] * w[5] + w[3] * w[6]
    out[0] = 0.0
    for i in range(3):
        out[1 + i] = (1.0 - vs) * w[4 + i] + vB * w[1 + i]
        out[4 + i] = w[1 + i]
    out[7] = vB


@nb.njit(cache=True, fastmath={"contract", "reassoc", "arcp"})
def _resid(xi, D, ms, Bs, mB2, c0, code, gamma):
    """Residual F(xi), dF/dxi, and feasibility flag.

    Returns (-BIG, 1.0, False) when xi is outside the feasible set, which can
    only happen left of the root; the caller treats that as F < 0.
    """
    t = xi * (xi + Bs)
    d = t * t
    g = xi * xi * ms + (2.0 * xi + Bs) * mB2
    f = d - g
    if f <= 0.0 or xi <= 0.0:
        return -_BIG, 1.0, False
    u = f / d
    su = math.sqrt(u)
    dd = 2.0 * t * (2.0 * xi + Bs)
    gg = 2.0 * (xi * ms + mB2)
    du = ((dd - gg) * d - f * dd) / (d * d)
    rho = D * su
    h = xi * su / D
    if h <= 1.0:
        z = 0.0
        dz = 0.0
    else:
        z = z_of_h(code, gamma, h)
        dz = dz_dh(code, gamma, h)
        if z < 0.0:
            z = 0.0
            dz = 0.0
    p = rho * z
    drho = D * du / (2.0 * su)
    dh = (su + xi * du / (2.0 * su)) / D
    dp = drho * z + rho * dz * dh
    F = xi - p + 0.5 * Bs * (g / d) - 0.5 * mB2 / (xi * xi) + c0
    dF = 1.0 - dp - 0.5 * Bs * du + mB2 / (xi * xi * xi)
    return F, dF, True


@nb.njit(cache=True, fastmath={"contract", "reassoc", "arcp"})
def recover_pt_warm(D, m1, m2, m3, B1, B2, B3, E, code, gamma, out, xi0):
    """Recover the primitive state; writes (rho, v1..3, B1..3, p) into ``out``.

    ``xi0 > 0`` seeds the Newton iteration (e.g. the root found at the same
    quadrature point in the previous stage); pass 0 for a cold start.
    Returns (ok, xi, iterations, residual).
    """
    ms = m1 * m1 + m2 * m2 + m3 * m3
    Bs = B1 * B1 + B2 * B2 + B3 * B3
    mB = m1 * B1 + m2 * B2 + m3 * B3
    mB2 = mB * mB
    mnorm = math.sqrt(ms)
    c0 = 0.5 * Bs - E

    if D <= 0.0 or E <= 0.0:
        return False, 0.0, 0, _BIG

    # F is provably positive at 2(E + |B|^2) for admissible states (p <= xi/2
    # under the EOS bounds and E >= |m|), so the upper bracket needs no probe
    a = mnorm - Bs
    if a < 0.0:
        a = 0.0
    b = 2.0 * (E + Bs)
    if b < 4.0 * D:
        b = 4.0 * D
    if b <= a:
        b = 2.0 * a + 1.0

    tol = 1e-12 * max(1.0, abs(E))
    # initial guess: the caller's seed if usable, else exact for
    # unmagnetized states, else a safe low start
    x = xi0
    if x <= 0.0:
        x = E - Bs
        if x < D:
            x = D
    lo_pad = a + 1e-9 * (abs(a) + 1e-30)
    if x < lo_pad:
        x = lo_pad
    if x >= b:
        x = 0.5 * (a + b)
    F = -_BIG
    it = 0
    converged = False
    while it < 200:
        F, dF, feas = _resid(x, D, ms, Bs, mB2, c0, code, gamma)
        if F < 0.0:
            a = x
        else:
            b = x
        if feas and dF > 0.0:
            step = F / dF
            xn = x - step
            if feas and abs(F) <= tol and abs(step) <= 4e-15 * x:
                converged = True
                break
            if xn <= a or xn >= b:
                xn = 0.5 * (a + b)
        else:
            xn = 0.5 * (a + b)
        if b - a <= 4e-16 * b:
            converged = feas and abs(F) <= 1e3 * tol
            break
        x = xn
        it += 1

    xi = x
    t = xi * (xi + Bs)
    d = t * t
    g = xi * xi * ms + (2.0 * xi + Bs) * mB2
    f = d - g
    if f <= 0.0 or not converged or it >= 200:
        return False, xi, it, abs(F)
    su = math.sqrt(f / d)
    W = 1.0 / su
    rho = D * su
    h = xi * su / D
    z = z_of_h(code, gamma, max(h, 1.0))
    if z < 0.0:
        z = 0.0
    denom = xi + Bs
    out[0] = rho
    out[1] = (m1 + mB / xi * B1) / denom
    out[2] = (m2 + mB / xi * B2) / denom
    out[3] = (m3 + mB / xi * B3) / denom
    out[4] = B1
    out[5] = B2
    out[6] = B3
    out[7] = rho * z
    return True, xi, it, abs(F)


@nb.njit(cache=True, fastmath={"contract", "reassoc", "arcp"})
def recover_pt(D, m1, m2, m3, B1, B2, B3, E, code, gamma, out):
    """Cold-start primitive recovery; see ``recover_pt_warm``."""
    return recover_pt_warm(D, m1, m2, m3, B1, B2, B3, E, code, gamma, out, 0.0)


def prim_to_cons(w, eos: EosKind) -> np.ndarray:
    """Explicit primitive-to-conserved map.  ``w`` is a Primitive or 8-array."""
    if isinstance(w, Primitive):
        w = w.as_array()
    w = np.asarray(w, dtype=float)
    if w[0] <= 0.0:
        raise ValueError(f"rho must be positive, got {w[0]}")
    if np.dot(w[1:4], w[1:4]) >= 1.0:
        raise ValueError("|v| must be < 1")
    out = np.empty(8)
    prim_to_cons_pt(w[0], w[1], w[2], w[3], w[4], w[5], w[6], w[7],
                    eos.code, eos.gamma, out)
    return out


def cons_to_prim(u, eos: EosKind) -> RecoveryResult:
    """Solve the recovery equation for ``u``; raises RecoveryFailure outside G."""
    if isinstance(u, Conserved):
        u = u.as_array()
    u = np.asarray(u, dtype=float)
    w = np.empty(8)
    ok, xi, iters, res = recover_pt(u[0], u[1], u[2], u[3], u[4], u[5], u[6], u[7],
                                    eos.code, eos.gamma, w)
    if not ok:
        raise RecoveryFailure(
            f"primitive recovery failed (xi={xi:.6g}, iters={iters}, residual={res:.3g}); "
            f"state is likely inadmissible: D={u[0]:.6g}, E={u[7]:.6g}"
        )
    return RecoveryResult(Primitive.from_array(w), xi, iters, res)


def flux(u, w, direction: int) -> np.ndarray:
    """Flux F_direction evaluated from the conserved state and its primitive."""
    if direction not in (1, 2, 3):
        raise ValueError("direction must be 1, 2, or 3")
    if isinstance(u, Conserved):
        u = u.as_array()
    if isinstance(w, Primitive):
        w = w.as_array()
    out = np.empty(8)
    flux_pt(np.asarray(u, dtype=float), np.asarray(w, dtype=float), direction, out)
    return out


def source_vector(u, w) -> np.ndarray:
    """Symmetrization source direction S(U) for the modified system."""
    if isinstance(w, Primitive):
        w = w.as_array()
    out = np.empty(8)
    source_pt(np.asarray(w, dtype=float), out)
    return out


def prim_to_cons_batch(W, eos: EosKind) -> np.ndarray:
    """Vectorized primitive-to-conserved map for an (..., 8) primitive array."""
    W = np.asarray(W, dtype=float)
    rho, p = W[..., 0], W[..., 7]
    v = W[..., 1:4]
    B = W[..., 4:7]
    vs = np.einsum("...i,...i->...", v, v)
    Bs = np.einsum("...i,...i->...", B, B)
    vB = np.einsum("...i,...i->...", v, B)
    W2 = 1.0 / (1.0 - vs)
    z = p / rho
    h = _h_of_z_arr(eos, z)
    rhw = rho * h * W2
    pm = 0.5 * ((1.0 - vs) * Bs + vB * vB)
    out = np.empty_like(W)
    out[..., 0] = rho * np.sqrt(W2)
    out[..., 1:4] = (rhw + Bs)[..., None] * v - vB[..., None] * B
    out[..., 4:7] = B
    out[..., 7] = rhw - (p + pm) + Bs
    return out


def _h_of_z_arr(eos: EosKind, z):
    z = np.asarray(z, dtype=float)
    if eos.code == 0:
        return 1.0 + eos.gamma / (eos.gamma - 1.0) * z
    if eos.code == 1:
        return 2.0 * z + np.sqrt(1.0 + 4.0 * z * z)
    if eos.code == 2:
        return 2.5 * z + np.sqrt(1.0 + 2.25 * z * z)
    return (12.0 * z * z + 8.0 * z + 2.0) / (3.0 * z + 2.0)


@nb.njit(cache=True)
def _recover_batch_kernel(U, code, gamma, W, oks, xis):
    n = U.shape[0]
    for i in range(n):
        ok, xi, _, _ = recover_pt(U[i, 0], U[i, 1], U[i, 2], U[i, 3],
                                  U[i, 4], U[i, 5], U[i, 6], U[i, 7],
                                  code, gamma, W[i])
        oks[i] = ok
        xis[i] = xi


def cons_to_prim_batch(U, eos: EosKind):
    """Vectorized recovery; returns (primitives, ok flags, xi roots)."""
    U = np.ascontiguousarray(np.asarray(U, dtype=float))
    shape = U.shape
    flat = U.reshape(-1, 8)
    W = np.empty_like(flat)
    oks = np.empty(flat.shape[0], dtype=np.bool_)
    xis = np.empty(flat.shape[0])
    _recover_batch_kernel(flat, eos.code, eos.gamma, W, oks, xis)
    return W.reshape(shape), oks.reshape(shape[:-1]), xis.reshape(shape[:-1])

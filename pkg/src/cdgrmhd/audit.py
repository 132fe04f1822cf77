"""Randomized property audits: admissibility geometry, CADs, bases, limiter.

Each check returns (name, passed, samples, worst), where ``worst`` is the
largest violation found (0 when clean).  Inequalities are allowed a 1e-11
absolute slack for round-off.  Sampling is seeded and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import admissibility as adm
from .basis import DfVectorBasis, Mesh2D, ScalarBasis2D
from .eos import EosKind, dz_dh, enthalpy, pressure_from_rho_h
from .limiters import bp_limit_2d_kernel, limiter_points_2d
from .quadrature import cad_cui_ding_wu, cad_zhang_shu, omega_star
from .solver2d import Solution2D, div_ij, div_jump_ij, fill_ghosts_2d
from .state import prim_to_cons_batch

SLACK = 1e-11

ALL_EOS = ("ideal:1.6666666666666667", "ideal:2.0", "ip", "tm", "rc")


@dataclass
class CheckResult:
    name: str
    passed: bool
    samples: int
    worst: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name:<38s} samples={self.samples:<9d} worst={self.worst:.3e}"


def sample_primitives(rng, n, vmax=0.98, logrho=(-3, 3), logp=(-3, 3), bscale=10.0):
    W = np.empty((n, 8))
    W[:, 0] = 10 ** rng.uniform(*logrho, n)
    r = vmax * rng.uniform(0, 1, n) ** (1 / 3)
    d = rng.standard_normal((n, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    W[:, 1:4] = r[:, None] * d
    W[:, 4:7] = rng.standard_normal((n, 3)) * 10 ** rng.uniform(-2, np.log10(bscale), n)[:, None]
    W[:, 7] = 10 ** rng.uniform(*logp, n)
    return W


def sample_aux(rng, m, bstar_scale=10.0):
    r = 0.999 * rng.uniform(0, 1, m) ** (1 / 3)
    d = rng.standard_normal((m, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    VS = r[:, None] * d
    BS = rng.standard_normal((m, 3)) * 10 ** rng.uniform(-1, np.log10(bstar_scale), m)[:, None]
    return VS, BS


def _nstar_pm(VS, BS):
    fac = 1.0 - np.einsum("mi,mi->m", VS, VS)
    N = np.empty((VS.shape[0], 8))
    N[:, 0] = -np.sqrt(fac)
    N[:, 1:4] = -VS
    N[:, 4:7] = -fac[:, None] * BS
    N[:, 7] = 1.0
    pm = 0.5 * (fac * np.einsum("mi,mi->m", BS, BS)
                + np.einsum("mi,mi->m", VS, BS) ** 2)
    return N, pm


def _flux_batch(U, W, direction):
    d = direction - 1
    vd = W[:, 1 + d]
    Bd = W[:, 4 + d]
    vs = np.einsum("ni,ni->n", W[:, 1:4], W[:, 1:4])
    Bs = np.einsum("ni,ni->n", W[:, 4:7], W[:, 4:7])
    vB = np.einsum("ni,ni->n", W[:, 1:4], W[:, 4:7])
    pm = 0.5 * ((1.0 - vs) * Bs + vB * vB)
    ptot = W[:, 7] + pm
    F = np.empty_like(U)
    F[:, 0] = U[:, 0] * vd
    F[:, 1:4] = vd[:, None] * U[:, 1:4] - Bd[:, None] * (
        (1.0 - vs)[:, None] * W[:, 4:7] + vB[:, None] * W[:, 1:4])
    F[:, 1 + d] += ptot
    F[:, 4:7] = vd[:, None] * W[:, 4:7] - Bd[:, None] * W[:, 1:4]
    F[:, 7] = U[:, 1 + d]
    return F


def _source_batch(W):
    vs = np.einsum("ni,ni->n", W[:, 1:4], W[:, 1:4])
    vB = np.einsum("ni,ni->n", W[:, 1:4], W[:, 4:7])
    S = np.zeros_like(W)
    S[:, 1:4] = (1.0 - vs)[:, None] * W[:, 4:7] + vB[:, None] * W[:, 1:4]
    S[:, 4:7] = W[:, 1:4]
    S[:, 7] = vB
    return S


def check_eos_round_trip(rng, n=10_000):
    worst = 0.0
    total = 0
    ok = True
    for key in ALL_EOS:
        eos = EosKind.from_key(key)
        rho = 10 ** rng.uniform(-8, 4, n)
        p = 10 ** rng.uniform(-8, 4, n)
        for i in range(n):
            h = enthalpy(eos, p[i], rho[i])
            pr = pressure_from_rho_h(eos, rho[i], h)
            # information below the enthalpy representation floor is gone:
            # tolerate the amplified ulp on top of the 1e-10 target
            floor = 10.0 * 2.3e-16 * abs(dz_dh(eos.code, eos.gamma, h)) * rho[i]
            rel = abs(pr - p[i]) / max(p[i], 1e-300)
            tol = 1e-10 + floor / max(p[i], 1e-300)
            if rel > tol:
                ok = False
            worst = max(worst, rel - tol)
        total += n
    return CheckResult("eos-round-trip", ok, total, worst)


def check_eos_inequalities(rng, n=10_000):
    worst = 0.0
    ok = True
    for key in ALL_EOS:
        eos = EosKind.from_key(key)
        rho = 10 ** rng.uniform(-8, 4, n)
        p = 10 ** rng.uniform(-8, 4, n)
        z = p / rho
        if eos.code == 0:
            h = 1.0 + eos.gamma / (eos.gamma - 1.0) * z
        else:
            h = np.array([enthalpy(eos, pi, ri) for pi, ri in zip(p, rho)])
        viol = (np.sqrt(1.0 + z * z) + z) - h
        worst = max(worst, float(viol.max()))
        if (viol > SLACK).any():
            ok = False
        hs = np.sort(np.column_stack([p, h]), axis=0)
        if (np.diff(hs[:, 1]) < -1e-14).any():
            ok = False
    return CheckResult("eos-kinetic-bound+monotonicity", ok, 5 * n, worst)


def check_convexity(rng, n=10_000):
    W1 = sample_primitives(rng, n)
    W2 = sample_primitives(rng, n)
    eos = EosKind.from_key("rc")
    U1 = prim_to_cons_batch(W1, eos)
    U2 = prim_to_cons_batch(W2, eos)
    mid = 0.5 * (U1 + U2)
    bad = sum(1 for u in mid if not adm.in_G(u))
    return CheckResult("admissible-set-convexity", bad == 0, n, float(bad))


def check_gql_direction(rng, nu=10_000, naux=1_000, chunk=500):
    W = sample_primitives(rng, nu)
    eos = EosKind.from_key("tm")
    U = prim_to_cons_batch(W, eos)
    VS, BS = sample_aux(rng, naux)
    N, pm = _nstar_pm(VS, BS)
    lowest = math.inf
    for start in range(0, nu, chunk):
        block = U[start:start + chunk]
        vals = block @ N.T + pm[None, :]
        scale = np.maximum(1.0, np.abs(block[:, 7:8]))
        lowest = min(lowest, float((vals / scale).min()))
    ok = lowest > 0.0 and (U[:, 0] > 0).all()
    return CheckResult("G-implies-linear-constraints", ok, nu * naux, max(0.0, -lowest))


def check_flux_inequality(rng, n=1_000):
    W = sample_primitives(rng, n)
    eos = EosKind.from_key("ip")
    U = prim_to_cons_batch(W, eos)
    VS, BS = sample_aux(rng, n)
    N, pm = _nstar_pm(VS, BS)
    theta = rng.uniform(-1, 1, n)
    worst = 0.0
    for ell in (1, 2, 3):
        F = _flux_batch(U, W, ell)
        vB = np.einsum("mi,mi->m", VS, BS)
        lhs = (np.einsum("nc,nc->n", U + theta[:, None] * F, N) + pm
               + theta * (VS[:, ell - 1] * pm - U[:, 3 + ell] * vB))
        scale = np.maximum(1.0, np.abs(U[:, 7]))
        worst = min(worst, float((lhs / scale).min()))
    return CheckResult("flux-linear-inequality", worst >= -SLACK, 3 * n,
                       max(0.0, -worst))


def check_two_state_flux(rng, n=1_000):
    Wa = sample_primitives(rng, n)
    Wb = sample_primitives(rng, n)
    eos = EosKind.from_key("ideal:1.6666666666666667")
    Ua = prim_to_cons_batch(Wa, eos)
    Ub = prim_to_cons_batch(Wb, eos)
    VS, BS = sample_aux(rng, n)
    N, pm = _nstar_pm(VS, BS)
    vB = np.einsum("mi,mi->m", VS, BS)
    worst = 0.0
    for ell in (1, 2, 3):
        dF = _flux_batch(Ua, Wa, ell) - _flux_batch(Ub, Wb, ell)
        lhs = -np.einsum("nc,nc->n", dF, N)
        rhs = (-(np.einsum("nc,nc->n", Ua + Ub, N) + 2 * pm)
               - (Ua[:, 3 + ell] - Ub[:, 3 + ell]) * vB)
        scale = np.maximum(1.0, np.abs(Ua[:, 7]) + np.abs(Ub[:, 7]))
        worst = min(worst, float(((lhs - rhs) / scale).min()))
    return CheckResult("two-state-flux-bound", worst >= -SLACK, 3 * n,
                       max(0.0, -worst))


def check_source_bound(rng, n=1_000):
    W = sample_primitives(rng, n)
    eos = EosKind.from_key("rc")
    U = prim_to_cons_batch(W, eos)
    VS, BS = sample_aux(rng, n)
    N, pm = _nstar_pm(VS, BS)
    zeta = rng.uniform(-10, 10, n)
    S = _source_batch(W)
    h = np.array([enthalpy(eos, W[i, 7], W[i, 0]) for i in range(n)])
    rho_h = W[:, 0] * h
    vB = np.einsum("mi,mi->m", VS, BS)
    lhs = zeta * np.einsum("nc,nc->n", S, N)
    rhs = -zeta * vB - np.abs(zeta) / np.sqrt(rho_h) * (
        np.einsum("nc,nc->n", U, N) + pm)
    scale = np.maximum(1.0, np.abs(U[:, 7]))
    worst = float(((lhs - rhs) / scale).min())
    return CheckResult("source-term-bound", worst >= -SLACK, n, max(0.0, -worst))


def check_geps_subset(rng, n=5_000):
    W = sample_primitives(rng, n)
    eos = EosKind.from_key("tm")
    U = prim_to_cons_batch(W, eos)
    eps = adm.EpsilonParams(1e-13, 1e-13, 1e-13)
    bad = sum(1 for u in U if adm.in_G_eps(u, eps) and not adm.in_G(u))
    return CheckResult("relaxed-set-inclusion", bad == 0, n, float(bad))


def check_cad_exactness(rng, trials=20):
    worst = 0.0
    count = 0
    for _ in range(trials):
        lam1, lam2 = 10 ** rng.uniform(-1, 1, 2)
        for k in (1, 2, 3):
            for cad in (cad_zhang_shu(k, lam1, lam2), cad_cui_ding_wu(k, lam1, lam2)):
                for a in range(k + 1):
                    for b in range(k + 1 - a):
                        exact = 0.0
                        if a % 2 == 0 and b % 2 == 0:
                            exact = 1.0 / ((a + 1) * (b + 1))
                        got = cad.average(lambda x, y: x ** a * y ** b)
                        worst = max(worst, abs(got - exact))
                        count += 1
    ok = worst <= 1e-12
    om = (abs(omega_star(2, 0.0) - 0.25)
          + abs(omega_star(4, 0.0) - (2 - math.sqrt(14) / 2))
          + abs(omega_star(6, 0.0) - (1 - math.sqrt(30) / 6)))
    ok = ok and om < 1e-12
    ratio = omega_star(2, 0.0) / (1.0 / 6.0)
    ok = ok and abs(ratio - 1.5) < 1e-12
    return CheckResult("cad-exactness+omega-star", ok, count, worst)


def check_df_basis(rng, corrupt=False):
    worst = 0.0
    ok = True
    for k in (1, 2, 3):
        vbas = DfVectorBasis(k, 0.45, 1.7)
        if corrupt and k == 2:
            vbas.comp1[4] = vbas.comp1[4].copy()
            vbas.comp1[4][1, 0] *= 1.0 + 1e-6
        pts = rng.uniform(-1, 1, (50, 2))
        div = vbas.divergence(pts[:, 0], pts[:, 1])
        coeffs = rng.standard_normal(vbas.nb)
        combo = div @ coeffs
        worst = max(worst, float(np.abs(div).max()), float(np.abs(combo).max()))
        if np.abs(div).max() > 1e-13:
            ok = False
    return CheckResult("df-basis-divergence", ok, 3 * 50, worst)


def check_div_identity(rng):
    eos = EosKind.from_key("tm")
    mesh = Mesh2D(6, 5, 0.0, 1.0, 0.0, 0.7)
    sol = Solution2D.zeros(mesh, eos, 2)
    sol.UBI[:] = rng.standard_normal(sol.UBI.shape)
    sol.UBJ[:] = rng.standard_normal(sol.UBJ.shape)
    sol.URI[:] = rng.standard_normal(sol.URI.shape)
    sol.URJ[:] = rng.standard_normal(sol.URJ.shape)
    fill_ghosts_2d(sol)
    worst = 0.0
    for dual in (True, False):
        worst = max(worst, float(np.abs(div_jump_ij(sol, dual) - div_ij(sol, dual)).max()))
    return CheckResult("divergence-jump-identity", worst <= 1e-12, 2 * 30, worst)


def check_limiter_invariants(rng):
    eos = EosKind.from_key("ip")
    mesh = Mesh2D(6, 6, 0.0, 1.0, 0.0, 1.0)
    sol = Solution2D.zeros(mesh, eos, 2)
    W = sample_primitives(rng, 36, vmax=0.9, logrho=(-2, 1), logp=(-2, 1), bscale=3.0)
    U = prim_to_cons_batch(W, eos).reshape(6, 6, 8)
    sol.URI[1:-1, 1:-1, 0, :] = U[..., [0, 1, 2, 3, 6, 7]]
    sol.UBI[1:-1, 1:-1, 0] = U[..., 5]
    sol.UBI[1:-1, 1:-1, 1] = U[..., 4]
    sol.URI[1:-1, 1:-1, 1:, :] = 0.5 * rng.standard_normal(sol.URI[1:-1, 1:-1, 1:, :].shape)
    sol.UBI[1:-1, 1:-1, 2:] = 0.5 * rng.standard_normal(sol.UBI[1:-1, 1:-1, 2:].shape)
    cad = cad_cui_ding_wu(2, 1.0, 1.0)
    pts = limiter_points_2d(2, cad)
    PHI = sol.sb.eval(pts[:, 0], pts[:, 1])[0]
    PS1, PS2 = sol.vb.eval(pts[:, 0], pts[:, 1])
    avg_before = (sol.URI[1:-1, 1:-1, 0, :].copy(), sol.UBI[1:-1, 1:-1, :2].copy())
    stats = np.zeros(sol.URI.shape[:2], dtype=np.int64)
    status = np.zeros(sol.URI.shape[:2], dtype=np.int64)
    bp_limit_2d_kernel(sol.URI, sol.UBI, 6, 6, PHI, PS1, PS2, stats, status)
    ok = not status.any()
    worst = max(np.abs(sol.URI[1:-1, 1:-1, 0, :] - avg_before[0]).max(),
                np.abs(sol.UBI[1:-1, 1:-1, :2] - avg_before[1]).max())
    snap = (sol.URI.copy(), sol.UBI.copy())
    bp_limit_2d_kernel(sol.URI, sol.UBI, 6, 6, PHI, PS1, PS2, stats, status)
    idem = max(np.abs(sol.URI - snap[0]).max(), np.abs(sol.UBI - snap[1]).max())
    worst = max(worst, idem)
    # every point value of the limited polynomials must be admissible
    vals = sol.eval_at(pts[:, 0], pts[:, 1], "primal").reshape(-1, 8)
    bad = sum(1 for u in vals if not adm.in_G_eps(
        u, adm.EpsilonParams(1e-13, 1e-13, max(1e-13, 1e-13 * abs(u[7])))) and not adm.in_G(u))
    ok = ok and worst <= 1e-14 and bad == 0
    return CheckResult("bp-limiter-invariants", ok, 36, worst)


def run_audit(seed: int = 2024, quick: bool = False, corrupt_df: bool = False):
    rng = np.random.default_rng(seed)
    f = 0.1 if quick else 1.0
    n4 = max(500, int(10_000 * f))
    n3 = max(200, int(1_000 * f))
    checks = [
        check_eos_round_trip(rng, max(300, int(2000 * f))),
        check_eos_inequalities(rng, n4),
        check_convexity(rng, n4),
        check_gql_direction(rng, n4, max(100, int(1000 * f))),
        check_flux_inequality(rng, n3),
        check_two_state_flux(rng, n3),
        check_source_bound(rng, n3),
        check_geps_subset(rng, max(300, int(5000 * f))),
        check_cad_exactness(rng, 4 if quick else 20),
        check_df_basis(rng, corrupt=corrupt_df),
        check_div_identity(rng),
        check_limiter_invariants(rng),
    ]
    return checks

import numpy as np
import pytest

from cdgrmhd import admissibility as adm
from cdgrmhd.basis import ScalarBasis1D
from cdgrmhd.eos import EosKind
from cdgrmhd.limiters import (AverageInadmissible, bp_limit_1d_kernel,
                              bp_limit_cell, limiter_points_1d,
                              limiter_points_2d, theta3_root,
                              tvb_limit_1d_kernel)
from cdgrmhd.quadrature import cad_cui_ding_wu, cad_zhang_shu
from cdgrmhd.state import cons_to_prim, prim_to_cons, prim_to_cons_batch

from conftest import sample_valid_primitives

IDEAL53 = EosKind.from_key("ideal:1.6666666666666667")


@pytest.fixture(scope="module")
def phi1d():
    basis = ScalarBasis1D(2)
    return basis, basis.eval(limiter_points_1d(2))[0]


def test_point_sets_cover_solver_nodes():
    pts = limiter_points_1d(2)
    # must include the half-cell Lobatto endpoints (faces and center)
    for x in (-1.0, -0.5, 0.0, 0.5, 1.0):
        assert np.any(np.isclose(pts, x, atol=1e-13))
    pts2 = limiter_points_2d(2, cad_cui_ding_wu(2, 1.0, 1.0))
    # boundary lines, center lines, and the quarter centers all appear
    for x in (-1.0, 0.0, 1.0):
        assert np.any(np.isclose(pts2[:, 0], x, atol=1e-13))
    assert np.any(np.isclose(pts2[:, 0], 0.5, atol=1e-13) & np.isclose(pts2[:, 1], 0.5, atol=1e-13))
    pts3 = limiter_points_2d(2, cad_zhang_shu(2, 1.0, 1.0))
    assert len(pts3) >= len(pts2)


def test_identity_on_admissible_cells(phi1d, rng):
    basis, PHI = phi1d
    w = sample_valid_primitives(rng, 1, vmax=0.5, logrho=(0, 0), logp=(0, 0))[0]
    coeffs = np.zeros((3, 8))
    coeffs[0] = prim_to_cons(w, IDEAL53)
    coeffs[1] = 1e-3 * rng.standard_normal(8)
    out = bp_limit_cell(coeffs, PHI)
    assert np.array_equal(out, coeffs)  # bit-for-bit when nothing violates


def test_step1_density_scaling(phi1d):
    basis, PHI = phi1d
    coeffs = np.zeros((3, 8))
    coeffs[0] = [1.0, 0, 0, 0, 0, 0, 0, 2.5]
    coeffs[1, 0] = -1.2  # density dips negative at the right edge
    out = bp_limit_cell(coeffs, PHI)
    vals = PHI @ out
    eps_d = min(1e-13, 1.0)
    assert vals[:, 0].min() >= eps_d - 1e-16
    assert out[0, 0] == 1.0  # average untouched
    # the slope was scaled by the closed-form factor
    dmin = (PHI @ coeffs)[:, 0].min()
    theta1 = (1.0 - eps_d) / (1.0 - dmin)
    assert out[1, 0] == pytest.approx(theta1 * coeffs[1, 0], rel=1e-12)


def test_step2_keeps_B(phi1d):
    basis, PHI = phi1d
    coeffs = np.zeros((3, 8))
    coeffs[0] = [1.0, 0, 0, 0, 0.5, 0.2, 0, 2.5]
    coeffs[1, 7] = -2.4  # energy dips, q goes negative at a point
    coeffs[1, 5] = 0.3   # magnetic slope is exempt from the q sweep
    out = bp_limit_cell(coeffs, PHI)
    # B may shrink in the final sweep (all components together) but must not
    # carry the extra q-sweep factor that hits (D, m, E)
    factor_b = out[1, 5] / coeffs[1, 5]
    factor_e = out[1, 7] / coeffs[1, 7]
    assert factor_e < factor_b <= 1.0
    vals = PHI @ out
    qv = [adm.q_of(v) for v in vals]
    assert min(qv) >= -1e-13


def test_average_preservation_and_idempotence(phi1d, rng):
    basis, PHI = phi1d
    for _ in range(50):
        w = sample_valid_primitives(rng, 1, vmax=0.9, logrho=(-2, 1),
                                    logp=(-2, 1), bscale=3.0)[0]
        coeffs = np.zeros((3, 8))
        coeffs[0] = prim_to_cons(w, IDEAL53)
        coeffs[1:] = 0.8 * np.abs(coeffs[0]).max() * rng.standard_normal((2, 8))
        out = bp_limit_cell(coeffs, PHI)
        assert np.array_equal(out[0], coeffs[0])
        again = bp_limit_cell(out, PHI)
        assert np.abs(again - out).max() < 1e-14
        # every point is recoverable afterwards
        for v in PHI @ out:
            cons_to_prim(v, IDEAL53)


def test_average_inadmissible_raises(phi1d):
    basis, PHI = phi1d
    coeffs = np.zeros((3, 8))
    coeffs[0] = [1.0, 3.0, 0, 0, 0, 0, 0, 1.0]  # E < |m|: not in G
    with pytest.raises(AverageInadmissible):
        bp_limit_cell(coeffs, PHI)


def test_theta3_root_properties(rng):
    eps = adm.EpsilonParams(1e-13, 1e-13, 1e-13)
    u_avg = prim_to_cons(np.array([1, 0, 0, 0, 1.0, 0.5, 0, 1.0]), IDEAL53)
    # a try state far outside G (huge magnetic content, no matching energy)
    u_try = u_avg + np.array([0, 0, 0, 0, 50.0, 0, 0, 0.0])
    theta = theta3_root(u_try, u_avg, eps)
    assert 0.0 <= theta < 1.0
    blend = theta * (u_try - u_avg) + u_avg
    from cdgrmhd.admissibility import phi_cap_u
    assert phi_cap_u(*(blend - np.array([0, 0, 0, 0, 0, 0, 0, eps.eps_E]))) >= -1e-11
    with pytest.raises(ValueError):
        theta3_root(u_avg, u_avg, eps)  # try state is admissible


def test_tvb_limiter_1d(rng):
    basis = ScalarBasis1D(2)
    n = 16
    U = np.zeros((n + 2, 3, 8))
    # smooth data: no trigger with a generous threshold
    x = np.linspace(0, 1, n)
    U[1:-1, 0, 0] = 2.0 + np.sin(2 * np.pi * x)
    U[1:-1, 1, 0] = np.gradient(U[1:-1, 0, 0]) / 2.0
    U[0] = U[n]
    U[n + 1] = U[1]
    flags = np.zeros(n + 2, dtype=np.int64)
    snap = U.copy()
    tvb_limit_1d_kernel(U, n, 50.0 * (1.0 / n) ** 2 * 100, flags)
    assert flags.sum() == 0 and np.array_equal(U, snap)
    # step data: triggered, slope bounded by neighbor differences
    U[:] = 0.0
    U[1:-1, 0, 0] = np.where(np.arange(n) < n // 2, 2.0, 1.0)
    U[1:-1, 1, 0] = 5.0
    U[1:-1, 2, 0] = 1.0
    U[0] = U[1]
    U[n + 1] = U[n]
    flags[:] = 0
    tvb_limit_1d_kernel(U, n, 0.0, flags)
    assert flags.sum() > 0
    assert np.abs(U[1:-1, 1, 0]).max() <= 1.0 + 1e-14
    trig = np.nonzero(flags[1:-1])[0]
    assert np.abs(U[1 + trig, 2, 0]).max() == 0.0
    # B1 component stays untouched
    U[1:-1, 1, 4] = 3.0
    snapB = U[:, :, 4].copy()
    tvb_limit_1d_kernel(U, n, 0.0, flags)
    assert np.array_equal(U[:, :, 4], snapB)


def test_df_preserved_by_2d_limiter(rng):
    from cdgrmhd.basis import Mesh2D
    from cdgrmhd.limiters import bp_limit_2d_kernel
    from cdgrmhd.solver2d import Solution2D

    eos = EosKind.from_key("ip")
    mesh = Mesh2D(4, 4, 0, 1, 0, 1)
    sol = Solution2D.zeros(mesh, eos, 2)
    W = sample_valid_primitives(rng, 16, vmax=0.9, logrho=(-1, 1),
                                logp=(-1, 1), bscale=2.0)
    U = prim_to_cons_batch(W, eos).reshape(4, 4, 8)
    sol.URI[1:-1, 1:-1, 0, :] = U[..., [0, 1, 2, 3, 6, 7]]
    sol.UBI[1:-1, 1:-1, 0] = U[..., 5]
    sol.UBI[1:-1, 1:-1, 1] = U[..., 4]
    sol.URI[1:-1, 1:-1, 1:, :] = 2.0 * rng.standard_normal(sol.URI[1:-1, 1:-1, 1:, :].shape)
    sol.UBI[1:-1, 1:-1, 2:] = 2.0 * rng.standard_normal(sol.UBI[1:-1, 1:-1, 2:].shape)
    cad = cad_cui_ding_wu(2, 1.0, 1.0)
    pts = limiter_points_2d(2, cad)
    PHI = sol.sb.eval(pts[:, 0], pts[:, 1])[0]
    PS1, PS2 = sol.vb.eval(pts[:, 0], pts[:, 1])
    stats = np.zeros(sol.URI.shape[:2], dtype=np.int64)
    status = np.zeros(sol.URI.shape[:2], dtype=np.int64)
    bp_limit_2d_kernel(sol.URI, sol.UBI, 4, 4, PHI, PS1, PS2, stats, status)
    assert not status.any()
    assert stats.sum() > 0  # those wild slopes must trigger the limiter
    p = rng.uniform(-1, 1, (30, 2))
    div = sol.vb.divergence(p[:, 0], p[:, 1])
    combo = np.einsum("ijl,ql->ijq", sol.UBI[1:-1, 1:-1], div)
    assert np.abs(combo).max() < 1e-12
    # averages preserved
    assert np.allclose(sol.UBI[1:-1, 1:-1, 0], U[..., 5], atol=1e-15)
    assert np.allclose(sol.UBI[1:-1, 1:-1, 1], U[..., 4], atol=1e-15)


def test_tvb_limit_wrapper(rng):
    from cdgrmhd.basis import Mesh1D
    from cdgrmhd.limiters import tvb_limit
    from cdgrmhd.solver1d import Solution1D, fill_ghosts_1d

    mesh = Mesh1D(16, 0.0, 1.0, ("outflow", "outflow"))

    def step(x):
        out = np.tile([1.0, 0, 0, 0, 0.5, 0.2, 0.1, 1.0], x.shape + (1,))
        out[..., 0] = np.where(x < 0.5, 2.0, 1.0)
        return out

    sol = Solution1D.from_primitive(mesh, IDEAL53, 2, step)
    fill_ghosts_1d(sol)
    flags = tvb_limit(sol, 0.0)
    assert flags["primal"].any()
    assert flags["primal"].shape == (16,)
    assert flags["dual"].shape == (17,)

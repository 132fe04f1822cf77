import math

import numpy as np
import pytest

from cdgrmhd.quadrature import (CadDescriptor, OverlapNodes, cad_cui_ding_wu,
                                cad_extend_overlapping, cad_zhang_shu, gauss,
                                gauss_lobatto, omega_star)


def test_rule_examples():
    r = gauss(1)
    assert np.allclose(r.nodes, [0.0]) and np.allclose(r.weights, [1.0])
    gl = gauss_lobatto(3)
    assert np.allclose(gl.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)
    assert gauss(2).integrate(lambda x: x * x) == pytest.approx(1 / 12, rel=1e-14)


@pytest.mark.parametrize("Q", range(1, 7))
def test_gauss_exactness(Q):
    r = gauss(Q)
    assert abs(r.weights.sum() - 1.0) < 1e-14
    assert np.allclose(r.nodes, -r.nodes[::-1], atol=1e-15)
    for deg in range(2 * Q - 1 + 1):
        exact = (0.5 ** deg) / (deg + 1) if deg % 2 == 0 else 0.0
        assert r.integrate(lambda x: x ** deg) == pytest.approx(exact, abs=1e-15)


@pytest.mark.parametrize("L", range(2, 7))
def test_lobatto_exactness(L):
    r = gauss_lobatto(L)
    assert abs(r.weights.sum() - 1.0) < 1e-14
    assert r.nodes[0] == -0.5 and r.nodes[-1] == 0.5
    for deg in range(2 * L - 3 + 1):
        exact = (0.5 ** deg) / (deg + 1) if deg % 2 == 0 else 0.0
        assert r.integrate(lambda x: x ** deg) == pytest.approx(exact, abs=1e-14)


def test_hardcoded_regression_values():
    # frozen reference nodes for the rules the solver actually uses
    g3 = gauss(3)
    assert np.allclose(g3.nodes, [-0.5 * math.sqrt(3 / 5), 0.0, 0.5 * math.sqrt(3 / 5)],
                       atol=1e-15)
    assert np.allclose(g3.weights, [5 / 18, 8 / 18, 5 / 18], atol=1e-15)
    gl4 = gauss_lobatto(4)
    assert np.allclose(gl4.nodes, [-0.5, -0.5 / math.sqrt(5), 0.5 / math.sqrt(5), 0.5],
                       atol=1e-15)
    assert np.allclose(gl4.weights, [1 / 12, 5 / 12, 5 / 12, 1 / 12], atol=1e-15)


def _check_exact(cad: CadDescriptor):
    k = cad.k
    worst = 0.0
    for a in range(k + 1):
        for b in range(k + 1 - a):
            exact = 0.0
            if a % 2 == 0 and b % 2 == 0:
                exact = 1.0 / ((a + 1) * (b + 1))
            worst = max(worst, abs(cad.average(lambda x, y: x ** a * y ** b) - exact))
    return worst


@pytest.mark.parametrize("k", (1, 2, 3))
@pytest.mark.parametrize("lams", ((1.0, 1.0), (2.5, 0.4), (0.0, 1.0), (1.0, 0.0)))
def test_cad_exactness_and_weights(k, lams):
    for cad in (cad_zhang_shu(k, *lams), cad_cui_ding_wu(k, *lams)):
        assert _check_exact(cad) < 1e-13
        assert 2 * cad.omega_bar + cad.internal_weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert (cad.internal_weights >= 0).all()
        if len(cad.internal_nodes):
            assert (np.abs(cad.internal_nodes) < 1.0).all()


def test_zhang_shu_values():
    assert cad_zhang_shu(2, 1, 1).omega_bar == pytest.approx(1 / 6, abs=1e-15)
    assert len(cad_zhang_shu(2, 1, 1).internal_weights) == 2 * 3 * 1
    assert cad_zhang_shu(4, 1, 1).omega_bar == pytest.approx(1 / 12, abs=1e-15)


def test_cdw_values():
    cad = cad_cui_ding_wu(2, 1.0, 1.0)
    assert cad.omega_bar == pytest.approx(0.25, abs=1e-15)
    assert np.allclose(cad.internal_nodes, [[0.0, 0.0]])
    assert np.allclose(cad.internal_weights, [0.5])
    cad = cad_cui_ding_wu(2, 0.0, 1.0)  # delta = -1
    assert cad.omega_bar == pytest.approx(1 / 6, abs=1e-15)
    assert np.allclose(np.sort(cad.internal_nodes[:, 0]),
                       [-math.sqrt(1 / 3), math.sqrt(1 / 3)], atol=1e-14)
    assert np.allclose(cad.internal_nodes[:, 1], 0.0)
    with pytest.raises(ValueError):
        cad_cui_ding_wu(4, 1.0, 1.0)


def test_cdw_delta_snap():
    cad = cad_cui_ding_wu(2, 1.0, 1.0 + 1e-14)
    assert cad.delta == 0.0 or abs(cad.delta) < 1e-13
    assert len(cad.internal_weights) == 1  # merged node branch


def test_omega_star_values():
    assert omega_star(2, 0.0) == pytest.approx(0.25, abs=1e-13)
    assert omega_star(4, 0.0) == pytest.approx(2 - math.sqrt(14) / 2, abs=1e-13)
    assert omega_star(6, 0.0) == pytest.approx(1 - math.sqrt(30) / 6, abs=1e-13)
    assert omega_star(1, 0.3) == 0.5
    assert omega_star(3, -1.0) == pytest.approx(1 / 6, abs=1e-14)
    # monotone decrease in k at delta = 0
    assert omega_star(2, 0) > omega_star(4, 0) > omega_star(6, 0)
    # CDW is never worse than the tensor CAD for k = 2, 3
    assert omega_star(2, 0.0) >= 1 / 6
    with pytest.raises(ValueError):
        omega_star(8, 0.0)


def test_omega_star_matches_cdw_weight():
    for delta in (-1.0, -0.4, 0.0, 0.7, 1.0):
        lam1 = (1 + delta) / 2
        lam2 = (1 - delta) / 2
        if lam1 + lam2 == 0:
            continue
        cad = cad_cui_ding_wu(3, lam1, lam2)
        assert cad.omega_bar == pytest.approx(omega_star(3, delta), abs=1e-14)


def test_overlap_extension_weights_and_constant():
    cad = cad_cui_ding_wu(2, 1.3, 0.7)
    ov = cad_extend_overlapping(cad)
    assert ov.total_weight() == pytest.approx(1.0, abs=1e-13)
    assert ov.internal[:, 2].sum() == pytest.approx(1 - 2 * cad.omega_bar, abs=1e-13)
    assert ov.interface[:, 2].sum() == pytest.approx(cad.omega_bar, abs=1e-13)
    assert ov.boundary[:, 2].sum() == pytest.approx(cad.omega_bar, abs=1e-13)
    # symmetry of the node set under point reflection
    pts = np.vstack([ov.internal[:, :2], ov.interface[:, :2], ov.boundary[:, :2]])
    sorted_pts = np.sort(np.round(pts, 12), axis=0)
    sorted_neg = np.sort(np.round(-pts, 12), axis=0)
    assert np.allclose(sorted_pts, sorted_neg)


def test_overlap_extension_quarterwise_exactness():
    # per-quarter decomposition of x^2 y^2 is exact for the tensor CAD
    cad = cad_zhang_shu(2, 1.0, 1.0)
    ov = cad_extend_overlapping(cad)

    def f(x, y):
        return x * x * y * y

    total = (sum(w * f(x, y) for x, y, w in ov.internal)
             + sum(w * f(x, y) for x, y, w in ov.interface)
             + sum(w * f(x, y) for x, y, w in ov.boundary))
    exact = 1.0 / 9.0  # (1/4) * integral of x^2 y^2 over [-1,1]^2
    assert total == pytest.approx(exact, rel=1e-12)

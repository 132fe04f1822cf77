import math

import numpy as np
import pytest

from cdgrmhd import admissibility as adm
from cdgrmhd.problems import PROBLEM_IDS, make_problem
from cdgrmhd.state import prim_to_cons_batch


def test_known_ids_and_errors():
    for pid in PROBLEM_IDS:
        make_problem(pid)
    with pytest.raises(KeyError):
        make_problem("vortex99")


def test_alfven_exact_is_initial():
    p = make_problem("alfven1d")
    x = np.linspace(0, 1, 33)
    assert np.allclose(p.initial(x), p.exact(x, 0.0))
    p2 = make_problem("alfven2d")
    y = np.linspace(0, math.sqrt(2), 17)
    assert np.allclose(p2.initial(x[:17], y), p2.exact(x[:17], y, 0.0))


def test_alfven_wave_structure():
    p = make_problem("alfven2d")
    x = np.linspace(0, math.sqrt(2), 40)
    y = np.linspace(0, math.sqrt(2), 40)
    W = p.exact(x[:, None], y[None, :], 0.37)
    v2 = np.einsum("xyc,xyc->xy", W[..., 1:4], W[..., 1:4])
    assert np.allclose(np.sqrt(v2), 0.99, atol=1e-13)
    # B = kappa*v + background unit vector along the propagation angle
    kap_v2 = W[..., 5] - math.sin(math.pi / 4)
    ratio = kap_v2 / W[..., 2]
    assert np.allclose(ratio, ratio.ravel()[0], rtol=1e-10)


def test_rp1_left_state_matches_state_example():
    p = make_problem("rp1")
    W = p.initial(np.array([0.25]))
    U = prim_to_cons_batch(W, p.eos)[0]
    assert np.allclose(U, [1, 0, 0, 0, 5, 26, 26, 734.5], atol=1e-10)


@pytest.mark.parametrize("pid,kw", [
    ("alfven1d", {}), ("alfven2d", {}), ("rp1", {}), ("rp2", {}), ("rp3", {}),
    ("orszag_tang", {}), ("rotor", {}), ("shock_cloud", {}),
    ("blast", {"ba": 0.1}), ("blast", {"ba": 0.5}), ("blast", {"ba": 2000.0}),
    ("jet", {}), ("jet", {"eos_key": "rc"}),
])
def test_initial_conditions_admissible_everywhere(pid, kw, rng):
    p = make_problem(pid, **kw)
    if p.dim == 1:
        x = np.sort(rng.uniform(p.domain[0], p.domain[1], 4000))
        W = p.initial(x)
    else:
        x = rng.uniform(p.domain[0], p.domain[1], 4000)
        y = rng.uniform(p.domain[2], p.domain[3], 4000)
        W = p.initial(x, y)
    assert (W[..., 0] > 0).all() and (W[..., 7] > 0).all()
    v2 = np.einsum("...c,...c->...", W[..., 1:4], W[..., 1:4])
    assert (v2 < 1.0).all()
    U = prim_to_cons_batch(W, p.eos)
    assert all(adm.in_G(u) for u in U.reshape(-1, 8))


def test_blast_shell_continuity():
    p = make_problem("blast", ba=0.5)
    eps = 1e-9
    inner = p.initial(np.array([0.8 - eps]), np.array([0.0]))
    shell = p.initial(np.array([0.8 + eps]), np.array([0.0]))
    assert np.allclose(inner[..., 0], shell[..., 0], atol=1e-6)
    assert np.allclose(inner[..., 7], shell[..., 7], atol=1e-5)


def test_jet_parameters():
    p = make_problem("jet")
    W = p.initial(np.array([5.0]), np.array([5.0]))[0]
    p_a = 2.35362407217e-5
    assert W[7] == p_a
    assert W[5] == pytest.approx(math.sqrt(2000 * p_a), rel=1e-12)
    # plasma beta 1e-3
    beta = W[7] / (0.5 * W[5] ** 2)
    assert beta == pytest.approx(1e-3, rel=1e-10)
    mask, beam = p.bottom_inflow(np.array([0.1, 0.3, 0.7]))
    assert mask.tolist() == [True, True, False]
    assert beam[2] == 0.99


def test_overrides():
    p = make_problem("orszag_tang", t_end=1.5)
    assert p.t_end == 1.5
    p = make_problem("jet", eos_key="rc")
    assert p.eos_key == "rc"

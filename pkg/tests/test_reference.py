import numpy as np
import pytest

from cdgrmhd import admissibility as adm
from cdgrmhd.eos import EosKind
from cdgrmhd.problems import make_problem
from cdgrmhd.reference import FvState1D, lf_step, run_reference
from cdgrmhd.state import prim_to_cons_batch


def test_constant_state_is_fixed_point():
    eos = EosKind.from_key("tm")
    w0 = np.array([1.0, 0.2, 0.1, 0.0, 0.4, -0.2, 0.1, 1.5])
    U = np.tile(prim_to_cons_batch(w0[None, :], eos)[0], (34, 1))
    st = FvState1D(U.copy(), 0.0, 0.01)
    out = lf_step(st, 0.004, eos)
    assert np.abs(out.U[1:-1] - U[1:-1]).max() < 1e-13


def test_dt_validation():
    eos = EosKind.from_key("tm")
    st = FvState1D(np.ones((10, 8)), 0.0, 0.01)
    with pytest.raises(ValueError):
        lf_step(st, 0.009, eos)


def test_contact_spreads_and_conserves():
    eos = EosKind.from_key("ideal:1.6666666666666667")
    n = 200
    W = np.tile([1.0, 0, 0, 0, 0.0, 0.2, 0.0, 1.0], (n, 1))
    W[n // 2:, 5] = -0.2
    U = np.empty((n + 2, 8))
    U[1:-1] = prim_to_cons_batch(W, eos)
    st = FvState1D(U, 0.0, 1.0 / n)
    total0 = st.U[1:-1].sum(axis=0)
    for _ in range(50):
        st = lf_step(st, 0.5 / n, eos)
    # interior is far from the boundary: all components conserved
    total = st.U[1:-1].sum(axis=0)
    assert np.allclose(total, total0, rtol=1e-12, atol=1e-12)
    mid = st.U[1:-1, 5]
    assert np.abs(np.diff(mid)).max() < 0.4  # diffused, no new extrema beyond the jump


@pytest.mark.parametrize("pid", ["rp1", "rp2", "rp3"])
def test_lf_averages_stay_admissible(pid):
    problem = make_problem(pid)
    state = run_reference(problem, 400, t_end=0.1)
    assert all(adm.in_G(u) for u in state.U[1:-1])


def test_reference_matches_cdg_coarsely():
    # the LF profile and the CDG profile agree on bulk structure for rp1
    from cdgrmhd.driver import Run1D
    from cdgrmhd.io_config import RunConfig

    problem = make_problem("rp1")
    ref = run_reference(problem, 4000)
    from cdgrmhd.state import cons_to_prim_batch

    Wref, ok, _ = cons_to_prim_batch(ref.U[1:-1], problem.eos)
    assert ok.all()
    cfg = RunConfig(problem="rp1", nx=500, strict_bp_cfl=True)
    cfg.validate()
    run = Run1D(cfg)
    run.run()
    x, W, _ = run.primitive_profile()
    # compare density interpolated onto the coarse mesh: first-order LF at
    # 4000 cells is diffused, so only ask for qualitative closeness
    rho_ref = np.interp(x, ref.centers(), Wref[:, 0])
    rel = np.abs(W[:, 0] - rho_ref) / rho_ref.max()
    assert np.median(rel) < 0.05
    assert rel.max() < 0.5  # discrepancies concentrate at the discontinuities

import math

import numpy as np
import pytest

from cdgrmhd.timestepping import TimeController, ssp_multistep3, ssp_rk3


def test_rk3_scalar_ode_accuracy():
    # one step on u' = -u reproduces the cubic Taylor polynomial exactly and
    # differs from the exponential by the leading dt^4/24 term
    dt = 0.1
    u = ssp_rk3(1.0, lambda v: -v, dt)
    taylor3 = 1.0 - dt + dt**2 / 2 - dt**3 / 6
    assert u == pytest.approx(taylor3, abs=1e-15)
    assert abs(u - math.exp(-dt)) == pytest.approx(dt**4 / 24, rel=0.03)
    # single-step error ratio ~ 2^4
    e1 = abs(ssp_rk3(1.0, lambda v: -v, 0.1) - math.exp(-0.1))
    e2 = abs(ssp_rk3(1.0, lambda v: -v, 0.05) - math.exp(-0.05))
    assert e1 / e2 > 12.0


def test_rk3_identity_and_tuple_states():
    state = (np.ones(3), np.zeros(2))
    out = ssp_rk3(state, lambda s: (0.0 * s[0], 0.0 * s[1]), 0.3)
    assert np.array_equal(out[0], state[0]) and np.array_equal(out[1], state[1])


def test_multistep_constant_preserved():
    hist = [1.0, 1.0, 1.0, 1.0]
    rhs = [0.0, 0.0, 0.0, 0.0]
    assert ssp_multistep3(hist, rhs, 0.1) == pytest.approx(1.0, abs=1e-15)


def test_multistep_third_order():
    def integrate(dt):
        # hist[0] = u^{n-3} ... hist[3] = u^n with u(t) = e^{-t}, exact startup
        hist = [math.exp(-m * dt) for m in range(4)]
        rhss = [-h for h in hist]
        u = ssp_multistep3(hist, rhss, dt)
        return abs(u - math.exp(-4 * dt))

    e1 = integrate(0.05)
    e2 = integrate(0.025)
    assert e1 / e2 > 10.0  # local truncation ~ O(dt^4)


def test_multistep_requires_history():
    with pytest.raises(ValueError):
        ssp_multistep3([1.0], [0.0], 0.1)


def test_controller_dt_formulas():
    c = TimeController(cfl=0.25, theta=1.0, strict_bp=False, k=2)
    assert c.dt_1d(0.1) == pytest.approx(0.025)
    assert c.dt_2d(0.1, 0.1) == pytest.approx(0.25 / 20.0)
    strict = TimeController(cfl=0.25, theta=1.0, strict_bp=True, k=2, cad="cui-ding-wu")
    h = 0.1
    assert strict.dt_1d(h) == pytest.approx(h / 12.0)
    assert strict.dt_2d(h, h) == pytest.approx(h / 16.0)
    zs = TimeController(cfl=0.25, theta=1.0, strict_bp=True, k=2, cad="zhang-shu")
    assert zs.dt_2d(h, h) == pytest.approx(h / 24.0)
    # the milder decomposition buys exactly 3/2 in the provable step
    assert strict.dt_2d(h, h) / zs.dt_2d(h, h) == pytest.approx(1.5, abs=1e-13)


def test_controller_alpha_dependence():
    c = TimeController(cfl=10.0, theta=1.0, strict_bp=True, k=2)
    base = c.dt_2d(0.1, 0.1, alpha=(1.0, 1.0))
    slower = c.dt_2d(0.1, 0.1, alpha=(2.0, 1.0))
    assert slower < base


def test_controller_validation():
    with pytest.raises(ValueError):
        TimeController(cfl=-1.0)
    with pytest.raises(ValueError):
        TimeController(theta=1.5)


def test_tv_nonincreasing_scalar_advection():
    # SSP smoke test: first-order upwind advection + minmod-limited data
    n = 64
    x = np.linspace(0, 1, n, endpoint=False)
    u = np.where(np.abs(x - 0.5) < 0.2, 1.0, 0.0)
    dt, dx = 0.5 / n, 1.0 / n

    def rhs(v):
        return -(v - np.roll(v, 1)) / dx

    def tv(v):
        return np.abs(np.diff(np.append(v, v[0]))).sum()

    tv0 = tv(u)
    for _ in range(100):
        u = ssp_rk3(u, rhs, dt)
        assert tv(u) <= tv0 + 1e-12
        tv0 = tv(u)

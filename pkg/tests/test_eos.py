import math

import numpy as np
import pytest

from cdgrmhd.eos import (EosError, EosKind, check_eos_conditions, dz_dh,
                         enthalpy, pressure_from_rho_h)

from conftest import ALL_EOS_KEYS

IDEAL53 = EosKind.from_key("ideal:1.6666666666666667")


def test_enthalpy_examples():
    assert enthalpy(IDEAL53, 1.0, 1.0) == pytest.approx(3.5, rel=1e-14)
    assert enthalpy(EosKind.from_key("ip"), 0.0, 1.0) == 1.0
    assert enthalpy(EosKind.from_key("rc"), 1.0, 1.0) == pytest.approx(4.4, rel=1e-14)


def test_pressure_inverse_examples():
    assert pressure_from_rho_h(IDEAL53, 1.0, 3.5) == pytest.approx(1.0, rel=1e-13)
    assert pressure_from_rho_h(EosKind.from_key("ip"), 2.0, 1.0) == 0.0
    tm = EosKind.from_key("tm")
    expect = (10.0 - math.sqrt(52.0)) / 8.0
    assert pressure_from_rho_h(tm, 1.0, 2.0) == pytest.approx(expect, rel=1e-13)
    assert enthalpy(tm, pressure_from_rho_h(tm, 1.0, 2.0), 1.0) == pytest.approx(2.0, rel=1e-12)


def test_domain_errors():
    with pytest.raises(EosError):
        enthalpy(IDEAL53, 1.0, -1.0)
    with pytest.raises(EosError):
        pressure_from_rho_h(IDEAL53, 1.0, 0.5)
    with pytest.raises(EosError):
        EosKind.from_key("ideal:2.5")
    with pytest.raises(EosError):
        EosKind.from_key("polytropic")


@pytest.mark.parametrize("key", ALL_EOS_KEYS + ("ideal:2.0",))
def test_conditions_hold(key):
    eos = EosKind.from_key(key)
    for p, rho in ((1.0, 1.0), (1e-8, 1.0), (1e3, 1e-2), (1e-6, 1e3)):
        kinetic, causal = check_eos_conditions(eos, p, rho)
        assert kinetic and causal


@pytest.mark.parametrize("key", ALL_EOS_KEYS)
def test_round_trip_random(key, rng):
    eos = EosKind.from_key(key)
    rho = 10 ** rng.uniform(-8, 4, 10_000)
    p = 10 ** rng.uniform(-8, 4, 10_000)
    for i in range(len(p)):
        h = enthalpy(eos, p[i], rho[i])
        back = pressure_from_rho_h(eos, rho[i], h)
        # h-space consistency at the stated tolerance
        assert enthalpy(eos, back, rho[i]) == pytest.approx(h, rel=1e-12)
        # p-space consistency up to the enthalpy representation floor
        floor = 10.0 * 2.3e-16 * abs(dz_dh(eos.code, eos.gamma, h)) * rho[i]
        assert abs(back - p[i]) <= 1e-10 * p[i] + floor


@pytest.mark.parametrize("key", ALL_EOS_KEYS)
def test_kinetic_bound_and_monotonicity(key, rng):
    eos = EosKind.from_key(key)
    rho = 10 ** rng.uniform(-8, 4, 10_000)
    p = 10 ** rng.uniform(-8, 4, 10_000)
    z = p / rho
    h = np.array([enthalpy(eos, pi, ri) for pi, ri in zip(p, rho)])
    assert (h >= np.sqrt(1.0 + z * z) + z - 1e-14 * h).all()
    order = np.argsort(z)
    assert (np.diff(h[order]) >= -1e-13 * h[order][:-1]).all()

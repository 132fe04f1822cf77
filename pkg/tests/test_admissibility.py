import math

import numpy as np
import pytest

from cdgrmhd import admissibility as adm
from cdgrmhd.eos import EosKind
from cdgrmhd.state import RecoveryFailure, cons_to_prim, prim_to_cons_batch

from conftest import ALL_EOS_KEYS, sample_admissible_states, sample_valid_primitives


def test_q_examples():
    assert adm.q_of([1, 0, 0, 0, 0, 0, 0, 2.5]) == 1.5
    assert adm.q_of([1, 3, 0, 0, 0, 0, 0, 5]) == pytest.approx(5 - math.sqrt(10), rel=1e-14)
    assert adm.q_of([0, 0, 0, 0, 1, 1, 1, 4.0]) == 4.0


def test_phi_examples():
    u = [1, 0, 0, 0, 0, 0, 0, 2.5]
    assert adm.phi_aux(u) == pytest.approx(math.sqrt(22.0), rel=1e-14)
    expect = (math.sqrt(22.0) + 5.0) * math.sqrt(math.sqrt(22.0) - 2.5)
    assert adm.Phi_of(u) == pytest.approx(expect, rel=1e-13)


def test_phi_positive_unmagnetized_at_rest(rng):
    # B = 0, m = 0, E > D > 0: Phi reduces to a positive expression
    for _ in range(200):
        D = 10 ** rng.uniform(-3, 3)
        E = D * (1.0 + 10 ** rng.uniform(-6, 3))
        assert adm.Phi_of([D, 0, 0, 0, 0, 0, 0, E]) > 0.0


def test_magnetically_crushed_state_not_in_G():
    # huge D^2|B|^2 relative to E makes Phi negative; recovery agrees
    u = np.array([1.0, 0, 0, 0, 100.0, 0, 0, 60.0])
    assert adm.Phi_of(u) < 0.0 or adm.q_of(u) <= 0.0
    assert not adm.in_G(u)
    with pytest.raises(RecoveryFailure):
        cons_to_prim(u, EosKind.from_key("tm"))


def test_in_G_trivia():
    assert not adm.in_G(np.zeros(8))
    assert not adm.in_G([1, 0, 0, 0, 0, 0, 0, 0.5])  # E < D
    assert adm.in_G([1, 0, 0, 0, 0, 0, 0, 2.5])


@pytest.mark.parametrize("key", ALL_EOS_KEYS)
def test_valid_primitives_map_into_G(key, rng):
    U = sample_admissible_states(rng, 2500, eos_key=key)
    assert all(adm.in_G(u) for u in U)


def test_G_eps_examples_and_inclusion(rng):
    eps = adm.EpsilonParams(1e-13, 1e-13, 1e-13)
    u = np.array([1e-13, 0, 0, 0, 0, 0, 0, 1.0])
    assert adm.in_G_eps(u, eps)
    u = np.array([1.0, 0, 0, 0, 0, 0, 0, 1.0 + 0.5e-13])  # q = eps_q/2
    assert not adm.in_G_eps(u, eps)
    U = sample_admissible_states(rng, 4000)
    for u in U:
        if adm.in_G_eps(u, eps):
            assert adm.in_G(u)


def test_gql_value_reduces_to_E_minus_D():
    aux = adm.AuxiliaryPair(np.zeros(3), np.zeros(3))
    u = np.array([1.0, 0.3, 0, 0, 2.0, 0, 0, 4.0])
    assert adm.gql_value(u, aux) == pytest.approx(3.0, rel=1e-14)


def test_gql_positive_on_G(rng):
    U = sample_admissible_states(rng, 300)
    for _ in range(50):
        r = 0.999 * rng.uniform() ** (1 / 3)
        d = rng.standard_normal(3)
        vs = r * d / np.linalg.norm(d)
        aux = adm.AuxiliaryPair(vs, rng.standard_normal(3) * 3.0)
        vals = [adm.gql_value(u, aux) for u in U]
        assert min(vals) > 0.0


def test_gql_linearity(rng):
    aux = adm.AuxiliaryPair(np.array([0.2, -0.1, 0.4]), np.array([1.0, 2.0, -1.0]))
    pm = adm.gql_pm_star(aux)
    u1 = sample_admissible_states(rng, 1)[0]
    u2 = sample_admissible_states(rng, 1)[0]
    lhs = adm.gql_value(u1 + u2, aux)
    rhs = adm.gql_value(u1, aux) + adm.gql_value(u2, aux) - pm
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_flux_gql_check(rng):
    eos = EosKind.from_key("ip")
    W = sample_valid_primitives(rng, 200)
    U = prim_to_cons_batch(W, eos)
    aux0 = adm.AuxiliaryPair(np.zeros(3), np.zeros(3))
    for i in range(len(U)):
        # theta = 0 reduces to the plain linear constraint value
        v0 = adm.flux_gql_check(U[i], W[i], aux0, 0.0, 1)
        assert v0 == pytest.approx(adm.gql_value(U[i], aux0), rel=1e-12)
    worst = 0.0
    for i in range(len(U)):
        r = 0.999 * rng.uniform() ** (1 / 3)
        d = rng.standard_normal(3)
        aux = adm.AuxiliaryPair(r * d / np.linalg.norm(d), rng.standard_normal(3) * 2)
        theta = rng.uniform(-1, 1)
        ell = int(rng.integers(1, 4))
        val = adm.flux_gql_check(U[i], W[i], aux, theta, ell)
        scale = max(1.0, abs(U[i, 7]))
        worst = min(worst, val / scale)
    assert worst >= -1e-12


def test_convexity_sampled(rng):
    U1 = sample_admissible_states(rng, 5000, eos_key="rc")
    U2 = sample_admissible_states(rng, 5000, eos_key="ip")
    mid = 0.5 * (U1 + U2)
    assert all(adm.in_G(u) for u in mid)


def test_aux_pair_validation():
    with pytest.raises(ValueError):
        adm.AuxiliaryPair(np.array([1.0, 0, 0]), np.zeros(3))

"""Membership tests for the physically admissible state set.

A conserved state U = (D, m1, m2, m3, B1, B2, B3, E) is admissible when
density and pressure are positive and the flow is subluminal.  Admissibility
has an explicit equivalent form via three scalar functions::

    D > 0,   q(U) = E - sqrt(D^2 + |m|^2) > 0,   Phi(U) > 0,

where Phi combines the magnetic and inertial content of the state.  The set
also has a representation by constraints *linear* in U, parameterized by
auxiliary variables (v*, B*); that form is used by the property suites and
the step-size theory, while the explicit form drives the limiter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

NEG_INF = float("-inf")


@dataclass(frozen=True)
class AuxiliaryPair:
    """Auxiliary variables of the linear-constraint representation."""

    v_star: np.ndarray
    B_star: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v_star", np.asarray(self.v_star, dtype=float))
        object.__setattr__(self, "B_star", np.asarray(self.B_star, dtype=float))
        if self.v_star.shape != (3,) or self.B_star.shape != (3,):
            raise ValueError("v_star and B_star must be 3-vectors")
        if np.dot(self.v_star, self.v_star) >= 1.0:
            raise ValueError("auxiliary velocity must satisfy |v*| < 1")


@dataclass(frozen=True)
class EpsilonParams:
    """Small positive floors shielding the admissibility checks from round-off."""

    eps_D: float
    eps_q: float
    eps_E: float

    def __post_init__(self):
        if not (self.eps_D > 0.0 and self.eps_q > 0.0 and self.eps_E > 0.0):
            raise ValueError("epsilon floors must be positive")


@nb.njit(cache=True)
def q_u(D, m1, m2, m3, B1, B2, B3, E):
    return E - math.sqrt(D * D + m1 * m1 + m2 * m2 + m3 * m3)


@nb.njit(cache=True)
def phi_u(D, m1, m2, m3, B1, B2, B3, E):
    """Auxiliary radical of the explicit membership test; -inf if undefined."""
    Bs = B1 * B1 + B2 * B2 + B3 * B3
    ms = m1 * m1 + m2 * m2 + m3 * m3
    rad = (Bs - E) * (Bs - E) + 3.0 * (E * E - D * D - ms)
    if rad < 0.0:
        return NEG_INF
    return math.sqrt(rad)


@nb.njit(cache=True)
def phi_cap_u(D, m1, m2, m3, B1, B2, B3, E):
    """Explicit membership function Phi(U); -inf when a radicand is negative."""
    Bs = B1 * B1 + B2 * B2 + B3 * B3
    ms = m1 * m1 + m2 * m2 + m3 * m3
    mB = m1 * B1 + m2 * B2 + m3 * B3
    rad = (Bs - E) * (Bs - E) + 3.0 * (E * E - D * D - ms)
    if rad < 0.0:
        return NEG_INF
    phi = math.sqrt(rad)
    rad2 = phi + Bs - E
    if rad2 < 0.0:
        return NEG_INF
    return (phi + 2.0 * E - 2.0 * Bs) * math.sqrt(rad2) - math.sqrt(
        13.5 * (D * D * Bs + mB * mB)
    )


@nb.njit(cache=True)
def in_g(D, m1, m2, m3, B1, B2, B3, E):
    if D <= 0.0:
        return False
    if q_u(D, m1, m2, m3, B1, B2, B3, E) <= 0.0:
        return False
    return phi_cap_u(D, m1, m2, m3, B1, B2, B3, E) > 0.0


@nb.njit(cache=True)
def in_g_eps(D, m1, m2, m3, B1, B2, B3, E, eps_D, eps_q, eps_E):
    if D < eps_D:
        return False
    if q_u(D, m1, m2, m3, B1, B2, B3, E) < eps_q:
        return False
    return phi_cap_u(D, m1, m2, m3, B1, B2, B3, E - eps_E) >= 0.0


def _as8(u) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.shape != (8,):
        raise ValueError(f"expected an 8-component conserved state, got shape {arr.shape}")
    return arr


def q_of(u) -> float:
    u = _as8(u)
    return q_u(*u)


def phi_aux(u) -> float:
    """phi(U); returns -inf when the radicand is negative (inadmissible)."""
    u = _as8(u)
    return phi_u(*u)


def Phi_of(u) -> float:
    """Phi(U); returns -inf when a radicand is negative (inadmissible)."""
    u = _as8(u)
    return phi_cap_u(*u)


def in_G(u) -> bool:
    u = _as8(u)
    return bool(in_g(*u))


def in_G_eps(u, eps: EpsilonParams) -> bool:
    u = _as8(u)
    return bool(in_g_eps(*u, eps.eps_D, eps.eps_q, eps.eps_E))


def gql_n_star(aux: AuxiliaryPair) -> np.ndarray:
    """The constraint direction n* determined by the auxiliary pair."""
    vs, Bs = aux.v_star, aux.B_star
    fac = 1.0 - float(np.dot(vs, vs))
    n = np.empty(8)
    n[0] = -math.sqrt(fac)
    n[1:4] = -vs
    n[4:7] = -fac * Bs
    n[7] = 1.0
    return n


def gql_pm_star(aux: AuxiliaryPair) -> float:
    """Magnetic-pressure offset of the linear constraint.

    Note the |B*|^2: dimensional consistency with the physical magnetic
    pressure requires the square even though some sources drop it.
    """
    vs, Bs = aux.v_star, aux.B_star
    fac = 1.0 - float(np.dot(vs, vs))
    return 0.5 * (fac * float(np.dot(Bs, Bs)) + float(np.dot(vs, Bs)) ** 2)


def gql_value(u, aux: AuxiliaryPair) -> float:
    """U . n* + p*_m -- positive for every admissible U and every aux pair."""
    u = _as8(u)
    return float(np.dot(u, gql_n_star(aux))) + gql_pm_star(aux)


def flux_gql_check(u, w, aux: AuxiliaryPair, theta: float, direction: int) -> float:
    """Left side of the flux inequality (U + theta*F_l).n* + p*_m + theta*(...).

    ``w`` is the primitive state recovered from ``u``; nonnegative for
    admissible u, any |theta| <= 1, and any auxiliary pair.
    """
    from .state import flux  # deferred: state imports admissibility

    if not -1.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [-1, 1]")
    u = _as8(u)
    f = flux(u, w, direction)
    n = gql_n_star(aux)
    pm = gql_pm_star(aux)
    B_l = u[3 + direction]
    vs_l = aux.v_star[direction - 1]
    vB = float(np.dot(aux.v_star, aux.B_star))
    return float(np.dot(u + theta * f, n)) + pm + theta * (vs_l * pm - B_l * vB)

"""Equations of state: specific enthalpy h(p, rho) and its inverse p(rho, h).

Four EOS families are supported, selected by string key:

* ``ideal:<gamma>`` -- constant adiabatic index, 1 < gamma <= 2
* ``ip``            -- h = 2z + sqrt(1 + 4 z^2),          z = p/rho
* ``tm``            -- h = 5z/2 + sqrt(1 + 9 z^2 / 4)
* ``rc``            -- h = (12 z^2 + 8 z + 2) / (3 z + 2)

All four depend on (p, rho) only through z = p/rho, so the inverse
p(rho, h) reduces to a scalar function z(h) with a closed form per family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb

IDEAL, IP, TM, RC = 0, 1, 2, 3

_KIND_NAMES = {IDEAL: "ideal", IP: "ip", TM: "tm", RC: "rc"}


class EosError(ValueError):
    """Raised for invalid EOS parameters or out-of-domain arguments."""


@dataclass(frozen=True)
class EosKind:
    """EOS variant tag. ``gamma`` is only meaningful for the ideal family."""

    code: int
    gamma: float = 0.0

    def __post_init__(self):
        if self.code not in _KIND_NAMES:
            raise EosError(f"unknown EOS code {self.code}")
        if self.code == IDEAL and not 1.0 < self.gamma <= 2.0:
            raise EosError(f"ideal EOS requires 1 < gamma <= 2, got {self.gamma}")

    @classmethod
    def from_key(cls, key: str) -> "EosKind":
        key = key.strip().lower()
        if key.startswith("ideal"):
            parts = key.split(":")
            if len(parts) != 2:
                raise EosError(f"ideal EOS key must look like 'ideal:<gamma>', got {key!r}")
            try:
                gamma = float(parts[1].strip())
            except ValueError as exc:
                raise EosError(f"bad adiabatic index in {key!r}") from exc
            return cls(IDEAL, gamma)
        codes = {"ip": IP, "tm": TM, "rc": RC}
        if key not in codes:
            raise EosError(f"unknown EOS key {key!r}")
        return cls(codes[key])

    @property
    def key(self) -> str:
        if self.code == IDEAL:
            return f"ideal:{self.gamma:g}"
        return _KIND_NAMES[self.code]


@nb.njit(cache=True, fastmath=True)
def h_of_z(code, gamma, z):
    """Specific enthalpy as a function of z = p/rho."""
    if code == IDEAL:
        return 1.0 + gamma / (gamma - 1.0) * z
    if code == IP:
        return 2.0 * z + math.sqrt(1.0 + 4.0 * z * z)
    if code == TM:
        return 2.5 * z + math.sqrt(1.0 + 2.25 * z * z)
    return (12.0 * z * z + 8.0 * z + 2.0) / (3.0 * z + 2.0)


@nb.njit(cache=True, fastmath=True)
def z_of_h(code, gamma, h):
    """Inverse of ``h_of_z``: z = p/rho from the enthalpy."""
    if code == IDEAL:
        return (h - 1.0) * (gamma - 1.0) / gamma
    if code == IP:
        return (h * h - 1.0) / (4.0 * h)
    if code == TM:
        return (5.0 * h - math.sqrt(9.0 * h * h + 16.0)) / 8.0
    s = 8.0 - 3.0 * h
    return (3.0 * h - 8.0 + math.sqrt(s * s + 96.0 * (h - 1.0))) / 24.0


@nb.njit(cache=True, fastmath=True)
def dz_dh(code, gamma, h):
    """Derivative of ``z_of_h`` (used by the Newton recovery solver)."""
    if code == IDEAL:
        return (gamma - 1.0) / gamma
    if code == IP:
        return 0.25 * (1.0 + 1.0 / (h * h))
    if code == TM:
        return (5.0 - 9.0 * h / math.sqrt(9.0 * h * h + 16.0)) / 8.0
    s = 8.0 - 3.0 * h
    return (3.0 + (9.0 * h + 24.0) / math.sqrt(s * s + 96.0 * (h - 1.0))) / 24.0


def enthalpy(eos: EosKind, p: float, rho: float) -> float:
    """h(p, rho). Accepts p = 0 as a limit value; requires rho > 0."""
    if rho <= 0.0:
        raise EosError(f"enthalpy needs rho > 0, got {rho}")
    if p < 0.0:
        raise EosError(f"enthalpy needs p >= 0, got {p}")
    return h_of_z(eos.code, eos.gamma, p / rho)


def pressure_from_rho_h(eos: EosKind, rho: float, h: float) -> float:
    """Invert the EOS: pressure from (rho, h).  Requires rho > 0 and h >= 1."""
    if rho <= 0.0:
        raise EosError(f"pressure_from_rho_h needs rho > 0, got {rho}")
    if h < 1.0:
        raise EosError(f"pressure_from_rho_h needs h >= 1, got {h}")
    z = z_of_h(eos.code, eos.gamma, h)
    if z < 0.0:
        z = 0.0
    return rho * z


def check_eos_conditions(eos: EosKind, p: float, rho: float, rel_step: float = 1e-6):
    """Numerically verify the two admissibility-compatible EOS inequalities.

    Returns a pair of booleans: (kinetic-theory lower bound on h holds,
    causality/partial-derivative chain holds).  The partial derivatives are
    approximated by central finite differences with a relative step.
    """
    if p <= 0.0 or rho <= 0.0:
        raise EosError("check_eos_conditions needs p > 0 and rho > 0")
    z = p / rho
    h = h_of_z(eos.code, eos.gamma, z)
    kinetic = h >= math.sqrt(1.0 + z * z) + z

    dp = rel_step * p
    drho = rel_step * rho
    dh_dp = (enthalpy(eos, p + dp, rho) - enthalpy(eos, p - dp, rho)) / (2.0 * dp)
    dh_drho = (enthalpy(eos, p, rho + drho) - enthalpy(eos, p, rho - drho)) / (2.0 * drho)
    causal = h * (1.0 / rho - dh_dp) < dh_drho < 0.0
    return kinetic, causal

"""Benchmark problem definitions: initial data, boundaries, exact solutions.

Each constructor returns an immutable ProblemSpec holding the domain, the
default desk-scale mesh, the EOS key, boundary tags, a vectorized initial
primitive field, and (for the smooth wave problems) the exact solution.
Primitive arrays are ordered (rho, v1, v2, v3, B1, B2, B3, p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .eos import EosKind, h_of_z


@dataclass(frozen=True)
class ProblemSpec:
    id: str
    dim: int
    domain: tuple
    default_mesh: tuple
    eos_key: str
    t_end: float
    bc: tuple
    initial: Callable
    exact: Optional[Callable] = None
    tvb_m: Optional[float] = None  # None: oscillation limiter off by default
    inflow_left: Optional[np.ndarray] = None
    bottom_inflow: Optional[Callable] = None  # x centers -> (mask, primitive)

    @property
    def eos(self) -> EosKind:
        return EosKind.from_key(self.eos_key)


def _alfven_kappa() -> float:
    # rho = 1, p = 0.01, |v| = 0.99 with the TM EOS
    h = h_of_z(2, 0.0, 0.01)
    W2 = 1.0 / (1.0 - 0.99**2)
    return math.sqrt(1.0 + h * W2)


def _alfven1d(t_end: float) -> ProblemSpec:
    kappa = _alfven_kappa()

    def exact(x, t):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape + (8,))
        phase = 2.0 * math.pi * (x + t / kappa)
        out[..., 0] = 1.0
        out[..., 1] = 0.0
        out[..., 2] = 0.99 * np.sin(phase)
        out[..., 3] = 0.99 * np.cos(phase)
        out[..., 4] = 1.0
        out[..., 5] = kappa * out[..., 2]
        out[..., 6] = kappa * out[..., 3]
        out[..., 7] = 0.01
        return out

    return ProblemSpec(
        id="alfven1d", dim=1, domain=(0.0, 1.0), default_mesh=(40,),
        eos_key="tm", t_end=t_end, bc=("periodic", "periodic"),
        initial=lambda x: exact(x, 0.0), exact=exact,
    )


def _alfven2d(t_end: float) -> ProblemSpec:
    kappa = _alfven_kappa()
    ca, sa = math.cos(math.pi / 4), math.sin(math.pi / 4)

    def exact(x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        zeta = x * ca + y * sa
        phase = 2.0 * math.pi * (zeta + t / kappa)
        s, c = np.sin(phase), np.cos(phase)
        out = np.empty(np.broadcast(x, y).shape + (8,))
        out[..., 0] = 1.0
        out[..., 1] = -0.99 * s * sa
        out[..., 2] = 0.99 * s * ca
        out[..., 3] = 0.99 * c
        out[..., 4] = ca + kappa * out[..., 1]
        out[..., 5] = sa + kappa * out[..., 2]
        out[..., 6] = kappa * out[..., 3]
        out[..., 7] = 0.01
        return out

    L = math.sqrt(2.0)
    return ProblemSpec(
        id="alfven2d", dim=2, domain=(0.0, L, 0.0, L), default_mesh=(40, 40),
        eos_key="tm", t_end=t_end, bc=("periodic",) * 4,
        initial=lambda x, y: exact(x, y, 0.0), exact=exact,
    )


def _riemann(pid: str, left, right, eos_key: str) -> ProblemSpec:
    wl = np.asarray(left, dtype=float)
    wr = np.asarray(right, dtype=float)

    def initial(x):
        x = np.asarray(x, dtype=float)
        out = np.where((x <= 0.5)[..., None], wl, wr)
        return out

    return ProblemSpec(
        id=pid, dim=1, domain=(0.0, 1.0), default_mesh=(1000,),
        eos_key=eos_key, t_end=0.4, bc=("outflow", "outflow"),
        initial=initial, tvb_m=50.0,
    )


def _orszag_tang(t_end: float) -> ProblemSpec:
    A = 0.99 / math.sqrt(2.0)

    def initial(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.empty(np.broadcast(x, y).shape + (8,))
        out[..., 0] = 1.0
        out[..., 1] = -A * np.sin(y)
        out[..., 2] = A * np.sin(x)
        out[..., 3] = 0.0
        out[..., 4] = -np.sin(y)
        out[..., 5] = np.sin(2.0 * x)
        out[..., 6] = 0.0
        out[..., 7] = 10.0
        return out

    two_pi = 2.0 * math.pi
    return ProblemSpec(
        id="orszag_tang", dim=2, domain=(0.0, two_pi, 0.0, two_pi),
        default_mesh=(100, 100), eos_key="tm", t_end=t_end,
        bc=("periodic",) * 4, initial=initial, tvb_m=50.0,
    )


def _rotor() -> ProblemSpec:
    alpha, r1, r2 = 9.95, 0.1, 0.115

    def initial(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.sqrt(x * x + y * y)
        delta = (r2 - r) / (r2 - r1)
        out = np.empty(np.broadcast(x, y).shape + (8,))
        inner = r <= r1
        mid = (r > r1) & (r <= r2)
        rsafe = np.where(r > 0, r, 1.0)
        out[..., 0] = np.where(inner, 10.0, np.where(mid, 1.0 + 9.0 * delta, 1.0))
        vscale = np.where(inner, 1.0, np.where(mid, delta * r1 / rsafe, 0.0))
        out[..., 1] = -alpha * y * vscale
        out[..., 2] = alpha * x * vscale
        out[..., 3] = 0.0
        out[..., 4] = 1.0
        out[..., 5] = 0.0
        out[..., 6] = 0.0
        out[..., 7] = 1.0
        return out

    return ProblemSpec(
        id="rotor", dim=2, domain=(-0.5, 0.5, -0.5, 0.5),
        default_mesh=(100, 100), eos_key="rc", t_end=0.4,
        bc=("outflow",) * 4, initial=initial, tvb_m=50.0,
    )


def _shock_cloud() -> ProblemSpec:
    post = np.array([3.86859, 0.68, 0.0, 0.0,
                     0.0, 0.8498108108786, -0.8498108108786, 1.251148954517])

    def initial(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.broadcast_to(post, np.broadcast(x, y).shape + (8,)).copy()
        pre = x >= 0.05
        r = np.sqrt((x - 0.25) ** 2 + (y - 0.5) ** 2)
        rho_pre = np.where(r <= 0.15, 30.0, 1.0)
        out[..., 0] = np.where(pre, rho_pre, post[0])
        for c, v in ((1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0),
                     (5, 0.1610642582333), (6, 0.1610642582333), (7, 0.05)):
            out[..., c] = np.where(pre, v, post[c])
        return out

    return ProblemSpec(
        id="shock_cloud", dim=2, domain=(-0.2, 1.2, 0.0, 1.0),
        default_mesh=(140, 100), eos_key="ideal:1.6666666666666667",
        t_end=1.2, bc=("inflow", "outflow", "outflow", "outflow"),
        initial=initial, tvb_m=50.0, inflow_left=post,
    )


def _blast(ba: float) -> ProblemSpec:
    rho_b = 1e-2 - 1e-4
    p_b = 1.0 - 5e-4

    def initial(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.sqrt(x * x + y * y)
        out = np.empty(np.broadcast(x, y).shape + (8,))
        shell = (r >= 0.8) & (r <= 1.0)
        inner = r < 0.8
        lin = (1.0 - r) / 0.2
        out[..., 0] = np.where(inner, 1e-2, np.where(shell, 1e-4 + rho_b * lin, 1e-4))
        out[..., 1] = 0.0
        out[..., 2] = 0.0
        out[..., 3] = 0.0
        out[..., 4] = ba
        out[..., 5] = 0.0
        out[..., 6] = 0.0
        out[..., 7] = np.where(inner, 1.0, np.where(shell, 5e-4 + p_b * lin, 5e-4))
        return out

    return ProblemSpec(
        id="blast", dim=2, domain=(-6.0, 6.0, -6.0, 6.0),
        default_mesh=(100, 100), eos_key="ip", t_end=4.0,
        bc=("outflow",) * 4, initial=initial, tvb_m=50.0,
    )


def _jet(eos_key: str) -> ProblemSpec:
    p_a = 2.35362407217e-5
    b_y = math.sqrt(2000.0 * p_a)
    ambient = np.array([1.0, 0.0, 0.0, 0.0, 0.0, b_y, 0.0, p_a])
    beam = np.array([0.1, 0.0, 0.99, 0.0, 0.0, b_y, 0.0, p_a])

    def initial(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.broadcast_to(ambient, np.broadcast(x, y).shape + (8,)).copy()

    def bottom_inflow(xc):
        mask = np.asarray(xc) <= 0.5 + 1e-12
        return mask, beam

    return ProblemSpec(
        id="jet", dim=2, domain=(0.0, 12.0, 0.0, 25.0),
        default_mesh=(60, 125), eos_key=eos_key, t_end=30.0,
        bc=("reflect", "outflow", "outflow", "outflow"),
        initial=initial, tvb_m=50.0, bottom_inflow=bottom_inflow,
    )


def make_problem(pid: str, *, ba: float = 0.5, eos_key: str | None = None,
                 t_end: float | None = None) -> ProblemSpec:
    """Construct a problem by id; optional overrides for blast strength,
    EOS (jet supports ideal and rc), and final time."""
    builders = {
        "alfven1d": lambda: _alfven1d(t_end if t_end is not None else 1.0),
        "alfven2d": lambda: _alfven2d(t_end if t_end is not None else 1.0),
        "rp1": lambda: _riemann("rp1", (1, 0, 0, 0, 5, 26, 26, 30),
                                (1, 0, 0, 0, 5, 0.7, 0.7, 1),
                                "ideal:1.6666666666666667"),
        "rp2": lambda: _riemann("rp2", (1, 0, 0, 0, 10, 7, 7, 1e4),
                                (1, 0, 0, 0, 10, 0.7, 0.7, 1e-8), "rc"),
        "rp3": lambda: _riemann("rp3", (1, 0.99999, 0, 0, 100, 70, 70, 0.1),
                                (1, -0.99999, 0, 0, 100, -70, -70, 0.1), "ip"),
        "orszag_tang": lambda: _orszag_tang(t_end if t_end is not None else 6.85),
        "rotor": _rotor,
        "shock_cloud": _shock_cloud,
        "blast": lambda: _blast(ba),
        "jet": lambda: _jet(eos_key or "ideal:1.6666666666666667"),
    }
    if pid not in builders:
        raise KeyError(f"unknown problem id {pid!r}")
    spec = builders[pid]()
    if t_end is not None and spec.t_end != t_end:
        spec = ProblemSpec(**{**spec.__dict__, "t_end": t_end})
    if eos_key is not None and spec.eos_key != eos_key:
        spec = ProblemSpec(**{**spec.__dict__, "eos_key": eos_key})
    return spec


PROBLEM_IDS = ("alfven1d", "alfven2d", "rp1", "rp2", "rp3", "orszag_tang",
               "rotor", "shock_cloud", "blast", "jet")

"""Strong-stability-preserving time integrators and step-size control.

Integrators are written against a generic linear state algebra (anything
supporting scalar multiplication and addition: floats, arrays, tuples of
arrays via the helpers below), with an optional post-stage hook where the
driver applies limiters and refreshes ghost cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import omega_star


def _axpy(a, x, b, y):
    """a*x + b*y for floats, arrays, or tuples thereof."""
    if isinstance(x, tuple):
        return tuple(_axpy(a, xi, b, yi) for xi, yi in zip(x, y))
    return a * x + b * y


def ssp_rk3(u, rhs, dt, post_stage=None):
    """Classic three-stage, third-order SSP Runge-Kutta step."""
    if post_stage is None:
        post_stage = lambda v: v
    u1 = post_stage(_axpy(1.0, u, dt, rhs(u)))
    u2 = post_stage(_axpy(0.75, u, 0.25, _axpy(1.0, u1, dt, rhs(u1))))
    return post_stage(_axpy(1.0 / 3.0, u, 2.0 / 3.0, _axpy(1.0, u2, dt, rhs(u2))))


def ssp_multistep3(history, rhs_history, dt, post_stage=None):
    """Third-order SSP multistep: combines states n and n-3 with fixed dt.

    ``history`` holds the last four states ordered oldest first, so
    history[-1] is u^n and history[0] is u^{n-3}.
    """
    if len(history) < 4 or len(rhs_history) < 4:
        raise ValueError("multistep integrator needs 4 states of history")
    if post_stage is None:
        post_stage = lambda v: v
    un, ln = history[-1], rhs_history[-1]
    um3, lm3 = history[0], rhs_history[0]
    part1 = _axpy(1.0, un, 3.0 * dt, ln)
    part2 = _axpy(1.0, um3, 12.0 / 11.0 * dt, lm3)
    return post_stage(_axpy(16.0 / 27.0, part1, 11.0 / 27.0, part2))


@dataclass
class TimeController:
    """CFL-driven step sizing with an optional provable-bound cap."""

    cfl: float = 0.25
    theta: float = 1.0
    t_end: float = 1.0
    strict_bp: bool = False
    k: int = 2
    cad: str = "cui-ding-wu"
    dt_history: list = field(default_factory=list)

    def __post_init__(self):
        if not self.cfl > 0.0:
            raise ValueError("cfl must be positive")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")

    def _omega_bar(self, delta: float) -> float:
        if self.cad == "cui-ding-wu" and self.k <= 3:
            return omega_star(self.k, delta)
        L = -(-(self.k + 3) // 2)  # ceil
        return 1.0 / (L * (L - 1))

    def dt_1d(self, dx: float) -> float:
        dt = self.cfl * dx
        if self.strict_bp:
            L = -(-(self.k + 3) // 2)
            dt = min(dt, 0.5 * self.theta * dx / (L * (L - 1)))
        return dt

    def dt_2d(self, dx: float, dy: float, alpha=(1.0, 1.0)) -> float:
        dt = self.cfl / (1.0 / dx + 1.0 / dy)
        if self.strict_bp:
            a1, a2 = max(1.0, alpha[0]), max(1.0, alpha[1])
            delta = (a1 * dy - a2 * dx) / (a1 * dy + a2 * dx)
            if abs(delta) < 1e-13:
                delta = 0.0
            bound = 0.5 * self.theta * self._omega_bar(delta) / (a1 / dx + a2 / dy)
            dt = min(dt, bound)
        return dt

    def clip_to_end(self, t: float, dt: float) -> float:
        if t + dt > self.t_end - 1e-14 * max(1.0, abs(self.t_end)):
            return self.t_end - t
        return dt

"""Gauss / Gauss-Lobatto rules and cell average decompositions (CADs).

A CAD writes the average of a polynomial over the reference square [-1,1]^2
as a convex combination of boundary-face values (weight ``omega_bar`` with a
lambda1/lambda2 split between the x- and y-faces) and a few internal nodes.
The boundary weight governs the bound-preserving time-step restriction, so
bigger is better; the Cui-Ding-Wu decomposition attains the optimal weight
for low degrees while the classic tensor (Zhang-Shu) one works for any k.

``cad_extend_overlapping`` transplants a CAD onto the four quarter cells of
an overlapping-mesh target cell, yielding the node groups used by the
bound-preserving analysis on primal/dual mesh pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_NODE_TOL = 1e-15


def _legendre_and_deriv(n: int, x: np.ndarray):
    """Values of P_n and P_n' by the three-term recurrence."""
    p0 = np.ones_like(x)
    if n == 0:
        return p0, np.zeros_like(x)
    p1 = x.copy()
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * x * p1 - k * p0) / (k + 1)
    dp = n * (x * p1 - p0) / (x * x - 1.0 + 1e-300)
    return p1, dp


def _gauss_nodes_unit(Q: int):
    """Gauss nodes/weights on [-1, 1] by Newton on Legendre roots."""
    if Q == 1:
        return np.zeros(1), np.array([2.0])
    i = np.arange(Q)
    x = np.cos(math.pi * (i + 0.75) / (Q + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_deriv(Q, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < _NODE_TOL:
            break
    _, dp = _legendre_and_deriv(Q, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def _lobatto_nodes_unit(L: int):
    """Gauss-Lobatto nodes/weights on [-1, 1]; endpoints included."""
    if L < 2:
        raise ValueError("Lobatto rule needs at least 2 nodes")
    if L == 2:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    x = np.cos(math.pi * np.arange(L) / (L - 1))
    for _ in range(100):
        p, dp = _legendre_and_deriv(L - 1, x)
        # interior Lobatto nodes are the roots of P'_{L-1}
        d2p = (2.0 * x * dp - L * (L - 1) * p) / (1.0 - x * x + 1e-300)
        dx = np.where(np.abs(x) < 1.0, dp / d2p, 0.0)
        x -= dx
        if np.max(np.abs(dx)) < _NODE_TOL:
            break
    p, _ = _legendre_and_deriv(L - 1, x)
    w = 2.0 / (L * (L - 1) * p * p)
    order = np.argsort(x)
    return x[order], w[order]


@dataclass(frozen=True)
class QuadRule:
    """Quadrature on [-1/2, 1/2] with weights normalized to sum to 1."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss(Q: int) -> QuadRule:
    if Q < 1:
        raise ValueError("Gauss rule needs Q >= 1")
    x, w = _gauss_nodes_unit(Q)
    return QuadRule(0.5 * x, 0.5 * w)


def gauss_lobatto(L: int) -> QuadRule:
    x, w = _lobatto_nodes_unit(L)
    return QuadRule(0.5 * x, 0.5 * w)


@dataclass(frozen=True)
class CadDescriptor:
    """A symmetric CAD on the reference cell [-1,1]^2.

    ``gauss_nodes`` are the Q boundary-trace nodes per face (on [-1,1]) with
    normalized weights ``gauss_weights``; a face value enters with weight
    omega_bar * w_mu * (lambda_i / lambda).  Internal nodes carry weights
    ``internal_weights`` directly.  2*omega_bar + sum(internal_weights) = 1.
    """

    k: int
    omega_bar: float
    lambda1: float
    lambda2: float
    gauss_nodes: np.ndarray
    gauss_weights: np.ndarray
    internal_nodes: np.ndarray  # (S, 2)
    internal_weights: np.ndarray  # (S,)

    @property
    def lam(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def delta(self) -> float:
        return (self.lambda1 - self.lambda2) / self.lam

    @property
    def face_split(self):
        return self.lambda1 / self.lam, self.lambda2 / self.lam

    def average(self, f) -> float:
        """Apply the decomposition to callable f(x, y) on [-1,1]^2."""
        w1, w2 = self.face_split
        acc = 0.0
        for mu in range(len(self.gauss_nodes)):
            g, wg = self.gauss_nodes[mu], self.gauss_weights[mu]
            acc += self.omega_bar * wg * (
                w1 * (f(-1.0, g) + f(1.0, g)) + w2 * (f(g, -1.0) + f(g, 1.0))
            )
        for s in range(len(self.internal_weights)):
            acc += self.internal_weights[s] * f(*self.internal_nodes[s])
        return acc


def _snap_delta(lambda1: float, lambda2: float) -> float:
    delta = (lambda1 - lambda2) / (lambda1 + lambda2)
    if abs(delta) < 1e-13:
        return 0.0
    return delta


def cad_zhang_shu(k: int, lambda1: float, lambda2: float) -> CadDescriptor:
    """Tensor Gauss x Lobatto CAD; boundary weight 1/(L(L-1))."""
    if k < 1:
        raise ValueError("degree must be >= 1")
    if lambda1 < 0 or lambda2 < 0 or lambda1 + lambda2 <= 0:
        raise ValueError("need lambda1, lambda2 >= 0 with positive sum")
    Q = k + 1
    L = math.ceil((k + 3) / 2)
    gx, gw = _gauss_nodes_unit(Q)
    gw = gw / 2.0
    lx, lw = _lobatto_nodes_unit(L)
    lw = lw / 2.0
    lam = lambda1 + lambda2
    nodes = []
    weights = []
    for nu in range(1, L - 1):
        for mu in range(Q):
            nodes.append((lx[nu], gx[mu]))
            weights.append(lw[nu] * gw[mu] * lambda1 / lam)
            nodes.append((gx[mu], lx[nu]))
            weights.append(lw[nu] * gw[mu] * lambda2 / lam)
    return CadDescriptor(
        k=k,
        omega_bar=lw[0],
        lambda1=lambda1,
        lambda2=lambda2,
        gauss_nodes=gx,
        gauss_weights=gw,
        internal_nodes=np.array(nodes, dtype=float).reshape(-1, 2),
        internal_weights=np.array(weights, dtype=float),
    )


def cad_cui_ding_wu(k: int, lambda1: float, lambda2: float) -> CadDescriptor:
    """Optimal-boundary-weight CAD; node formulas available for k <= 3."""
    if k < 1:
        raise ValueError("degree must be >= 1")
    if k > 3:
        raise ValueError(f"Cui-Ding-Wu CAD nodes are only available for k <= 3, got k={k}")
    if lambda1 < 0 or lambda2 < 0 or lambda1 + lambda2 <= 0:
        raise ValueError("need lambda1, lambda2 >= 0 with positive sum")
    Q = k + 1
    gx, gw = _gauss_nodes_unit(Q)
    gw = gw / 2.0
    delta = _snap_delta(lambda1, lambda2)
    ad = abs(delta)
    if k == 1:
        omega_bar = 0.5
        nodes = np.zeros((0, 2))
        weights = np.zeros(0)
    else:
        omega_bar = 1.0 / (4.0 + 2.0 * ad)
        if ad == 0.0:
            nodes = np.array([[0.0, 0.0]])
            weights = np.array([0.5])
        else:
            r = math.sqrt(2.0 * ad / (3.0 + 3.0 * ad))
            if delta < 0.0:
                nodes = np.array([[r, 0.0], [-r, 0.0]])
            else:
                nodes = np.array([[0.0, r], [0.0, -r]])
            w = (1.0 + ad) / (2.0 * (2.0 + ad))
            weights = np.array([w, w])
    return CadDescriptor(
        k=k,
        omega_bar=omega_bar,
        lambda1=lambda1,
        lambda2=lambda2,
        gauss_nodes=gx,
        gauss_weights=gw,
        internal_nodes=nodes,
        internal_weights=weights,
    )


def omega_star(k: int, delta: float) -> float:
    """Optimal CAD boundary weight as a function of the face imbalance delta."""
    if not 1 <= k <= 7:
        raise ValueError(f"omega_star is tabulated for 1 <= k <= 7, got {k}")
    if not -1.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [-1, 1]")
    ad = abs(delta)
    if k == 1:
        return 0.5
    if k in (2, 3):
        return 1.0 / (4.0 + 2.0 * ad)
    d2 = delta * delta
    if k in (4, 5):
        s = math.sqrt(78.0 * d2 + 46.0)
        arg = (1476.0 * d2 - 244.0) / s**3
        return 1.0 / (14.0 / 3.0 + (2.0 / 3.0) * s * math.cos(math.acos(arg) / 3.0))
    s = math.sqrt(126.0 * d2 + 96.0 * ad + 94.0)
    arg = (864.0 * ad**3 + 2916.0 * d2 + 288.0 * ad - 532.0) / s**3
    return 1.0 / (20.0 / 3.0 + 2.0 * ad + (2.0 / 3.0) * s * math.cos(math.acos(arg) / 3.0))


@dataclass(frozen=True)
class OverlapNodes:
    """CAD nodes transplanted onto a cell of the opposite (overlapping) mesh.

    Coordinates are in the target cell's reference frame [-1,1]^2.  Group 1
    holds the per-quarter internal nodes (total weight 1 - 2*omega_bar);
    group 2 the target-interior interface nodes and group 3 the target
    boundary nodes (total weight omega_bar each, after the /2 scaling).
    Group-2 nodes sit where the decomposed solution is discontinuous; they
    appear once per adjacent quarter, i.e. once per one-sided trace, with the
    per-trace weight, so a plain sum over all entries reconstructs 1.
    """

    internal: np.ndarray  # (n1, 3): x, y, weight
    interface: np.ndarray  # (n2, 3): one entry per one-sided trace
    boundary: np.ndarray  # (n3, 3)

    def total_weight(self) -> float:
        return float(
            self.internal[:, 2].sum()
            + self.interface[:, 2].sum()
            + self.boundary[:, 2].sum()
        )


def cad_extend_overlapping(cad: CadDescriptor) -> OverlapNodes:
    """Extend a reference CAD to the four quarter cells of an overlapped cell."""
    w1, w2 = cad.face_split
    internal, interface, boundary = [], [], []
    for mx in (-1.0, 1.0):
        for my in (-1.0, 1.0):
            cx, cy = 0.5 * mx, 0.5 * my
            for s in range(len(cad.internal_weights)):
                internal.append(
                    (
                        cx + 0.5 * cad.internal_nodes[s, 0],
                        cy + 0.5 * cad.internal_nodes[s, 1],
                        0.25 * cad.internal_weights[s],
                    )
                )
            for mu in range(len(cad.gauss_nodes)):
                g = cad.gauss_nodes[mu]
                wq = cad.gauss_weights[mu]
                # x-faces of the quarter: one on the cell center line, one
                # on the cell boundary; same for y-faces
                for xf in (cx - 0.5, cx + 0.5):
                    entry = (xf, cy + 0.5 * g, 0.25 * cad.omega_bar * wq * w1)
                    (interface if abs(xf) < 0.5 else boundary).append(entry)
                for yf in (cy - 0.5, cy + 0.5):
                    entry = (cx + 0.5 * g, yf, 0.25 * cad.omega_bar * wq * w2)
                    (interface if abs(yf) < 0.5 else boundary).append(entry)
    return OverlapNodes(
        internal=np.array(internal).reshape(-1, 3),
        interface=np.array(interface).reshape(-1, 3),
        boundary=np.array(boundary).reshape(-1, 3),
    )

"""Modal bases on reference cells and overlapping-mesh bookkeeping.

Scalar parts use scaled (monic) Legendre polynomials in the local coordinate
xi = 2(x - x_c)/dx, tensor-combined in 2D up to total degree k.  The in-plane
magnetic field in 2D lives in a locally divergence-free vector space spanned
by polynomial vector fields whose divergence vanishes identically inside the
cell; the standard spanning list is orthogonalized here (the cubic elements
are not mutually orthogonal as listed) so that mass matrices stay diagonal.

Meshes are uniform. The dual mesh is offset by half a cell; its cells are
indexed so that dual cell d covers the right half of primal cell d-1 and the
left half of primal cell d.  Ghost layers of width one implement boundary
conditions directly on modal coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import _gauss_nodes_unit

BC_PERIODIC, BC_OUTFLOW, BC_REFLECT, BC_INFLOW = 0, 1, 2, 3

BC_CODES = {
    "periodic": BC_PERIODIC,
    "outflow": BC_OUTFLOW,
    "reflect": BC_REFLECT,
    "inflow": BC_INFLOW,
}


def _monic_legendre(k: int) -> list[np.ndarray]:
    """Monomial coefficients (low-to-high) of monic Legendre up to degree k."""
    polys = [np.array([1.0]), np.array([0.0, 1.0])]
    for n in range(1, k):
        shifted = np.concatenate(([0.0], polys[n]))
        polys.append(shifted - (n * n / (4.0 * n * n - 1.0)) * np.pad(polys[n - 1], (0, 2)))
    return polys[: k + 1]


def _poly_eval(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(x, c)


def _poly_der(c: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyder(c) if len(c) > 1 else np.zeros(1)


class ScalarBasis1D:
    """Monic Legendre basis on xi in [-1, 1]; k+1 functions."""

    def __init__(self, k: int):
        self.k = k
        self.polys = _monic_legendre(k)
        self.nb = k + 1
        g, w = _gauss_nodes_unit(k + 2)
        vals = self.eval(g)[0]
        self.mass = 0.5 * np.einsum("q,ql,ql->l", w, vals, vals)

    def eval(self, xi):
        xi = np.asarray(xi, dtype=float)
        vals = np.stack([_poly_eval(c, xi) for c in self.polys], axis=-1)
        ders = np.stack([_poly_eval(_poly_der(c), xi) for c in self.polys], axis=-1)
        return vals, ders


class ScalarBasis2D:
    """Tensor monic-Legendre basis of total degree <= k on [-1,1]^2."""

    def __init__(self, k: int):
        self.k = k
        self.exponents = [(a, d - a) for d in range(k + 1) for a in range(d, -1, -1)]
        self.nb = len(self.exponents)
        self._leg = _monic_legendre(k)
        self._dleg = [_poly_der(c) for c in self._leg]
        g, w = _gauss_nodes_unit(k + 2)
        X, Y = np.meshgrid(g, g, indexing="ij")
        W = np.outer(w, w).ravel()
        vals = self.eval(X.ravel(), Y.ravel())[0]
        self.mass = 0.25 * np.einsum("q,ql,ql->l", W, vals, vals)

    def eval(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        fx = [_poly_eval(c, xi) for c in self._leg]
        fy = [_poly_eval(c, eta) for c in self._leg]
        dfx = [_poly_eval(c, xi) for c in self._dleg]
        dfy = [_poly_eval(c, eta) for c in self._dleg]
        vals = np.stack([fx[a] * fy[b] for a, b in self.exponents], axis=-1)
        dxi = np.stack([dfx[a] * fy[b] for a, b in self.exponents], axis=-1)
        deta = np.stack([fx[a] * dfy[b] for a, b in self.exponents], axis=-1)
        return vals, dxi, deta

    def mirror_signs(self, axis: int) -> np.ndarray:
        """Parity of each basis function under reflection of one axis."""
        return np.array([(-1.0) ** (e[axis]) for e in self.exponents])


def _df_raw_list(k: int, dx: float, dy: float):
    """The spanning list of the locally divergence-free space, low-to-high."""
    z = np.zeros((4, 4))

    def mono(*terms):
        c = z.copy()
        for i, j, v in terms:
            c[i, j] = v
        return c

    items = [
        (mono(), mono((0, 0, 1.0))),                      # (0, 1)
        (mono((0, 0, 1.0)), mono()),                      # (1, 0)
        (mono(), mono((1, 0, 1.0))),                      # (0, xi)
        (mono((0, 1, 1.0)), mono()),                      # (eta, 0)
        (mono((1, 0, dx)), mono((0, 1, -dy))),            # (dx xi, -dy eta)
    ]
    if k >= 2:
        items += [
            (mono(), mono((2, 0, 1.0), (0, 0, -1 / 3))),
            (mono((0, 2, 1.0), (0, 0, -1 / 3)), mono()),
            (mono((2, 0, dx), (0, 0, -dx / 3)), mono((1, 1, -2 * dy))),
            (mono((1, 1, -2 * dx)), mono((0, 2, dy), (0, 0, -dy / 3))),
        ]
    if k >= 3:
        items += [
            (mono(), mono((3, 0, 1.0), (1, 0, -0.6))),
            (mono((0, 3, 1.0), (0, 1, -0.6)), mono()),
            (mono((3, 0, dx / 3), (1, 0, -dx / 3)), mono((2, 1, -dy), (0, 1, dy / 3))),
            (mono((1, 2, dx), (1, 0, -dx / 3)), mono((0, 3, -dy / 3), (0, 1, dy / 3))),
            (mono((2, 1, dx), (0, 1, -dx / 3)), mono((1, 2, -dy), (1, 0, dy / 3))),
        ]
    return items


def _eval_c(c: np.ndarray, xi, eta):
    return np.polynomial.polynomial.polyval2d(xi, eta, c)


def _dxi_c(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    out = np.zeros_like(c)
    for i in range(1, n):
        out[i - 1] = i * c[i]
    return out


def _deta_c(c: np.ndarray) -> np.ndarray:
    return _dxi_c(c.T).T


class DfVectorBasis:
    """Orthogonal basis of the locally divergence-free vector space.

    Constructed for a concrete cell geometry (dx, dy) since the mixed
    elements carry the cell aspect ratio.  Elements 0 and 1 are the unit
    vectors in the B2 and B1 directions; every other element has zero mean,
    so the cell-averaged field is (coeff[1], coeff[0]).
    """

    def __init__(self, k: int, dx: float, dy: float):
        if not 1 <= k <= 3:
            raise ValueError(f"DF vector basis supports 1 <= k <= 3, got k={k}")
        self.k = k
        self.dx = dx
        self.dy = dy
        self.nb = (k + 1) * (k + 4) // 2
        raw = _df_raw_list(k, dx, dy)
        g, w = _gauss_nodes_unit(k + 2)
        X, Y = np.meshgrid(g, g, indexing="ij")
        W = 0.25 * np.outer(w, w)

        def inner(a, b):
            return float(
                np.sum(W * (_eval_c(a[0], X, Y) * _eval_c(b[0], X, Y)
                            + _eval_c(a[1], X, Y) * _eval_c(b[1], X, Y)))
            )

        ortho: list[tuple[np.ndarray, np.ndarray]] = []
        for c1, c2 in raw:
            c1, c2 = c1.copy(), c2.copy()
            for o1, o2 in ortho:
                alpha = inner((c1, c2), (o1, o2)) / inner((o1, o2), (o1, o2))
                if abs(alpha) > 1e-13:
                    c1 -= alpha * o1
                    c2 -= alpha * o2
            ortho.append((c1, c2))
        self.comp1 = [c for c, _ in ortho]
        self.comp2 = [c for _, c in ortho]
        self.mass = np.array([inner((ortho[i][0], ortho[i][1]), ortho[i]) for i in range(self.nb)])

    def eval(self, xi, eta):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        v1 = np.stack([_eval_c(c, xi, eta) for c in self.comp1], axis=-1)
        v2 = np.stack([_eval_c(c, xi, eta) for c in self.comp2], axis=-1)
        return v1, v2

    def jac(self, xi, eta):
        """Reference-coordinate Jacobian entries (d1/dxi, d1/deta, d2/dxi, d2/deta)."""
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        d1x = np.stack([_eval_c(_dxi_c(c), xi, eta) for c in self.comp1], axis=-1)
        d1y = np.stack([_eval_c(_deta_c(c), xi, eta) for c in self.comp1], axis=-1)
        d2x = np.stack([_eval_c(_dxi_c(c), xi, eta) for c in self.comp2], axis=-1)
        d2y = np.stack([_eval_c(_deta_c(c), xi, eta) for c in self.comp2], axis=-1)
        return d1x, d1y, d2x, d2y

    def divergence(self, xi, eta):
        """Physical divergence of each basis vector at reference points."""
        d1x, _, _, d2y = self.jac(xi, eta)
        return (2.0 / self.dx) * d1x + (2.0 / self.dy) * d2y

    def mirror_signs(self, axis: int) -> np.ndarray:
        """Parity under x- (axis=0) or y- (axis=1) reflection with B_n odd."""
        pts = np.array([[0.31, -0.47], [-0.63, 0.11], [0.05, 0.83]])
        v1, v2 = self.eval(pts[:, 0], pts[:, 1])
        if axis == 0:
            m1, m2 = self.eval(-pts[:, 0], pts[:, 1])
            r1, r2 = -m1, m2
        else:
            m1, m2 = self.eval(pts[:, 0], -pts[:, 1])
            r1, r2 = m1, -m2
        signs = np.empty(self.nb)
        for l in range(self.nb):
            num = np.sum(r1[:, l] * v1[:, l] + r2[:, l] * v2[:, l])
            den = np.sum(v1[:, l] ** 2 + v2[:, l] ** 2)
            s = num / den
            if abs(abs(s) - 1.0) > 1e-10:
                raise AssertionError(f"DF basis element {l} lacks reflection parity: {s}")
            signs[l] = round(s)
        return signs


@dataclass(frozen=True)
class Mesh1D:
    n: int
    xmin: float
    xmax: float
    bc: tuple[str, str] = ("periodic", "periodic")

    def __post_init__(self):
        if self.n < 4:
            raise ValueError("mesh needs at least 4 cells per axis")

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / self.n

    @property
    def periodic(self) -> bool:
        return self.bc[0] == "periodic"

    @property
    def nd(self) -> int:
        """Number of dual cells (centers on primal interfaces)."""
        return self.n if self.periodic else self.n + 1

    def primal_centers(self) -> np.ndarray:
        return self.xmin + (np.arange(self.n) + 0.5) * self.dx

    def dual_centers(self) -> np.ndarray:
        return self.xmin + np.arange(self.nd) * self.dx


@dataclass(frozen=True)
class Mesh2D:
    nx: int
    ny: int
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    bc: tuple[str, str, str, str] = ("periodic",) * 4  # left, right, bottom, top

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError("mesh needs at least 4 cells per axis")
        for axis in (0, 1):
            a, b = self.bc[2 * axis], self.bc[2 * axis + 1]
            if (a == "periodic") != (b == "periodic"):
                raise ValueError("periodic boundaries must pair up")

    @property
    def dx(self) -> float:
        return (self.xmax - self.xmin) / self.nx

    @property
    def dy(self) -> float:
        return (self.ymax - self.ymin) / self.ny

    def periodic(self, axis: int) -> bool:
        return self.bc[2 * axis] == "periodic"

    @property
    def ndx(self) -> int:
        return self.nx if self.periodic(0) else self.nx + 1

    @property
    def ndy(self) -> int:
        return self.ny if self.periodic(1) else self.ny + 1

    def primal_centers(self):
        x = self.xmin + (np.arange(self.nx) + 0.5) * self.dx
        y = self.ymin + (np.arange(self.ny) + 0.5) * self.dy
        return x, y

    def dual_centers(self):
        x = self.xmin + np.arange(self.ndx) * self.dx
        y = self.ymin + np.arange(self.ndy) * self.dy
        return x, y


def fill_ghosts_axis(arr: np.ndarray, axis: int, bc_lo: int, bc_hi: int,
                     reflect_scale: np.ndarray | None = None,
                     inflow_lo: np.ndarray | None = None,
                     inflow_hi: np.ndarray | None = None):
    """Fill one ghost layer on both ends of ``axis`` of a coefficient array.

    ``reflect_scale`` has the trailing shape of one cell's coefficients and
    multiplies the mirrored neighbor.  ``inflow_*`` are full ghost-slab
    payloads (shape of one boundary slab) written verbatim.
    """
    n = arr.shape[axis] - 2
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim

    def sl(i):
        s = [slice(None)] * arr.ndim
        s[axis] = i
        return tuple(s)

    if bc_lo == BC_PERIODIC:
        arr[sl(0)] = arr[sl(n)]
    elif bc_lo == BC_OUTFLOW:
        arr[sl(0)] = arr[sl(1)]
    elif bc_lo == BC_REFLECT:
        arr[sl(0)] = arr[sl(1)] * reflect_scale
    else:
        arr[sl(0)] = inflow_lo

    if bc_hi == BC_PERIODIC:
        arr[sl(n + 1)] = arr[sl(1)]
    elif bc_hi == BC_OUTFLOW:
        arr[sl(n + 1)] = arr[sl(n)]
    elif bc_hi == BC_REFLECT:
        arr[sl(n + 1)] = arr[sl(n)] * reflect_scale
    else:
        arr[sl(n + 1)] = inflow_hi


def project_cells_1d(fn, centers: np.ndarray, dx: float, basis: ScalarBasis1D,
                     npts: int) -> np.ndarray:
    """L2-project a pointwise field onto each cell; fn maps x -> (..., m)."""
    g, w = _gauss_nodes_unit(npts)
    vals, _ = basis.eval(g)
    X = centers[:, None] + 0.5 * dx * g[None, :]
    F = np.asarray(fn(X))
    num = 0.5 * np.einsum("q,cq...,ql->cl...", w, F, vals)
    return num / basis.mass[None, :, None]


def project_cells_2d(fn, cx: np.ndarray, cy: np.ndarray, dx: float, dy: float,
                     basis: ScalarBasis2D, npts: int) -> np.ndarray:
    """Tensor-Gauss projection on a grid of cells; fn maps (X, Y) -> (..., m)."""
    g, w = _gauss_nodes_unit(npts)
    GX, GY = np.meshgrid(g, g, indexing="ij")
    W = 0.25 * np.outer(w, w).ravel()
    vals = basis.eval(GX.ravel(), GY.ravel())[0]
    X = cx[:, None, None] + 0.5 * dx * GX.ravel()[None, None, :]
    Y = cy[None, :, None] + 0.5 * dy * GY.ravel()[None, None, :]
    F = np.asarray(fn(X + 0.0 * Y, Y + 0.0 * X))
    num = np.einsum("q,xyq...,ql->xyl...", W, F, vals)
    return num / basis.mass[None, None, :, None]


def project_cells_df(fn_b, cx: np.ndarray, cy: np.ndarray, dx: float, dy: float,
                     basis: DfVectorBasis, npts: int) -> np.ndarray:
    """Project an in-plane magnetic field (B1, B2) onto the DF vector basis."""
    g, w = _gauss_nodes_unit(npts)
    GX, GY = np.meshgrid(g, g, indexing="ij")
    W = 0.25 * np.outer(w, w).ravel()
    v1, v2 = basis.eval(GX.ravel(), GY.ravel())
    X = cx[:, None, None] + 0.5 * dx * GX.ravel()[None, None, :]
    Y = cy[None, :, None] + 0.5 * dy * GY.ravel()[None, None, :]
    B1, B2 = fn_b(X + 0.0 * Y, Y + 0.0 * X)
    num = np.einsum("q,xyq,ql->xyl", W, B1, v1) + np.einsum("q,xyq,ql->xyl", W, B2, v2)
    return num / basis.mass[None, None, :]

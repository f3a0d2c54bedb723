"""Quadrature, layer-potential kernels, and dense boundary operators.

Discretization is the global periodic trapezoid rule on each curve, with
the Kress/Martensen splitting for the logarithmic kernel of the single
layer on its own curve.  All operator matrices act on nodal values and
include the quadrature weights, so ``A @ values`` approximates the
boundary integral at the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CloseEvaluationError, GeometryError
from .geometry import TWO_PI, curves_cross, min_curve_distance

#: evaluation closer than this many local node spacings to a curve is refused
CLOSE_EVAL_FACTOR = 5.0


def fundamental_solution(x):
    """Free-space kernel (1/2pi) log|x| of the 2D Laplacian."""
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1) if x.ndim > 1 else np.linalg.norm(x)
    if np.any(r == 0.0):
        raise ValueError("fundamental solution is singular at the origin")
    return np.log(r) / TWO_PI


def fundamental_gradient(x):
    """Gradient x / (2pi |x|^2), broadcast over leading axes."""
    x = np.asarray(x, dtype=float)
    r2 = (x**2).sum(axis=-1, keepdims=True)
    return x / (TWO_PI * r2)


class Discretization:
    """Trapezoid nodes and geometric data on one closed curve.

    ``flip_normal=True`` marks a component whose enclosed region lies
    *outside* the domain carrying the boundary operators (a hole seen
    from a perforated domain): the working normal and the signed
    curvature are negated, everything else is unchanged.
    """

    def __init__(self, curve, n, flip_normal=False):
        if n < 16 or n % 2:
            raise GeometryError("node count must be even and at least 16")
        self.curve = curve
        self.n = int(n)
        self.flip = bool(flip_normal)
        self.s = TWO_PI * np.arange(self.n) / self.n
        self.points = curve.points(self.s)
        self.speeds = curve.speeds(self.s)
        if np.any(self.speeds <= 0.0):
            raise GeometryError(f"{curve.label}: vanishing speed at a node")
        sign = -1.0 if flip_normal else 1.0
        self.normals = sign * curve.normals(self.s)
        self.curvatures = sign * curve.curvatures(self.s)
        self.weight = TWO_PI / self.n
        #: arc-length quadrature weights, one per node
        self.sigma = self.speeds * self.weight
        #: local node spacing in arc length
        self.spacing = self.speeds * self.weight

    @property
    def length(self):
        return float(self.sigma.sum())

    def integrate(self, values):
        return float(self.sigma @ np.asarray(values))

    def sample_data(self, f):
        return np.asarray(f(self.s), dtype=float)

    def min_distance(self, points):
        d = np.asarray(points, dtype=float).reshape(-1, 2)
        r = np.linalg.norm(d[:, None, :] - self.points[None, :, :], axis=-1)
        return r.min(axis=1), r.argmin(axis=1)

    def check_far(self, points, factor=CLOSE_EVAL_FACTOR):
        """Refuse targets inside the near-singular band of this curve."""
        dist, idx = self.min_distance(points)
        band = factor * self.spacing[idx]
        bad = dist < band
        if bad.any():
            k = int(np.argmax(bad))
            raise CloseEvaluationError(
                "near-singular evaluation unsupported: point "
                f"{np.asarray(points).reshape(-1, 2)[k]} is {dist[k]:.3g} from "
                f"{self.curve.label} (band {band[k]:.3g})"
            )


@dataclass
class Density:
    """Nodal values of a boundary function on one discretized curve."""

    disc: Discretization
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.disc.n,):
            raise ValueError("density length must match the node count")

    def integral(self):
        return self.disc.integrate(self.values)


class BoundarySystem:
    """Ordered list of discretized components with block index bookkeeping."""

    def __init__(self, discs):
        self.discs = list(discs)
        sizes = [d.n for d in self.discs]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.total = int(self.offsets[-1])
        for a in range(len(self.discs)):
            for b in range(a + 1, len(self.discs)):
                if curves_cross(self.discs[a].curve, self.discs[b].curve):
                    raise GeometryError("boundary components are not disjoint")
        self.sigma = np.concatenate([d.sigma for d in self.discs])

    def __len__(self):
        return len(self.discs)

    def block(self, k):
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    def component_mask(self, k):
        m = np.zeros(self.total)
        m[self.block(k)] = 1.0
        return m

    def component_integral(self, values, k):
        return float(self.discs[k].sigma @ np.asarray(values)[self.block(k)])

    def split(self, values):
        return [np.asarray(values)[self.block(k)] for k in range(len(self.discs))]

    def concat(self, parts):
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def sample_data(self, funcs):
        return self.concat([d.sample_data(f) for d, f in zip(self.discs, funcs)])

    def check_far(self, points):
        for d in self.discs:
            d.check_far(points)


# -- quadrature --------------------------------------------------------------


def kress_log_weights(n):
    """First column of the circulant rule for the kernel log(4 sin^2(t/2)).

    With nodes s_j = 2*pi*j/n (n even), the rule integrates
    g -> int_0^{2pi} log(4 sin^2((s_i - t)/2)) g(t) dt exactly for
    trigonometric polynomials of degree up to n/2.
    """
    m = n // 2
    p = np.arange(n)
    k = np.arange(1, m)
    ang = TWO_PI * np.outer(p, k) / n
    r = -(4.0 * np.pi / n) * (np.cos(ang) / k).sum(axis=1)
    r -= (4.0 * np.pi / n**2) * np.cos(np.pi * p)
    return r


# -- kernel matrices ----------------------------------------------------------


def _displacements(points, disc):
    x = np.asarray(points, dtype=float).reshape(-1, 2)
    d = x[:, None, :] - disc.points[None, :, :]
    r2 = (d**2).sum(axis=-1)
    return d, r2


def slp_matrix(points, disc):
    """Single layer evaluation matrix at points off the curve."""
    d, r2 = _displacements(points, disc)
    return (0.5 * np.log(r2) / TWO_PI) * disc.sigma[None, :]


def slp_gradient_matrix(points, disc):
    """Gradient of the single layer: (m, 2, n), grad_x S(x - y) sigma_y."""
    d, r2 = _displacements(points, disc)
    g = d / (TWO_PI * r2[:, :, None]) * disc.sigma[None, :, None]
    return g.transpose(0, 2, 1)


def dlp_matrix(points, disc):
    """Double layer evaluation matrix: -nu(y).grad S(x - y) sigma_y."""
    d, r2 = _displacements(points, disc)
    ndot = np.einsum("mnj,nj->mn", d, disc.normals)
    return -(ndot / (TWO_PI * r2)) * disc.sigma[None, :]


def dlp_gradient_matrix(points, disc):
    """Gradient of the double layer: (m, 2, n)."""
    d, r2 = _displacements(points, disc)
    ndot = np.einsum("mnj,nj->mn", d, disc.normals)
    term = disc.normals[None, :, :] / r2[:, :, None] - (
        2.0 * ndot[:, :, None] * d / (r2**2)[:, :, None]
    )
    g = -term / TWO_PI * disc.sigma[None, :, None]
    return g.transpose(0, 2, 1)


def slp_self_matrix(disc):
    """On-curve single layer by the Kress log splitting (spectral accuracy)."""
    n = disc.n
    rcol = kress_log_weights(n)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    log_part = rcol[idx]
    d = disc.points[:, None, :] - disc.points[None, :, :]
    r2 = (d**2).sum(axis=-1)
    sdiff = disc.s[:, None] - disc.s[None, :]
    sin2 = 4.0 * np.sin(0.5 * sdiff) ** 2
    eye = np.eye(n, dtype=bool)
    smooth = np.empty((n, n))
    with np.errstate(divide="ignore", invalid="ignore"):
        np.log(r2 / sin2, out=smooth, where=~eye)
    smooth[eye] = np.log(disc.speeds**2)
    mat = (log_part + disc.weight * smooth) / (4.0 * np.pi)
    return mat * disc.speeds[None, :]


def w_block(target, source):
    """Nystrom block of the boundary double layer W between two components."""
    if target is source:
        d = target.points[:, None, :] - target.points[None, :, :]
        r2 = (d**2).sum(axis=-1)
        ndot = np.einsum("mnj,nj->mn", d, target.normals)
        eye = np.eye(target.n, dtype=bool)
        kern = np.empty((target.n, target.n))
        with np.errstate(divide="ignore", invalid="ignore"):
            np.divide(-ndot, TWO_PI * r2, out=kern, where=~eye)
        kern *= target.sigma[None, :]
        kern[eye] = target.curvatures * target.speeds / (4.0 * np.pi) * target.weight
        return kern
    return dlp_matrix(target.points, source)


def wstar_block(target, source):
    """Nystrom block of the adjoint operator W* between two components."""
    if target is source:
        d = target.points[:, None, :] - target.points[None, :, :]
        r2 = (d**2).sum(axis=-1)
        ndot = np.einsum("mj,mnj->mn", target.normals, d)
        eye = np.eye(target.n, dtype=bool)
        kern = np.empty((target.n, target.n))
        with np.errstate(divide="ignore", invalid="ignore"):
            np.divide(ndot, TWO_PI * r2, out=kern, where=~eye)
        kern *= target.sigma[None, :]
        kern[eye] = target.curvatures * target.speeds / (4.0 * np.pi) * target.weight
        return kern
    d = target.points[:, None, :] - source.points[None, :, :]
    r2 = (d**2).sum(axis=-1)
    ndot = np.einsum("mj,mnj->mn", target.normals, d)
    return (ndot / (TWO_PI * r2)) * source.sigma[None, :]


def _assemble_blocks(system, block):
    mat = np.empty((system.total, system.total))
    for a, da in enumerate(system.discs):
        for b, db in enumerate(system.discs):
            mat[system.block(a), system.block(b)] = block(da, db)
    return mat


def op_W(system):
    """Dense double-layer boundary operator on a multi-component boundary."""
    return _assemble_blocks(system, w_block)


def op_Wstar(system):
    """Dense adjoint boundary operator on a multi-component boundary."""
    return _assemble_blocks(system, wstar_block)


def slp_boundary_matrix(system):
    """Single layer on the whole boundary: Kress on the diagonal blocks."""

    def block(da, db):
        if da is db:
            return slp_self_matrix(da)
        return slp_matrix(da.points, db)

    return _assemble_blocks(system, block)


# -- user-facing evaluation ---------------------------------------------------


def eval_single_layer(density, points, on_boundary=False):
    """Single layer potential of a density, off the curve or at its nodes.

    Off-boundary targets must clear the near-evaluation band; on-boundary
    evaluation returns values at all nodes of the carrying curve.
    """
    if on_boundary:
        return slp_self_matrix(density.disc) @ density.values
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    density.disc.check_far(pts)
    return slp_matrix(pts, density.disc) @ density.values


def eval_double_layer(density, points):
    """Double layer potential at points off the carrying curve."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    density.disc.check_far(pts)
    return dlp_matrix(pts, density.disc) @ density.values

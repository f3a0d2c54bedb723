"""Exact representation of the perforated-domain solution.

A :class:`StructureBundle` collects, for one admissible parameter pair,
everything the exact representation formulas need: the flux and trace
triples on the reference curves, the data-moment vector, the regular
part of the log-coupling matrix, and evaluators for the smooth and
logarithmic fields in the macroscopic region (away from the collapsing
cluster) and in the microscopic regions (rescaled neighborhoods of each
hole).

Two independent computation paths to the same solution values live here:
``solution_macro``/``solution_micro`` (representation through the
reference-curve systems) and ``direct_solution`` (a physical-domain
boundary solve), which the validation experiments compare pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densities import (
    DEFAULT_NODES,
    ReferenceSystem,
    data_moments,
    physical_kernel_density,
    solve_flux,
    solve_trace,
)
from .dirichlet import (
    InteriorHarmonic,
    flux_basis,
    interior_system,
    solve_interior_dirichlet,
)
from .errors import SolverError
from .geometry import TWO_PI, scaled_hole, winding_number
from .linsys import solve_square
from .potentials import (
    Discretization,
    dlp_matrix,
    slp_matrix,
    slp_self_matrix,
    w_block,
)

LOG2PI = TWO_PI


def _adjugate2(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def log_coupling_split(R, eps1, eps2):
    """Determinant and inverse of the coupling matrix in split form.

    Returns ``(rfactor, det, inverse)`` where the determinant equals
    ``rfactor * log|eps1*eps2| / (4 pi^2)`` and the inverse combines the
    log-quotient matrix with the adjugate of the regular part.  The
    scalar ``rfactor`` staying away from zero is what makes the small
    parameter asymptotics well posed.
    """
    L = np.log(abs(eps1 * eps2))
    q = np.log(abs(eps1)) / L
    le2 = np.log(abs(eps2))
    R = np.asarray(R, dtype=float)
    det_r = R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]
    rfactor = (
        le2
        + q * le2
        - TWO_PI * (R[0, 1] + R[1, 0]) * q
        + TWO_PI * (R[0, 0] + R[1, 1])
        + 2.0 * TWO_PI * np.pi * det_r / L
    )
    det = rfactor * L / (2.0 * TWO_PI * np.pi)
    quotient_matrix = np.array([[1.0, -q], [-q, 1.0]])
    inverse = (TWO_PI / 2.0 / rfactor) * (
        2.0 * quotient_matrix + (2.0 * TWO_PI / L) * _adjugate2(R)
    )
    return rfactor, det, inverse


@dataclass
class LogCoupling:
    """The 2x2 coupling matrix with both determinant/inverse routes."""

    matrix: np.ndarray
    regular: np.ndarray
    eps1: float
    eps2: float
    rfactor: float
    det_direct: float
    det_split: float
    inverse_direct: np.ndarray
    inverse_split: np.ndarray

    @property
    def cond(self):
        return float(np.linalg.cond(self.matrix))


def log_coupling(R, eps):
    """Assemble the coupling matrix and both inversion routes."""
    R = np.asarray(R, dtype=float)
    L = np.log(abs(eps.product)) / TWO_PI
    l1 = np.log(abs(eps.eps1)) / TWO_PI
    matrix = np.array([[L, l1], [l1, L]]) + R
    det_direct = float(np.linalg.det(matrix))
    scale = float(np.abs(matrix).max()) ** 2
    if abs(det_direct) < 1e-14 * max(scale, 1.0):
        raise SolverError("coupling matrix numerically singular")
    rfactor, det_split, inv_split = log_coupling_split(R, eps.eps1, eps.eps2)
    inv_direct = np.linalg.inv(matrix)
    return LogCoupling(
        matrix, R, eps.eps1, eps.eps2, float(rfactor),
        det_direct, float(det_split), inv_direct, inv_split,
    )


def micro_log_shift(h, eps):
    """The explicit log 2-vector added to the micro green vector."""
    own = np.log(abs(eps.product)) / TWO_PI
    other = np.log(abs(eps.eps1)) / TWO_PI
    return np.array([own, other]) if h == 1 else np.array([other, own])


# -- bundle -------------------------------------------------------------------


class StructureBundle:
    """All representation ingredients for one admissible parameter pair."""

    def __init__(self, config, eps, n_outer=DEFAULT_NODES, n_hole=None):
        if eps.regime != "generic":
            raise ValueError("bundles require both parameters nonzero")
        self.config = config
        self.eps = eps
        self.ref = ReferenceSystem(config, n_outer, n_hole)
        self.flux = (
            solve_flux(self.ref, eps, 1),
            solve_flux(self.ref, eps, 2),
        )
        self.trace = solve_trace(self.ref, eps, self.flux)
        self.moments = data_moments(self.ref, self.flux)
        self.regular = regular_coupling(self.ref, eps, self.flux)
        self.coupling = log_coupling(self.regular, eps)
        # unperturbed outer solve
        outer = self.ref.outer
        self._mu_background = solve_square(
            0.5 * np.eye(outer.n) + w_block(outer, outer),
            outer.sample_data(config.f_outer),
            label="background solve",
        )
        # physical hole discretizations, used for margin checks
        self._scaled = [
            Discretization(scaled_hole(config, h, eps), self.ref.holes[h - 1].n)
            for h in (1, 2)
        ]
        self._outer_poly = config.outer.sample(512)

    # -- background ------------------------------------------------------------

    def background(self, points):
        """The unperturbed solution (no holes) at interior points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.ref.outer.check_far(pts)
        return dlp_matrix(pts, self.ref.outer) @ self._mu_background

    def background_at_origin(self):
        return float(self.background(np.zeros((1, 2)))[0])

    # -- margin checks ----------------------------------------------------------

    def check_macro(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.ref.outer.check_far(pts)
        for d in self._scaled:
            d.check_far(pts)
        for q in pts:
            if winding_number(self._outer_poly, q) == 0:
                raise ValueError(f"macro point {q} lies outside the outer region")
        return pts

    def check_micro(self, h, xi):
        xi = np.asarray(xi, dtype=float).reshape(-1, 2)
        self.ref.holes[h - 1].check_far(xi)
        phys = self.micro_to_physical(h, xi)
        self._scaled[2 - h].check_far(phys)
        self.ref.outer.check_far(phys)
        return xi, phys

    def micro_to_physical(self, h, xi):
        xi = np.asarray(xi, dtype=float).reshape(-1, 2)
        p = self.ref.anchors[h - 1]
        return self.eps.eps1 * p[None, :] + self.eps.product * xi

    # -- smooth field -----------------------------------------------------------

    def smooth_field(self, points):
        """The double-layer part of the representation at macro points."""
        pts = self.check_macro(points)
        return macro_smooth_values(self.ref, self.eps, self.trace, pts)

    def smooth_macro(self, points):
        """First-order macro coefficient: (smooth field - background)/product."""
        return (self.smooth_field(points) - self.background(points)) / self.eps.product

    def smooth_micro(self, h, xi):
        """The smooth micro field on the rescaled hole-h neighborhood."""
        xi, phys = self.check_micro(h, xi)
        return micro_smooth_values(self.ref, self.eps, self.trace, h, xi, phys)

    # -- green vector -----------------------------------------------------------

    def green_vector_macro(self, points):
        """Single-layer 2-vector of both flux triples at macro points: (m, 2)."""
        pts = self.check_macro(points)
        return macro_green_values(self.ref, self.eps, self.flux, pts)

    def green_vector_micro(self, h, xi, checked=True):
        """Analytic part of the micro green vector; logs live in the shift."""
        if checked:
            xi, phys = self.check_micro(h, xi)
        else:
            xi = np.asarray(xi, dtype=float).reshape(-1, 2)
            phys = self.micro_to_physical(h, xi)
        return micro_green_values(self.ref, self.eps, self.flux, h, xi, phys)

    # -- the representation -------------------------------------------------------

    def solution_macro(self, points):
        """Exact solution values at macro points via the representation."""
        pts = self.check_macro(points)
        u = self.smooth_field(pts)
        V = self.green_vector_macro(pts)
        weights = self.moments @ self.coupling.inverse_split
        return u + V @ weights

    def solution_micro(self, h, xi):
        """Exact rescaled solution values near hole h via the representation."""
        u = self.smooth_micro(h, xi)
        V = self.green_vector_micro(h, xi)
        shift = micro_log_shift(h, self.eps)
        weights = self.moments @ self.coupling.inverse_split
        return u + (V + shift[None, :]) @ weights


def build_bundle(config, eps1, eps2, n_outer=DEFAULT_NODES, n_hole=None):
    eps = config.epsilon(eps1, eps2)
    return StructureBundle(config, eps, n_outer, n_hole)


# -- standalone evaluators (valid at degenerate parameters too) -----------------


def macro_smooth_values(ref, eps, trace, points):
    """Smooth-field values at macro points for any admissible parameters."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = dlp_matrix(pts, ref.outer) @ trace.theta_outer.values
    if eps.product == 0.0:
        return out
    for k in (1, 2):
        dk = ref.holes[k - 1]
        q = ref.hole_points_physical(k, eps)
        d = pts[:, None, :] - q[None, :, :]
        r2 = (d**2).sum(axis=-1)
        ndot = np.einsum("mnj,nj->mn", d, dk.normals)
        kern = ndot / (TWO_PI * r2) * dk.sigma[None, :]
        out += eps.product * (kern @ trace.hole(k).values)
    return out


def micro_smooth_values(ref, eps, trace, h, xi, phys=None):
    """Smooth micro values near hole h for any admissible parameters."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    if phys is None:
        p = ref.anchors[h - 1]
        phys = eps.eps1 * p[None, :] + eps.product * xi
    out = dlp_matrix(phys, ref.outer) @ trace.theta_outer.values
    dh = ref.holes[h - 1]
    out -= dlp_matrix(xi, dh) @ trace.hole(h).values
    if eps.eps2 == 0.0:
        return out
    k = 2 if h == 1 else 1
    dk = ref.holes[k - 1]
    gap = ref.anchors[h - 1] - ref.anchors[k - 1]
    d = gap[None, None, :] + eps.eps2 * (xi[:, None, :] - dk.points[None, :, :])
    r2 = (d**2).sum(axis=-1)
    ndot = np.einsum("mnj,nj->mn", d, dk.normals)
    kern = ndot / (TWO_PI * r2) * dk.sigma[None, :]
    out += eps.eps2 * (kern @ trace.hole(k).values)
    return out


def macro_green_values(ref, eps, flux_triples, points):
    """Single-layer 2-vector of the flux triples at macro points: (m, 2)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty((pts.shape[0], 2))
    for j, triple in enumerate(flux_triples):
        vals = slp_matrix(pts, ref.outer) @ triple.rho_outer.values
        for k in (1, 2):
            q = ref.hole_points_physical(k, eps)
            d = pts[:, None, :] - q[None, :, :]
            r = np.sqrt((d**2).sum(axis=-1))
            vals += (np.log(r) / TWO_PI * ref.holes[k - 1].sigma[None, :]) @ (
                triple.hole(k).values
            )
        out[:, j] = vals
    return out


def micro_green_values(ref, eps, flux_triples, h, xi, phys=None, on_boundary=False):
    """Analytic micro values of both flux single layers: (m, 2).

    The explicitly split log terms are *not* included; callers combine
    them through :func:`micro_log_shift`.  With ``on_boundary`` the
    rescaled targets are the nodes of hole ``h`` itself.
    """
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    if phys is None:
        p = ref.anchors[h - 1]
        phys = eps.eps1 * p[None, :] + eps.product * xi
    dh = ref.holes[h - 1]
    k = 2 if h == 1 else 1
    dk = ref.holes[k - 1]
    gap = ref.anchors[h - 1] - ref.anchors[k - 1]
    d = gap[None, None, :] + eps.eps2 * (xi[:, None, :] - dk.points[None, :, :])
    cross = np.log((d**2).sum(axis=-1)) * 0.5 / TWO_PI * dk.sigma[None, :]
    self_mat = slp_self_matrix(dh) if on_boundary else slp_matrix(xi, dh)
    out = np.empty((xi.shape[0], 2))
    for j, triple in enumerate(flux_triples):
        vals = slp_matrix(phys, ref.outer) @ triple.rho_outer.values
        vals += self_mat @ triple.hole(h).values
        vals += cross @ triple.hole(k).values
        out[:, j] = vals
    return out


def regular_coupling(ref, eps, flux_triples):
    """Boundary averages of the analytic micro values: the regular 2x2 block."""
    R = np.empty((2, 2))
    for j in (1, 2):
        dj = ref.holes[j - 1]
        vals = micro_green_values(
            ref, eps, flux_triples, j, dj.points, on_boundary=True
        )
        for i in (1, 2):
            R[i - 1, j - 1] = dj.integrate(vals[:, i - 1]) / dj.length
    return R


# -- the direct physical-domain path --------------------------------------------


def physical_system(config, eps, n_outer=DEFAULT_NODES, n_hole=None):
    """Boundary system of the perforated physical domain at (eps1, eps2)."""
    holes = [scaled_hole(config, h, eps) for h in (1, 2)]
    return interior_system(config.outer, holes, n_outer, n_hole or n_outer)


def physical_data(config, system):
    """Nodal Dirichlet data on the physical boundary.

    The scaled hole curves inherit the reference parametrization, so the
    rescaled hole data are the same parameter functions.
    """
    return system.sample_data([config.f_outer, config.f_hole1, config.f_hole2])


def direct_solution(config, eps, n_outer=DEFAULT_NODES, n_hole=None):
    """Dense physical-domain Dirichlet solve (the two-path oracle)."""
    system = physical_system(config, eps, n_outer, n_hole)
    g = physical_data(config, system)
    return solve_interior_dirichlet(system, g)


def coupling_from_physical(config, eps, ref, flux_triples, n_outer=None):
    """Coupling matrix re-assembled on the physical perforated boundary.

    Pushes the flux triples forward to the physical kernel densities and
    averages their single layers over the physical hole boundaries; an
    independent route to the same matrix as :func:`log_coupling`.
    """
    from .potentials import slp_boundary_matrix

    system = physical_system(
        config, eps, n_outer or ref.outer.n, ref.holes[0].n
    )
    V = slp_boundary_matrix(system)
    out = np.empty((2, 2))
    for i, triple in enumerate(flux_triples):
        tau = physical_kernel_density(ref, eps, triple, system)
        pot = V @ tau
        for j in (1, 2):
            out[i, j - 1] = system.component_integral(pot, j) / system.discs[j].length
    return out


# -- default evaluation point sets ----------------------------------------------


def default_macro_points(count=10, radii=(2.0, 2.5, 3.0)):
    """Deterministic well-separated points of the macroscopic annulus."""
    pts = []
    k = 0
    while len(pts) < count:
        r = radii[k % len(radii)]
        ang = 2.399963229728653 * k + 0.3         # golden-angle spread
        pts.append([r * np.cos(ang), r * np.sin(ang)])
        k += 1
    return np.array(pts)


def default_micro_points(ref, h, count=6, radius=2.0):
    """Rescaled sample points on the side of hole h facing away from the other.

    Keeping the samples in the half-plane away from the companion hole
    leaves them clear of its near-evaluation band for every parameter
    pair of the admissible rectangle.
    """
    toward = ref.anchors[2 - h] - ref.anchors[h - 1]
    base = np.arctan2(toward[1], toward[0]) + np.pi
    angles = base + np.linspace(-0.45 * np.pi, 0.45 * np.pi, count)
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)

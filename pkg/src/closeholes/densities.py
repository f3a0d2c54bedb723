"""The rescaled integral-equation systems on the reference curves.

Two families of bordered systems are solved here, both posed on the
fixed reference curves so that the unknowns stay bounded while the
physical holes shrink:

* the *flux* systems (adjoint kernel with unit-mass normalizations), whose
  solutions push forward to the unit-mass kernel densities of the
  physical perforated boundary with a 1/|eps1*eps2| scaling on the hole
  components;
* the *trace* system (double-layer densities with zero-mean hole
  blocks), whose solution pushes forward to the double-layer density of
  the physical Dirichlet solve.

The generic assembly below is valid for every admissible parameter pair
including the degenerate axes; the decoupled solvers mirror the limit
systems directly and are used for cross-checks and for the degenerate
evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .geometry import TWO_PI, EpsilonPair
from .linsys import solve_bordered, solve_square
from .potentials import (
    BoundarySystem,
    Density,
    Discretization,
    dlp_matrix,
    op_W,
    op_Wstar,
    w_block,
    wstar_block,
)

DEFAULT_NODES = 128


class ReferenceSystem:
    """Discretizations of the three reference curves plus index bookkeeping."""

    def __init__(self, config, n_outer=DEFAULT_NODES, n_hole=None):
        n_hole = n_hole or n_outer
        self.config = config
        self.outer = Discretization(config.outer, n_outer)
        self.holes = (
            Discretization(config.hole1, n_hole),
            Discretization(config.hole2, n_hole),
        )
        self.anchors = (config.p1, config.p2)
        sizes = [self.outer.n, self.holes[0].n, self.holes[1].n]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)])
        self.total = int(self.offsets[-1])

    def block(self, k):
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))

    def split(self, values):
        v = np.asarray(values)
        return [v[self.block(k)] for k in range(3)]

    def concat(self, parts):
        return np.concatenate([np.asarray(p, dtype=float) for p in parts])

    def data_values(self):
        return (
            self.outer.sample_data(self.config.f_outer),
            self.holes[0].sample_data(self.config.f_hole1),
            self.holes[1].sample_data(self.config.f_hole2),
        )

    def hole_points_physical(self, h, eps):
        """Physical node positions eps1*p_h + eps1*eps2*xi of hole h (1-based)."""
        p = self.anchors[h - 1]
        return eps.eps1 * p[None, :] + eps.product * self.holes[h - 1].points


def _nu_dot_diff_target(tpoints, tnormals, spoints, ssigma, shift=None):
    """Matrix of nu(x) . (x - y + shift) / (2 pi |x - y + shift|^2) sigma_y."""
    d = tpoints[:, None, :] - spoints[None, :, :]
    if shift is not None:
        d = d + shift
    r2 = (d**2).sum(axis=-1)
    ndot = np.einsum("mj,mnj->mn", tnormals, d)
    return ndot / (TWO_PI * r2) * ssigma[None, :]


def _nu_dot_diff_source(tpoints, spoints, snormals, ssigma, shift=None):
    """Matrix of nu(y) . (x - y + shift) / (2 pi |x - y + shift|^2) sigma_y."""
    d = tpoints[:, None, :] - spoints[None, :, :]
    if shift is not None:
        d = d + shift
    r2 = (d**2).sum(axis=-1)
    ndot = np.einsum("mnj,nj->mn", d, snormals)
    return ndot / (TWO_PI * r2) * ssigma[None, :]


# -- flux (adjoint-kernel) systems --------------------------------------------


@dataclass
class FluxTriple:
    """Solution of the i-th flux system at one parameter pair."""

    i: int
    rho_outer: Density
    rho_hole1: Density
    rho_hole2: Density
    eps: EpsilonPair
    border_residual: float = 0.0

    def hole(self, h):
        return self.rho_hole1 if h == 1 else self.rho_hole2

    def blocks(self):
        return (
            self.rho_outer.values,
            self.rho_hole1.values,
            self.rho_hole2.values,
        )

    def masses(self):
        return np.array(
            [self.rho_hole1.integral(), self.rho_hole2.integral()]
        )


def flux_operator_matrix(ref, eps):
    """Generic assembly of the three-curve adjoint operator at (eps1, eps2).

    Valid for every parameter pair: the couplings that the degenerate
    limits kill carry explicit eps factors.
    """
    e1, e2 = eps.eps1, eps.eps2
    n = ref.total
    A = np.zeros((n, n))
    outer = ref.outer
    A[ref.block(0), ref.block(0)] = 0.5 * np.eye(outer.n) + wstar_block(outer, outer)
    for h in (1, 2):
        dh = ref.holes[h - 1]
        q = ref.hole_points_physical(h, eps)
        A[ref.block(0), ref.block(h)] = _nu_dot_diff_target(
            outer.points, outer.normals, q, dh.sigma
        )
        A[ref.block(h), ref.block(h)] = -0.5 * np.eye(dh.n) + wstar_block(dh, dh)
        k = 2 if h == 1 else 1
        dk = ref.holes[k - 1]
        gap = ref.anchors[h - 1] - ref.anchors[k - 1]
        if e2 != 0.0:
            A[ref.block(h), ref.block(k)] = e2 * _nu_dot_diff_target(
                e2 * dh.points, dh.normals, e2 * dk.points, dk.sigma,
                shift=gap[None, None, :],
            )
        if e1 * e2 != 0.0:
            A[ref.block(h), ref.block(0)] = e1 * e2 * _nu_dot_diff_target(
                q, dh.normals, outer.points, outer.sigma
            )
    return A


def _hole_constraints(ref):
    cols = np.zeros((ref.total, 2))
    rows = np.zeros((2, ref.total))
    for h in (1, 2):
        cols[ref.block(h), h - 1] = 1.0
        rows[h - 1, ref.block(h)] = ref.holes[h - 1].sigma
    return cols, rows


def solve_flux(ref, eps, i):
    """Flux triple for hole index i, dispatched on the degeneracy regime."""
    if eps.regime in ("eps2_zero", "both_zero"):
        return _solve_flux_eps2_zero(ref, eps, i)
    return _solve_flux_generic(ref, eps, i)


def _solve_flux_generic(ref, eps, i):
    A = flux_operator_matrix(ref, eps)
    cols, rows = _hole_constraints(ref)
    rhs_c = np.array([1.0 if i == 1 else 0.0, 1.0 if i == 2 else 0.0])
    x, lam = solve_bordered(
        A, cols, rows, np.zeros(ref.total), rhs_c, label=f"flux system {i}"
    )
    ro, r1, r2 = ref.split(x)
    return FluxTriple(
        i,
        Density(ref.outer, ro),
        Density(ref.holes[0], r1),
        Density(ref.holes[1], r2),
        eps,
        border_residual=float(np.abs(lam).max()),
    )


def _solve_flux_eps2_zero(ref, eps, i):
    outer = ref.outer
    A00 = 0.5 * np.eye(outer.n) + wstar_block(outer, outer)
    pole = eps.eps1 * ref.anchors[i - 1]
    d = outer.points - pole[None, :]
    r2 = (d**2).sum(axis=-1)
    datum = -np.einsum("mj,mj->m", outer.normals, d) / (TWO_PI * r2)
    ro = solve_square(A00, datum, label="flux system, outer block")
    hole_vals = []
    for h in (1, 2):
        dh = ref.holes[h - 1]
        Ah = -0.5 * np.eye(dh.n) + wstar_block(dh, dh)
        vals, _ = solve_bordered(
            Ah,
            np.ones((dh.n, 1)),
            dh.sigma.reshape(1, -1),
            np.zeros(dh.n),
            np.array([1.0 if h == i else 0.0]),
            label="flux system, hole block",
        )
        hole_vals.append(vals)
    return FluxTriple(
        i,
        Density(outer, ro),
        Density(ref.holes[0], hole_vals[0]),
        Density(ref.holes[1], hole_vals[1]),
        eps,
    )


def flux_residual(ref, eps, triple):
    """Blockwise residual of the full flux system at an alleged solution."""
    A = flux_operator_matrix(ref, eps)
    x = ref.concat(triple.blocks())
    op = np.abs(A @ x).max()
    masses = triple.masses()
    target = np.array([1.0 if triple.i == 1 else 0.0, 1.0 if triple.i == 2 else 0.0])
    return float(max(op, np.abs(masses - target).max()))


# -- trace (double-layer) system ----------------------------------------------


@dataclass
class TraceTriple:
    """Solution of the trace system at one parameter pair."""

    theta_outer: Density
    theta_hole1: Density
    theta_hole2: Density
    eps: EpsilonPair
    border_residual: float = 0.0

    def hole(self, h):
        return self.theta_hole1 if h == 1 else self.theta_hole2

    def blocks(self):
        return (
            self.theta_outer.values,
            self.theta_hole1.values,
            self.theta_hole2.values,
        )


def data_moments(ref, flux_triples, data=None):
    """Pairings of the boundary data with both flux triples (a 2-vector).

    Entry j is the integral of the outer datum against the outer block of
    triple j plus the hole data against its hole blocks.
    """
    fo, f1, f2 = data if data is not None else ref.data_values()
    out = np.empty(2)
    for j, t in enumerate(flux_triples):
        out[j] = (
            ref.outer.integrate(fo * t.rho_outer.values)
            + ref.holes[0].integrate(f1 * t.rho_hole1.values)
            + ref.holes[1].integrate(f2 * t.rho_hole2.values)
        )
    return out


def trace_operator_matrix(ref, eps):
    """Generic assembly of the three-curve double-layer operator."""
    e1, e2 = eps.eps1, eps.eps2
    A = np.zeros((ref.total, ref.total))
    outer = ref.outer
    A[ref.block(0), ref.block(0)] = 0.5 * np.eye(outer.n) + w_block(outer, outer)
    for h in (1, 2):
        dh = ref.holes[h - 1]
        q = ref.hole_points_physical(h, eps)
        if e1 * e2 != 0.0:
            A[ref.block(0), ref.block(h)] = e1 * e2 * _nu_dot_diff_source(
                outer.points, q, dh.normals, dh.sigma
            )
        A[ref.block(h), ref.block(h)] = -0.5 * np.eye(dh.n) + w_block(dh, dh)
        A[ref.block(h), ref.block(0)] = -dlp_matrix(q, outer)
        k = 2 if h == 1 else 1
        dk = ref.holes[k - 1]
        gap = ref.anchors[h - 1] - ref.anchors[k - 1]
        if e2 != 0.0:
            A[ref.block(h), ref.block(k)] = -e2 * _nu_dot_diff_source(
                e2 * dh.points, e2 * dk.points, dk.normals, dk.sigma,
                shift=gap[None, None, :],
            )
    return A


def trace_orthogonality(ref, flux_triples, psi_blocks):
    """The two pairing functionals that the trace operator's range kills."""
    po, p1, p2 = psi_blocks
    out = np.empty(2)
    for j, t in enumerate(flux_triples):
        out[j] = (
            ref.outer.integrate(po * t.rho_outer.values)
            - ref.holes[0].integrate(p1 * t.rho_hole1.values)
            - ref.holes[1].integrate(p2 * t.rho_hole2.values)
        )
    return out


def solve_trace(ref, eps, flux_triples, data=None, check_orthogonality=True):
    """Trace triple at (eps1, eps2) given both flux triples at the same pair.

    The flux triples feed the constant terms of the hole equations; a
    mismatch (triples solved at a different parameter pair) breaks the
    range condition of the operator and is reported as an error.
    """
    for t in flux_triples:
        if (t.eps.eps1, t.eps.eps2) != (eps.eps1, eps.eps2):
            raise ConsistencyError("flux triples solved at a different parameter pair")
    fo, f1, f2 = data if data is not None else ref.data_values()
    moments = data_moments(ref, flux_triples, (fo, f1, f2))
    if eps.regime in ("eps2_zero", "both_zero"):
        return _solve_trace_eps2_zero(ref, eps, (fo, f1, f2))
    A = trace_operator_matrix(ref, eps)
    if check_orthogonality:
        rng = np.random.default_rng(7)
        probe = rng.standard_normal(ref.total)
        pb = ref.split(probe)
        pb[1] -= ref.holes[0].integrate(pb[1]) / ref.holes[0].length
        pb[2] -= ref.holes[1].integrate(pb[2]) / ref.holes[1].length
        image = ref.split(A @ ref.concat(pb))
        pairing = trace_orthogonality(ref, flux_triples, image)
        scale = max(1.0, float(np.abs(A).max()) * float(np.abs(probe).max()))
        if np.abs(pairing).max() > 1e-8 * scale:
            raise ConsistencyError(
                f"range orthogonality violated: {pairing} (inconsistent flux input)"
            )
    rhs = ref.concat([fo, -f1 + moments[0], -f2 + moments[1]])
    cols, rows = _hole_constraints(ref)
    x, lam = solve_bordered(A, cols, rows, rhs, np.zeros(2), label="trace system")
    to, t1, t2 = ref.split(x)
    return TraceTriple(
        Density(ref.outer, to),
        Density(ref.holes[0], t1),
        Density(ref.holes[1], t2),
        eps,
        border_residual=float(np.abs(lam).max()),
    )


def _solve_trace_eps2_zero(ref, eps, data):
    fo, f1, f2 = data
    outer = ref.outer
    A00 = 0.5 * np.eye(outer.n) + w_block(outer, outer)
    to = solve_square(A00, fo, label="trace system, outer block")
    hole_vals = []
    for h, fh in ((1, f1), (2, f2)):
        dh = ref.holes[h - 1]
        mass_h = _equilibrium_moment(dh, fh)
        Ah = -0.5 * np.eye(dh.n) + w_block(dh, dh)
        vals, _ = solve_bordered(
            Ah,
            np.ones((dh.n, 1)),
            dh.sigma.reshape(1, -1),
            -fh + mass_h,
            np.zeros(1),
            label="trace system, hole block",
        )
        hole_vals.append(vals)
    return TraceTriple(
        Density(outer, to),
        Density(ref.holes[0], hole_vals[0]),
        Density(ref.holes[1], hole_vals[1]),
        eps,
    )


def _equilibrium_moment(disc, f):
    """Integral of f against the unit-mass kernel density of one curve."""
    A = -0.5 * np.eye(disc.n) + wstar_block(disc, disc)
    rho, _ = solve_bordered(
        A,
        np.ones((disc.n, 1)),
        disc.sigma.reshape(1, -1),
        np.zeros(disc.n),
        np.ones(1),
        label="single-curve kernel density",
    )
    return disc.integrate(f * rho)


def trace_residual(ref, eps, flux_triples, triple, data=None):
    """Blockwise residual of the trace system at an alleged solution."""
    fo, f1, f2 = data if data is not None else ref.data_values()
    moments = data_moments(ref, flux_triples, (fo, f1, f2))
    A = trace_operator_matrix(ref, eps)
    rhs = ref.concat([fo, -f1 + moments[0], -f2 + moments[1]])
    x = ref.concat(triple.blocks())
    op = float(np.abs(A @ x - rhs).max())
    means = [
        ref.holes[0].integrate(triple.theta_hole1.values),
        ref.holes[1].integrate(triple.theta_hole2.values),
    ]
    return float(max(op, np.abs(means).max()))


# -- pushforward to the physical boundary --------------------------------------


def physical_kernel_density(ref, eps, triple, phys_system):
    """Nodal values of the physical kernel density carried by a flux triple.

    The hole blocks are scaled by 1/|eps1*eps2|; the outer block maps
    unchanged.  Node layouts must match (same parameters, same counts).
    """
    scale = 1.0 / abs(eps.product)
    return phys_system.concat(
        [
            triple.rho_outer.values,
            scale * triple.rho_hole1.values,
            scale * triple.rho_hole2.values,
        ]
    )


def physical_trace_density(ref, eps, triple, phys_system):
    """Nodal values of the physical double-layer density (no rescaling)."""
    return phys_system.concat(
        [
            triple.theta_outer.values,
            triple.theta_hole1.values,
            triple.theta_hole2.values,
        ]
    )

"""Interior and exterior Dirichlet solvers built on the dense operators.

The interior solver follows the classical two-step construction for a
multiply connected domain: first a basis of unit-mass densities spanning
the kernel of the adjoint operator (the flux basis), then a bordered
second-kind solve for the double-layer density, with the single layers
of the flux basis carrying the part of the solution that constants and
logarithms generate.

Exterior problems are posed in the class of harmonic functions bounded
at infinity.  Boundedness is encoded in the representation (double layer
plus constants plus an explicit log-difference term for the two-curve
case), never by truncating the plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, SolverError
from .geometry import TWO_PI
from .linsys import condition_number, solve_bordered, solve_square
from .potentials import (
    BoundarySystem,
    Discretization,
    dlp_gradient_matrix,
    dlp_matrix,
    fundamental_gradient,
    fundamental_solution,
    op_W,
    op_Wstar,
    slp_boundary_matrix,
    slp_matrix,
    slp_self_matrix,
)

#: residual above this (relative) trips consistency errors in validations
RESIDUAL_TOL = 1e-8


def interior_system(outer_curve, hole_curves, n_outer, n_hole=None):
    """Boundary system of a perforated domain: outer plus flipped holes."""
    n_hole = n_hole or n_outer
    discs = [Discretization(outer_curve, n_outer)]
    discs += [Discretization(c, n_hole, flip_normal=True) for c in hole_curves]
    return BoundarySystem(discs)


def hole_components(system):
    """Indices of components bounding a bounded complementary region."""
    return [k for k, d in enumerate(system.discs) if d.flip]


# -- flux basis ---------------------------------------------------------------


@dataclass
class FluxBasis:
    """Unit-mass kernel densities of the adjoint operator and their averages.

    ``densities[i]`` has unit mass on hole ``i`` and zero mass on every
    other hole; ``averages[i, j]`` is the mean of its single layer over
    hole boundary ``j``.  The averages matrix is invertible whenever the
    geometry is sound.
    """

    system: BoundarySystem
    holes: list
    densities: np.ndarray          # (K, total)
    averages: np.ndarray           # (K, K)
    cond: float
    border_residual: float

    @property
    def k(self):
        return len(self.holes)

    def masses(self):
        """Re-quadrature of the normalization integrals (K x K)."""
        out = np.empty((self.k, self.k))
        for i in range(self.k):
            for j, comp in enumerate(self.holes):
                out[i, j] = self.system.component_integral(self.densities[i], comp)
        return out


def flux_basis(system):
    """Solve the bordered kernel systems for the flux basis densities."""
    holes = hole_components(system)
    k = len(holes)
    if k == 0:
        return FluxBasis(system, [], np.zeros((0, system.total)),
                         np.zeros((0, 0)), 0.0, 0.0)
    A = 0.5 * np.eye(system.total) + op_Wstar(system)
    cols = np.stack([system.component_mask(c) for c in holes], axis=1)
    rows = np.stack(
        [system.component_mask(c) * system.sigma for c in holes], axis=0
    )
    taus = np.empty((k, system.total))
    lam_res = 0.0
    for i in range(k):
        rhs_c = np.zeros(k)
        rhs_c[i] = 1.0
        tau, lam = solve_bordered(
            A, cols, rows, np.zeros(system.total), rhs_c, label="flux basis"
        )
        taus[i] = tau
        lam_res = max(lam_res, float(np.abs(lam).max()))
    resid = float(np.abs(A @ taus.T).max())
    if resid > 1e-6 * max(1.0, float(np.abs(taus).max())):
        raise SolverError(f"tau basis failed: kernel residual {resid:.3g}")
    V = slp_boundary_matrix(system)
    pots = taus @ V.T
    averages = np.empty((k, k))
    for i in range(k):
        for j, comp in enumerate(holes):
            averages[i, j] = (
                system.component_integral(pots[i], comp) / system.discs[comp].length
            )
    return FluxBasis(system, holes, taus, averages,
                     condition_number(averages), lam_res)


# -- harmonic fields ----------------------------------------------------------


class InteriorHarmonic:
    """Harmonic function on a (possibly perforated) bounded domain.

    Represented as an interior double layer plus a combination of the
    flux-basis single layers.
    """

    def __init__(self, system, mu, basis=None, coeffs=None):
        self.system = system
        self.mu = np.asarray(mu, dtype=float)
        self.basis = basis
        self.coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.system.check_far(pts)
        out = np.zeros(pts.shape[0])
        for kk, d in enumerate(self.system.discs):
            out += dlp_matrix(pts, d) @ self.mu[self.system.block(kk)]
        if self.coeffs is not None and self.basis is not None:
            for j in range(self.basis.k):
                tau = self.basis.densities[j]
                for kk, d in enumerate(self.system.discs):
                    out += self.coeffs[j] * (
                        slp_matrix(pts, d) @ tau[self.system.block(kk)]
                    )
        return out

    def __call__(self, points):
        return self.evaluate(points)

    def boundary_values(self):
        trace = (0.5 * np.eye(self.system.total) + op_W(self.system)) @ self.mu
        if self.coeffs is not None and self.basis is not None:
            V = slp_boundary_matrix(self.system)
            trace += (self.coeffs @ self.basis.densities) @ V.T
        return trace


def solve_interior_dirichlet(system, g, basis=None):
    """Dirichlet solve from nodal boundary data on every component.

    ``g`` is the concatenated nodal data.  The bordered system imposes
    zero mean of the double-layer density on each hole boundary; the
    unit-mass flux densities carry the remaining degrees of freedom.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (system.total,):
        raise ValueError("boundary data must cover every component")
    if basis is None:
        basis = flux_basis(system)
    A = 0.5 * np.eye(system.total) + op_W(system)
    if basis.k == 0:
        mu = solve_square(A, g, label="interior Dirichlet")
        return InteriorHarmonic(system, mu)
    weights = basis.densities @ (system.sigma * g)      # integrals of g * tau_i
    rhs = g.copy()
    for i, comp in enumerate(basis.holes):
        rhs -= weights[i] * system.component_mask(comp)
    cols = np.stack([system.component_mask(c) for c in basis.holes], axis=1)
    rows = np.stack(
        [system.component_mask(c) * system.sigma for c in basis.holes], axis=0
    )
    mu, _ = solve_bordered(A, cols, rows, rhs, np.zeros(basis.k),
                           label="interior Dirichlet")
    coeffs = np.linalg.solve(basis.averages.T, weights)
    return InteriorHarmonic(system, mu, basis, coeffs)


class ExteriorHarmonic:
    """Bounded harmonic function outside one closed curve: w[mu] + const."""

    def __init__(self, disc, mu, constant):
        self.disc = disc
        self.mu = np.asarray(mu, dtype=float)
        self.constant = float(constant)

    @property
    def limit_at_infinity(self):
        return self.constant

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.disc.check_far(pts)
        return dlp_matrix(pts, self.disc) @ self.mu + self.constant

    def __call__(self, points):
        return self.evaluate(points)


def solve_exterior_single(disc, f):
    """Bounded exterior Dirichlet solve outside a single closed curve."""
    f = np.asarray(f, dtype=float)
    A = -0.5 * np.eye(disc.n) + op_W(BoundarySystem([disc]))
    cols = np.ones((disc.n, 1))
    rows = disc.sigma.reshape(1, -1)
    mu, lam = solve_bordered(A, cols, rows, f, np.zeros(1),
                             label="exterior Dirichlet")
    # the border unknown is the additive constant itself
    return ExteriorHarmonic(disc, mu, lam[0])


class PairExteriorHarmonic:
    """Bounded harmonic function outside two disjoint closed curves.

    Completed double-layer representation: w[mu] plus the mass of mu on
    the first curve plus a log-difference term carrying the flux.  The
    limit at infinity and the boundary fluxes are exact functionals of
    the density masses.
    """

    def __init__(self, system, p1, p2, mu):
        self.system = system
        self.p1 = np.asarray(p1, dtype=float)
        self.p2 = np.asarray(p2, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.mass1 = system.component_integral(mu, 0)
        self.mass2 = system.component_integral(mu, 1)

    @property
    def limit_at_infinity(self):
        return self.mass1

    @property
    def flux1(self):
        """Outward flux through the first hole boundary."""
        return self.mass2

    @property
    def flux2(self):
        return -self.mass2

    def flux(self, h):
        return self.flux1 if h == 1 else self.flux2

    def _log_diff(self, pts):
        return fundamental_solution(pts - self.p1) - fundamental_solution(
            pts - self.p2
        )

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.system.check_far(pts)
        out = np.full(pts.shape[0], self.mass1)
        out += self._log_diff(pts) * self.mass2
        for kk, d in enumerate(self.system.discs):
            out += dlp_matrix(pts, d) @ self.mu[self.system.block(kk)]
        return out

    def __call__(self, points):
        return self.evaluate(points)

    def gradient(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        self.system.check_far(pts)
        out = (
            fundamental_gradient(pts - self.p1)
            - fundamental_gradient(pts - self.p2)
        ) * self.mass2
        for kk, d in enumerate(self.system.discs):
            out += np.einsum(
                "mcn,n->mc",
                dlp_gradient_matrix(pts, d),
                self.mu[self.system.block(kk)],
            )
        return out


def solve_exterior_pair(system, p1, p2, f):
    """Bounded exterior Dirichlet solve outside two disjoint curves.

    ``p1`` and ``p2`` must lie inside the first and second component.
    The completed operator is an isomorphism; a singular matrix here
    signals broken inputs and raises.
    """
    if len(system.discs) != 2:
        raise ValueError("pair solve needs exactly two boundary components")
    f = np.asarray(f, dtype=float)
    pts = np.concatenate([d.points for d in system.discs], axis=0)
    A = -0.5 * np.eye(system.total) + op_W(system)
    sig1 = system.component_mask(0) * system.sigma
    sig2 = system.component_mask(1) * system.sigma
    log_diff = fundamental_solution(pts - np.asarray(p1)) - fundamental_solution(
        pts - np.asarray(p2)
    )
    A += np.outer(np.ones(system.total), sig1)
    A += np.outer(log_diff, sig2)
    mu = solve_square(A, f, label="completed pair operator")
    return PairExteriorHarmonic(system, p1, p2, mu)


# -- correctors and the Green function ---------------------------------------


def corrector_interior(outer_disc, x):
    """Interior harmonic matching the log-kernel data y -> S(x - y)."""
    x = np.asarray(x, dtype=float)
    if not outer_disc.curve.contains(x):
        raise ValueError("corrector pole must lie inside the outer curve")
    system = BoundarySystem([outer_disc])
    data = fundamental_solution(x[None, :] - outer_disc.points)
    return solve_interior_dirichlet(system, data)


def green_function(outer_disc, x, y):
    """Dirichlet Green function of the outer region at a single pair."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.allclose(x, y):
        raise ValueError("Green function requires distinct points")
    h = corrector_interior(outer_disc, x)
    return float(fundamental_solution(x - y) - h.evaluate(y[None, :])[0])


def green_values(outer_disc, pole, points):
    """G(x, pole) for many x with a single corrector solve (uses symmetry)."""
    pole = np.asarray(pole, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    h = corrector_interior(outer_disc, pole)
    return fundamental_solution(pts - pole[None, :]) - h.evaluate(pts)


def corrector_exterior(disc, x):
    """Bounded exterior harmonic matching y -> S(x - y) on one curve."""
    x = np.asarray(x, dtype=float)
    data = fundamental_solution(x[None, :] - disc.points)
    return solve_exterior_single(disc, data)


def corrector_exterior_limit(disc, x):
    return corrector_exterior(disc, x).limit_at_infinity


# -- the two-hole exterior geometry -------------------------------------------


def tilde_system(config, eps2, n):
    """Boundary system of the pair of curves p_i + eps2 * hole_i."""
    from .geometry import tilde_domain

    a, b = tilde_domain(config, eps2)
    return BoundarySystem([Discretization(a, n), Discretization(b, n)])


def tilde_solution(config, eps2, n):
    """Bounded exterior solution with the rescaled hole data on both curves."""
    system = tilde_system(config, eps2, n)
    f = system.sample_data([config.f_hole1, config.f_hole2])
    return solve_exterior_pair(system, config.p1, config.p2, f)


def pair_flux_correction(config, eps2, n, tilde_sol, corrector_matrix):
    """Bounded exterior field with piecewise-constant flux-coupling data.

    On curve i the datum is (H[i, j] - H[i, i]) * flux_j of the given
    exterior solution, j being the other index.
    """
    H = np.asarray(corrector_matrix, dtype=float)
    system = tilde_sol.system
    c1 = (H[0, 1] - H[0, 0]) * tilde_sol.flux(2)
    c2 = (H[1, 0] - H[1, 1]) * tilde_sol.flux(1)
    f = system.concat(
        [np.full(system.discs[0].n, c1), np.full(system.discs[1].n, c2)]
    )
    return solve_exterior_pair(system, config.p1, config.p2, f)


def pair_corrector_pullback(hole_discs, anchors, eps2, rho_blocks, i, zeta):
    """Single layer of the pushed-forward flux density on the pair geometry.

    Evaluates at the points ``anchors[i] + eps2 * zeta`` entirely through
    reference-curve quadratures, so the value stays stable for small eps2.
    ``rho_blocks[h]`` holds the density values on reference hole h+1.
    """
    zeta = np.asarray(zeta, dtype=float).reshape(-1, 2)
    d_i = hole_discs[i]
    d_k = hole_discs[1 - i]
    mass_i = d_i.integrate(rho_blocks[i])
    out = slp_matrix(zeta, d_i) @ rho_blocks[i]
    out += np.log(abs(eps2)) / TWO_PI * mass_i
    gap = anchors[i] - anchors[1 - i]
    shifted = gap[None, :] + eps2 * (zeta[:, None, :] - d_k.points[None, :, :])
    r = np.linalg.norm(shifted, axis=-1)
    out += (np.log(r) / TWO_PI * d_k.sigma[None, :]) @ rho_blocks[1 - i]
    return out


def corrector_pair_constants(hole_discs, anchors, eps2, rho, validate=True):
    """2x2 matrix H[j, i] of pair-corrector constants at the anchors.

    ``rho[j]`` is the pair of reference-hole density blocks of the j-th
    unit-mass solution of the two-curve kernel system at distance scale
    eps2.  When ``validate`` is set, the densities are pushed onto the
    physical pair geometry and checked against their defining system.
    """
    if validate:
        _validate_pair_kernel(hole_discs, anchors, eps2, rho)
    H = np.empty((2, 2))
    origin = np.zeros((1, 2))
    for j in range(2):
        for i in range(2):
            H[j, i] = pair_corrector_pullback(
                hole_discs, anchors, eps2, rho[j], i, origin
            )[0]
    return H


def _validate_pair_kernel(hole_discs, anchors, eps2, rho):
    scaled = [
        Discretization(
            d.curve.affine(shift=anchors[i], factor=eps2), d.n
        )
        for i, d in enumerate(hole_discs)
    ]
    system = BoundarySystem(scaled)
    A = -0.5 * np.eye(system.total) + op_Wstar(system)
    for j in range(2):
        tilde = system.concat([b / abs(eps2) for b in rho[j]])
        scale = max(1.0, float(np.abs(tilde).max()))
        resid = float(np.abs(A @ tilde).max()) / scale
        if resid > 100 * RESIDUAL_TOL:
            raise ConsistencyError(
                f"pair kernel density {j + 1} fails its system: residual {resid:.3g}"
            )
        for i in range(2):
            mass = system.component_integral(tilde, i)
            if abs(mass - (1.0 if i == j else 0.0)) > 1e-8:
                raise ConsistencyError(
                    f"pair kernel density {j + 1}: mass on hole {i + 1} is {mass}"
                )

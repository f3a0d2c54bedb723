"""Closed forms of the representation ingredients on the parameter axes.

Each quantity assembled generically in :mod:`structure` has a limit
expression at ``eps2 = 0`` (holes shrinking onto two separate points) and
at ``eps1 = 0`` (the two-hole cluster collapsing to the origin at fixed
relative scale), written entirely in terms of a handful of canonical
harmonic problems: the unperturbed solve, bounded exterior solves, and
the correctors with log-kernel boundary data.  The validation suite
evaluates both routes and compares them at and near the axes.
"""

from __future__ import annotations

import numpy as np

from .densities import ReferenceSystem, solve_flux
from .dirichlet import (
    corrector_exterior,
    corrector_interior,
    corrector_pair_constants,
    pair_flux_correction,
    solve_exterior_pair,
    solve_exterior_single,
    tilde_solution,
    tilde_system,
)
from .geometry import TWO_PI, EpsilonPair
from .linsys import solve_square
from .potentials import Discretization, dlp_matrix, fundamental_solution, w_block


def background_harmonic(config, n):
    """The unperturbed interior solution on the outer region alone."""
    from .dirichlet import InteriorHarmonic
    from .potentials import BoundarySystem

    disc = Discretization(config.outer, n)
    mu = solve_square(
        0.5 * np.eye(n) + w_block(disc, disc),
        disc.sample_data(config.f_outer),
        label="background solve",
    )
    return InteriorHarmonic(BoundarySystem([disc]), mu)


def exterior_hole_solution(config, h, n):
    """Bounded exterior solve outside reference hole h with its datum."""
    disc = Discretization(config.hole(h), n)
    return solve_exterior_single(disc, disc.sample_data(config.hole_data(h)))


def corrector_matrix(config, eps2, n, validate=True):
    """The 2x2 matrix of pair-corrector constants at the anchors.

    Built from the cluster-at-fixed-scale flux triples through the
    stable reference-curve pullback.
    """
    ref = ReferenceSystem(config, n)
    eps = EpsilonPair(0.0, eps2)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    rho = [
        (t.rho_hole1.values, t.rho_hole2.values) for t in triples
    ]
    return corrector_pair_constants(
        ref.holes, ref.anchors, eps2, rho, validate=validate
    )


# -- moments ------------------------------------------------------------------


def moments_eps2_zero(config, eps1, n):
    """Data moments at eps2 = 0: -background(anchor) + exterior limit."""
    u0 = background_harmonic(config, n)
    out = np.empty(2)
    for j in (1, 2):
        pole = eps1 * config.anchor(j)
        uh = exterior_hole_solution(config, j, n)
        out[j - 1] = -u0.evaluate(pole[None, :])[0] + uh.limit_at_infinity
    return out


def moments_eps1_zero(config, eps2, n, corrector=None):
    """Data moments at eps1 = 0, with the flux-coupled corrector term."""
    u0 = background_harmonic(config, n)
    u00 = u0.evaluate(np.zeros((1, 2)))[0]
    tilde = tilde_solution(config, eps2, n)
    H = corrector_matrix(config, eps2, n) if corrector is None else corrector
    out = np.empty(2)
    for j in (1, 2):
        # (H[j,k] - H[j,h]) * flux_k is the same for either choice of h
        out[j - 1] = (
            -u00
            + tilde.limit_at_infinity
            + (H[j - 1, 1] - H[j - 1, 0]) * tilde.flux(2)
        )
    return out


# -- regular coupling part ------------------------------------------------------


def regular_eps2_zero(config, eps1, n):
    """Regular matrix at eps2 = 0 via interior/exterior correctors."""
    out = np.empty((2, 2))
    outer = Discretization(config.outer, n)
    ext_limits = []
    for i in (1, 2):
        disc = Discretization(config.hole(i), n)
        ext_limits.append(
            corrector_exterior(disc, np.zeros(2)).limit_at_infinity
        )
    for j in (1, 2):
        h = corrector_interior(outer, eps1 * config.anchor(j))
        for i in (1, 2):
            val = -h.evaluate((eps1 * config.anchor(i))[None, :])[0]
            if i == j:
                val += ext_limits[i - 1]
            else:
                val += fundamental_solution(config.anchor(i) - config.anchor(j))
            out[i - 1, j - 1] = val
    return out


def regular_eps1_zero(config, eps2, n, corrector=None):
    """Regular matrix at eps1 = 0 from the pair-corrector constants."""
    outer = Discretization(config.outer, n)
    h0 = corrector_interior(outer, np.zeros(2))
    h00 = h0.evaluate(np.zeros((1, 2)))[0]
    H = corrector_matrix(config, eps2, n) if corrector is None else corrector
    log_term = np.log(abs(eps2)) / TWO_PI
    return -h00 + H - log_term * np.eye(2)


# -- smooth micro limits ---------------------------------------------------------


def smooth_micro_eps2_zero(config, eps1, h, xi, n):
    """Micro smooth field at eps2 = 0: background + exterior correction."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    u0 = background_harmonic(config, n)
    uh = exterior_hole_solution(config, h, n)
    anchor_val = u0.evaluate((eps1 * config.anchor(h))[None, :])[0]
    return anchor_val + uh.evaluate(xi) - uh.limit_at_infinity


def smooth_micro_eps1_zero(config, eps2, h, xi, n, corrector=None):
    """Micro smooth field at eps1 = 0: pair solution plus flux correction."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    u0 = background_harmonic(config, n)
    u00 = u0.evaluate(np.zeros((1, 2)))[0]
    tilde = tilde_solution(config, eps2, n)
    H = corrector_matrix(config, eps2, n) if corrector is None else corrector
    wt = pair_flux_correction(config, eps2, n, tilde, H)
    y = config.anchor(h)[None, :] + eps2 * xi
    return u00 + tilde.evaluate(y) + wt.evaluate(y) - tilde.limit_at_infinity


# -- green vector limits ----------------------------------------------------------


def green_vector_macro_eps2_zero(config, eps1, points, n):
    """Macro green vector at eps2 = 0: the Green function at the anchors."""
    from .dirichlet import green_values

    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    outer = Discretization(config.outer, n)
    out = np.empty((pts.shape[0], 2))
    for j in (1, 2):
        out[:, j - 1] = green_values(outer, eps1 * config.anchor(j), pts)
    return out


def green_vector_macro_eps1_zero(config, points, n):
    """Macro green vector at eps1 = 0: both entries G(., origin)."""
    from .dirichlet import green_values

    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    outer = Discretization(config.outer, n)
    g = green_values(outer, np.zeros(2), pts)
    return np.stack([g, g], axis=-1)


def green_vector_micro_eps2_zero(config, eps1, h, xi, n):
    """Analytic micro green vector at eps2 = 0 (logs excluded)."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    outer = Discretization(config.outer, n)
    hole = Discretization(config.hole(h), n)
    k = 2 if h == 1 else 1
    hcorr = corrector_interior(outer, eps1 * config.anchor(h))
    out = np.empty((xi.shape[0], 2))
    for j in (1, 2):
        base = -hcorr.evaluate((eps1 * config.anchor(j))[None, :])[0]
        vals = np.full(xi.shape[0], base)
        if j == h:
            vals += np.array(
                [corrector_exterior(hole, q).limit_at_infinity for q in xi]
            )
        else:
            vals += fundamental_solution(config.anchor(h) - config.anchor(k))
        out[:, j - 1] = vals
    return out


def green_vector_micro_eps1_zero(config, eps2, h, xi, n, corrector=None):
    """Analytic micro green vector at eps1 = 0 (the eps2 log excluded too)."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    outer = Discretization(config.outer, n)
    h0 = corrector_interior(outer, np.zeros(2))
    h00 = h0.evaluate(np.zeros((1, 2)))[0]
    H = corrector_matrix(config, eps2, n) if corrector is None else corrector
    system = tilde_system(config, eps2, n)
    k = 2 if h == 1 else 1
    log_term = np.log(abs(eps2)) / TWO_PI
    out = np.empty((xi.shape[0], 2))
    for m, z in enumerate(xi):
        x = config.anchor(h) + eps2 * z
        data = fundamental_solution(
            x[None, :]
            - np.concatenate([d.points for d in system.discs], axis=0)
        )
        hx = solve_exterior_pair(system, config.p1, config.p2, data)
        for j in (1, 2):
            out[m, j - 1] = (
                -h00
                + hx.limit_at_infinity
                + (H[j - 1, k - 1] - H[j - 1, h - 1]) * hx.flux(k)
                - (log_term if j == h else 0.0)
            )
    return out

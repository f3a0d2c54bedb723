import numpy as np
import pytest

from closeholes.densities import ReferenceSystem, solve_flux
from closeholes.dirichlet import (
    corrector_exterior,
    corrector_interior,
    corrector_pair_constants,
    flux_basis,
    green_function,
    green_values,
    interior_system,
    pair_corrector_pullback,
    solve_exterior_pair,
    solve_exterior_single,
    solve_interior_dirichlet,
    tilde_solution,
    tilde_system,
)
from closeholes.errors import ConsistencyError
from closeholes.geometry import EpsilonPair, TWO_PI, circle
from closeholes.potentials import BoundarySystem, Discretization
from closeholes.structure import physical_data, physical_system

from oracles import annulus_harmonic, disk_corrector, disk_green, fd_flux_on_circle


# -- flux basis ---------------------------------------------------------------


def test_flux_basis_annulus_radial_oracle():
    system = interior_system(circle(1.0), [circle(0.5)], 128)
    fb = flux_basis(system)
    assert fb.k == 1
    # unit mass on the inner boundary, compensating mass outside
    assert abs(fb.masses()[0, 0] - 1.0) < 1e-12
    tau = fb.densities[0]
    assert np.abs(tau[:128] + 1.0 / TWO_PI).max() < 1e-12      # outer, uniform
    assert np.abs(tau[128:] - 1.0 / np.pi).max() < 1e-12       # inner, uniform
    # single-layer average over the inner circle: log(r/R)/2pi
    assert abs(fb.averages[0, 0] - np.log(0.5) / TWO_PI) < 1e-12


def test_flux_basis_physical_twin(twin_config):
    eps = twin_config.epsilon(0.3, 0.5)
    system = physical_system(twin_config, eps, 128)
    fb = flux_basis(system)
    assert fb.k == 2
    # normalization matrix equals the identity under re-quadrature
    assert np.abs(fb.masses() - np.eye(2)).max() < 1e-10
    # the single layer of each basis density is constant per hole boundary
    from closeholes.potentials import slp_boundary_matrix

    V = slp_boundary_matrix(system)
    for i in range(2):
        pot = V @ fb.densities[i]
        for comp in (1, 2):
            vals = pot[system.block(comp)]
            assert vals.max() - vals.min() < 1e-8


# -- interior Dirichlet solves ---------------------------------------------------


def test_interior_annulus_radial_solution():
    system = interior_system(circle(1.0), [circle(0.25)], 128)
    g = np.concatenate([np.zeros(128), np.ones(128)])
    sol = solve_interior_dirichlet(system, g)
    for r in (0.4, 0.6, 0.75):
        val = sol.evaluate([[r, 0.0]])[0]
        assert abs(val - annulus_harmonic(r, 0.25)) < 1e-8


def test_interior_disk_harmonic_polynomial(rng):
    disc = Discretization(circle(1.0), 128)
    system = BoundarySystem([disc])
    sol = solve_interior_dirichlet(system, disc.points[:, 0])
    pts = 0.55 * (rng.random((10, 2)) - 0.5)
    assert np.abs(sol.evaluate(pts) - pts[:, 0]).max() < 1e-12


def test_interior_constants_on_perforated_domain(twin_config):
    eps = twin_config.epsilon(0.3, 0.5)
    system = physical_system(twin_config, eps, 128)
    sol = solve_interior_dirichlet(system, np.ones(system.total))
    pts = np.array([[2.0, 0.5], [-1.5, 1.0], [0.0, -2.0]])
    assert np.abs(sol.evaluate(pts) - 1.0).max() < 1e-9


def test_interior_solve_linearity(twin_config, rng):
    eps = twin_config.epsilon(0.3, 0.5)
    system = physical_system(twin_config, eps, 128)
    basis = flux_basis(system)
    g1 = rng.standard_normal(system.total)
    g2 = rng.standard_normal(system.total)
    pts = np.array([[2.2, 0.3], [-0.1, 2.4]])
    a = solve_interior_dirichlet(system, g1, basis).evaluate(pts)
    b = solve_interior_dirichlet(system, g2, basis).evaluate(pts)
    ab = solve_interior_dirichlet(system, g1 + g2, basis).evaluate(pts)
    assert np.abs(ab - a - b).max() < 1e-10


def test_interior_maximum_principle(twin_config, rng):
    eps = twin_config.epsilon(0.2, 0.4)
    system = physical_system(twin_config, eps, 128)
    coeffs = rng.standard_normal(3)
    g = np.concatenate(
        [coeffs[0] + coeffs[1] * np.cos(d.s) + coeffs[2] * np.sin(2 * d.s)
         for d in system.discs]
    )
    sol = solve_interior_dirichlet(system, g)
    pts = np.array([[2.0, 1.0], [-2.5, 0.2], [0.5, -2.2], [2.8, 0.4]])
    vals = sol.evaluate(pts)
    assert vals.min() >= g.min() - 1e-10
    assert vals.max() <= g.max() + 1e-10


def test_interior_boundary_trace_reproduces_data(twin_config, rng):
    eps = twin_config.epsilon(0.3, 0.5)
    system = physical_system(twin_config, eps, 128)
    g = physical_data(twin_config, system)
    sol = solve_interior_dirichlet(system, g)
    assert np.abs(sol.boundary_values() - g).max() < 1e-9


# -- exterior solves --------------------------------------------------------------


def test_exterior_single_constant():
    d = Discretization(circle(1.0), 64)
    sol = solve_exterior_single(d, np.ones(64))
    assert abs(sol.limit_at_infinity - 1.0) < 1e-12
    assert abs(sol.evaluate([[5.0, 1.0]])[0] - 1.0) < 1e-12


def test_exterior_single_cosine_mode():
    d = Discretization(circle(1.0), 128)
    sol = solve_exterior_single(d, np.cos(d.s))
    assert abs(sol.limit_at_infinity) < 1e-12
    assert abs(sol.evaluate([[3.0, 0.0]])[0] - 1.0 / 3.0) < 1e-12


def test_exterior_single_log_datum_constant():
    r = 0.6
    d = Discretization(circle(r), 64)
    sol = solve_exterior_single(d, np.full(64, np.log(r) / TWO_PI))
    assert abs(sol.limit_at_infinity - np.log(r) / TWO_PI) < 1e-12
    assert abs(sol.evaluate([[4.0, 0.0]])[0] - np.log(r) / TWO_PI) < 1e-12


def test_exterior_pair_constants(twin_config):
    pair = tilde_solution(
        twin_config.with_data(
            f_hole1=lambda s: np.ones_like(s), f_hole2=lambda s: np.ones_like(s)
        ),
        0.5,
        128,
    )
    assert abs(pair.limit_at_infinity - 1.0) < 1e-12
    assert abs(pair.flux1) < 1e-10 and abs(pair.flux2) < 1e-10
    assert abs(pair.evaluate([[0.0, 3.0]])[0] - 1.0) < 1e-12


def test_exterior_pair_flux_antisymmetry(twin_config, rng):
    system = tilde_system(twin_config, 0.5, 128)
    f = rng.standard_normal(system.total)
    pair = solve_exterior_pair(system, twin_config.p1, twin_config.p2, f)
    # representation fluxes against an independent finite-difference
    # quadrature over offset circles around each hole
    flux1_fd = fd_flux_on_circle(pair, twin_config.p1, 0.75)
    flux2_fd = fd_flux_on_circle(pair, twin_config.p2, 0.75)
    assert abs(pair.flux1 - flux1_fd) < 1e-7
    assert abs(pair.flux2 - flux2_fd) < 1e-7
    assert abs(flux1_fd + flux2_fd) < 1e-8


def test_exterior_pair_symmetric_data_zero_flux(sym_config):
    pair = tilde_solution(sym_config, 0.5, 128)
    assert abs(pair.flux1) < 1e-7


def test_exterior_pair_duality_identity(twin_config, rng):
    # pairing a bounded exterior harmonic with the pair kernel densities
    # recovers its limit plus the corrector-weighted flux
    eps2 = 0.5
    ref = ReferenceSystem(twin_config, 128)
    eps = EpsilonPair(0.0, eps2)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    rho = [(t.rho_hole1.values, t.rho_hole2.values) for t in triples]
    H = corrector_pair_constants(ref.holes, ref.anchors, eps2, rho)
    system = tilde_system(twin_config, eps2, 128)
    f = rng.standard_normal(system.total)
    u = solve_exterior_pair(system, twin_config.p1, twin_config.p2, f)
    trace = u.mu * 0.0
    from closeholes.potentials import op_W

    trace = (-0.5 * np.eye(system.total) + op_W(system)) @ u.mu
    trace += u.mass1 + (
        np.log(np.linalg.norm(
            np.concatenate([d.points for d in system.discs]) - twin_config.p1, axis=1
        )) / TWO_PI
        - np.log(np.linalg.norm(
            np.concatenate([d.points for d in system.discs]) - twin_config.p2, axis=1
        )) / TWO_PI
    ) * u.mass2
    for j in (1, 2):
        tilde_rho = system.concat(
            [rho[j - 1][0] / eps2, rho[j - 1][1] / eps2]
        )
        pairing = float((system.sigma * tilde_rho) @ trace)
        expected = u.limit_at_infinity + (H[j - 1, 1] - H[j - 1, 0]) * u.flux(2)
        assert abs(pairing - expected) < 1e-7


# -- correctors and the Green function ---------------------------------------------


def test_interior_corrector_disk_image_formula():
    d = Discretization(circle(1.0), 128)
    x = np.array([0.5, 0.0])
    h = corrector_interior(d, x)
    assert abs(h.evaluate([[0.0, 0.0]])[0] - disk_corrector(x, np.zeros(2))) < 1e-12
    ys = np.array([[0.2, 0.1], [-0.3, 0.25], [0.1, -0.4]])
    for y in ys:
        assert abs(h.evaluate([y])[0] - disk_corrector(x, y)) < 1e-12


def test_interior_corrector_small_pole_limit():
    d = Discretization(circle(1.0), 128)
    ys = np.array([[0.2, 0.1], [-0.3, 0.25]])
    for xmag in (1e-3, 1e-5):
        h = corrector_interior(d, np.array([xmag, 0.0]))
        assert np.abs(h.evaluate(ys)).max() < 2 * xmag


def test_interior_corrector_trace():
    d = Discretization(circle(4.0), 128)
    x = np.array([1.0, 0.7])
    h = corrector_interior(d, x)
    data = np.log(np.linalg.norm(x[None, :] - d.points, axis=1)) / TWO_PI
    assert np.abs(h.boundary_values() - data).max() < 1e-9


def test_green_function_disk_values_and_symmetry(rng):
    d = Discretization(circle(1.0), 128)
    x = np.array([0.5, 0.0])
    assert abs(green_function(d, x, np.zeros(2)) + np.log(2.0) / TWO_PI) < 1e-12
    assert abs(green_function(d, x, np.zeros(2)) - disk_green(x, np.zeros(2))) < 1e-12
    douter = Discretization(circle(4.0), 128)
    for _ in range(10):
        x, y = 2.8 * (rng.random((2, 2)) - 0.5)
        if np.linalg.norm(x - y) < 0.5:
            continue
        assert abs(green_function(douter, x, y) - green_function(douter, y, x)) < 1e-7
        assert green_function(douter, x, y) < 0.0


def test_green_values_batch_matches_single():
    d = Discretization(circle(4.0), 128)
    pts = np.array([[2.0, 0.0], [0.0, 3.0], [-1.5, -1.5]])
    batch = green_values(d, np.zeros(2), pts)
    singles = [green_function(d, p, np.zeros(2)) for p in pts]
    assert np.abs(batch - singles).max() < 1e-12


def test_exterior_corrector_limit_independent_of_interior_pole():
    d = Discretization(circle(1.0), 128)
    poles = np.array([[0.0, 0.0], [0.2, 0.1], [-0.3, 0.2], [0.1, 0.3], [0.25, -0.2]])
    limits = [corrector_exterior(d, x).limit_at_infinity for x in poles]
    assert np.ptp(limits) < 1e-8
    assert abs(limits[0]) < 1e-12          # unit disk: log-capacity zero


def test_pair_corrector_constants(sym_config, twin_config):
    ref = ReferenceSystem(sym_config, 128)
    eps = EpsilonPair(0.0, 0.5)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    rho = [(t.rho_hole1.values, t.rho_hole2.values) for t in triples]
    H = corrector_pair_constants(ref.holes, ref.anchors, 0.5, rho)
    # symmetric pair: equal off-diagonal constants
    assert abs(H[1, 0] - H[0, 1]) < 1e-8
    # the single layer is constant throughout each hole interior
    zetas = np.array([[0.0, 0.0], [0.15, 0.1], [-0.1, -0.12]])
    for j in (1, 2):
        for i in (1, 2):
            vals = pair_corrector_pullback(
                ref.holes, ref.anchors, 0.5, rho[j - 1], i - 1, zetas
            )
            assert np.ptp(vals) < 1e-8
            assert abs(vals[0] - H[j - 1, i - 1]) < 1e-8
    # validation rejects densities from a different scale
    with pytest.raises(ConsistencyError):
        corrector_pair_constants(ref.holes, ref.anchors, 0.3, rho)


def test_alternating_corrector_constant_margin(twin_config):
    from closeholes.asymptotics import corner_constants

    alt, mixed, H = corner_constants(twin_config, 0.5, 128)
    assert abs(alt) > 1e-3
    alt2, _, _ = corner_constants(twin_config, 0.5, 256)
    assert abs(alt - alt2) / abs(alt) < 1e-4

import numpy as np
import pytest

from closeholes.densities import (
    ReferenceSystem,
    data_moments,
    flux_operator_matrix,
    physical_kernel_density,
    solve_flux,
    solve_trace,
    trace_operator_matrix,
    trace_orthogonality,
    trace_residual,
    _hole_constraints,
)
from closeholes.errors import ConsistencyError
from closeholes.fixtures import fix_twin
from closeholes.geometry import EpsilonPair, TWO_PI, TrigPoly
from closeholes.linsys import solve_bordered
from closeholes.potentials import op_Wstar
from closeholes.structure import physical_system


def _blockwise_diff(ref, a, b):
    return max(
        np.abs(x - y).max()
        for x, y in zip(ref.split(ref.concat(a.blocks())), ref.split(ref.concat(b.blocks())))
    )


# -- flux systems -----------------------------------------------------------------


def test_flux_cross_regime_consistency(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    for i in (1, 2):
        near = solve_flux(ref, EpsilonPair(1e-4, 0.5), i)
        limit = solve_flux(ref, EpsilonPair(0.0, 0.5), i)
        assert _blockwise_diff(ref, near, limit) < 1e-3


def test_flux_eps2_zero_unit_disks(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    for i in (1, 2):
        triple = solve_flux(ref, EpsilonPair(0.3, 0.0), i)
        own = triple.hole(i).values
        other = triple.hole(3 - i).values
        # rotation-invariant kernel density with unit mass on a circle
        assert np.abs(own - 1.0 / TWO_PI).max() < 1e-12
        assert np.abs(other).max() < 1e-12


def test_flux_generic_assembly_matches_decoupled_path(twin_config):
    ref = ReferenceSystem(twin_config, 96)
    eps = EpsilonPair(0.3, 0.0)
    for i in (1, 2):
        direct = solve_flux(ref, eps, i)                 # decoupled dispatch
        A = flux_operator_matrix(ref, eps)               # generic assembly
        cols, rows = _hole_constraints(ref)
        rhs_c = np.array([float(i == 1), float(i == 2)])
        x, _ = solve_bordered(A, cols, rows, np.zeros(ref.total), rhs_c)
        assert np.abs(x - ref.concat(direct.blocks())).max() < 1e-10


def test_flux_masses_by_requadrature(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    for eps in (EpsilonPair(0.3, 0.5), EpsilonPair(0.0, 0.5), EpsilonPair(0.3, 0.0)):
        for i in (1, 2):
            triple = solve_flux(ref, eps, i)
            target = np.array([float(i == 1), float(i == 2)])
            assert np.abs(triple.masses() - target).max() < 1e-10


def test_flux_pushforward_satisfies_physical_system(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    eps = twin_config.epsilon(0.3, 0.5)
    system = physical_system(twin_config, eps, 128)
    A_phys = 0.5 * np.eye(system.total) + op_Wstar(system)
    for i in (1, 2):
        triple = solve_flux(ref, eps, i)
        tau = physical_kernel_density(ref, eps, triple, system)
        resid = np.abs(A_phys @ tau).max() / max(1.0, np.abs(tau).max())
        assert resid < 1e-7
        for j in (1, 2):
            mass = system.component_integral(tau, j)
            assert abs(mass - float(i == j)) < 1e-8


def test_flux_uniqueness_under_row_scaling(twin_config, rng):
    ref = ReferenceSystem(twin_config, 96)
    eps = EpsilonPair(0.3, 0.5)
    base = solve_flux(ref, eps, 1)
    A = flux_operator_matrix(ref, eps)
    cols, rows = _hole_constraints(ref)
    scale = 0.5 + rng.random(ref.total)
    x, _ = solve_bordered(
        A * scale[:, None] * 0 + (scale[:, None] * A),
        scale[:, None] * cols,
        rows,
        np.zeros(ref.total),
        np.array([1.0, 0.0]),
    )
    assert np.abs(x - ref.concat(base.blocks())).max() < 1e-10


def test_flux_regime_continuity_eps2_to_zero(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    near = solve_flux(ref, EpsilonPair(0.3, 1e-4), 1)
    limit = solve_flux(ref, EpsilonPair(0.3, 0.0), 1)
    assert _blockwise_diff(ref, near, limit) < 1e-3


# -- trace system -------------------------------------------------------------------


def test_trace_constant_data_residual(twin_config):
    cfg = twin_config.with_data(
        f_outer=TrigPoly(0.8), f_hole1=TrigPoly(0.8), f_hole2=TrigPoly(0.8)
    )
    ref = ReferenceSystem(cfg, 128)
    eps = EpsilonPair(0.3, 0.5)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    trace = solve_trace(ref, eps, triples)
    assert trace_residual(ref, eps, triples, trace) < 1e-10


def test_trace_outer_block_independent_of_eps1(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    traces = []
    for e1 in (0.1, 0.2):
        eps = EpsilonPair(e1, 0.0)
        triples = [solve_flux(ref, eps, i) for i in (1, 2)]
        traces.append(solve_trace(ref, eps, triples))
    diff = np.abs(
        traces[0].theta_outer.values - traces[1].theta_outer.values
    ).max()
    assert diff < 1e-12


def test_trace_orthogonality_of_operator_range(twin_config, rng):
    ref = ReferenceSystem(twin_config, 128)
    eps = EpsilonPair(0.3, 0.5)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    A = trace_operator_matrix(ref, eps)
    for _ in range(5):
        probe = rng.standard_normal(ref.total)
        blocks = ref.split(probe)
        blocks[1] -= ref.holes[0].integrate(blocks[1]) / ref.holes[0].length
        blocks[2] -= ref.holes[1].integrate(blocks[2]) / ref.holes[1].length
        image = ref.split(A @ ref.concat(blocks))
        pairing = trace_orthogonality(ref, triples, image)
        assert np.abs(pairing).max() < 1e-8


def test_trace_rejects_mismatched_flux_input(twin_config):
    ref = ReferenceSystem(twin_config, 64)
    eps = EpsilonPair(0.3, 0.5)
    wrong = [solve_flux(ref, EpsilonPair(0.2, 0.5), i) for i in (1, 2)]
    with pytest.raises(ConsistencyError):
        solve_trace(ref, eps, wrong)


def test_trace_zero_mean_and_residual_generic(twin_config):
    ref = ReferenceSystem(twin_config, 128)
    eps = EpsilonPair(0.3, 0.5)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    trace = solve_trace(ref, eps, triples)
    assert abs(ref.holes[0].integrate(trace.theta_hole1.values)) < 1e-12
    assert abs(ref.holes[1].integrate(trace.theta_hole2.values)) < 1e-12
    assert trace_residual(ref, eps, triples, trace) < 1e-10


def test_data_moments_constant_data(twin_config):
    cfg = twin_config.with_data(
        f_outer=TrigPoly(0.8), f_hole1=TrigPoly(0.8), f_hole2=TrigPoly(0.8)
    )
    ref = ReferenceSystem(cfg, 128)
    eps = EpsilonPair(0.2, 0.0)
    triples = [solve_flux(ref, eps, i) for i in (1, 2)]
    # outer pairing gives -c, hole pairing gives +c: the moments vanish
    assert np.abs(data_moments(ref, triples)).max() < 1e-12

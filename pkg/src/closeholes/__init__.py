"""Boundary-integral solver for the planar Dirichlet Laplace problem in a
domain with two close small holes, with exact representation formulas and
two-term small-parameter asymptotics."""

from .geometry import (
    Curve,
    EpsilonPair,
    ProblemConfig,
    TrigPoly,
    admissibility_check,
    circle,
    ellipse,
    fourier_curve,
    scaled_hole,
    star,
    tilde_domain,
)
from .potentials import (
    BoundarySystem,
    Density,
    Discretization,
    eval_double_layer,
    eval_single_layer,
    fundamental_solution,
    op_W,
    op_Wstar,
)
from .dirichlet import (
    flux_basis,
    green_function,
    solve_exterior_pair,
    solve_exterior_single,
    solve_interior_dirichlet,
)
from .densities import ReferenceSystem, solve_flux, solve_trace
from .structure import StructureBundle, build_bundle, direct_solution
from .asymptotics import (
    ScalingPath,
    expansion_cluster_fixed,
    expansion_cluster_shrinking,
    offset_path,
    path_from_expression,
    power_path,
)
from .fixtures import fix_sym, fix_twin, get_fixture

__version__ = "0.1.0"

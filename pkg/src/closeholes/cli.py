"""Command-line experiment runner.

Usage follows ``closeholes run <experiment> [flags]`` with the
experiment one of validate_representation, asymptotic_sweep,
symmetry_check, convergence_study, bundle_dump; ``--config`` points at a
TOML file supplying the same information.  Outputs are UTF-8 CSV tables
with JSON mirrors, written atomically into the output directory.

Exit codes: 0 success, 2 configuration error, 3 admissibility failure,
4 solver failure, 5 tolerance failure in a validation experiment.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import asymptotics as asy
from . import degenerate as dg
from .config import EXPERIMENTS, experiment_from_tables, load_toml, problem_from_tables
from .densities import ReferenceSystem
from .dirichlet import (
    interior_system,
    solve_exterior_single,
    solve_interior_dirichlet,
    tilde_solution,
)
from .errors import (
    AdmissibilityError,
    CloseHolesError,
    ConfigError,
    ConsistencyError,
    SolverError,
)
from .fixtures import fix_twin, get_fixture
from .geometry import TWO_PI, TrigPoly, circle, star
from .potentials import BoundarySystem, Discretization, op_W, slp_self_matrix
from .reporting import table_payload, write_csv, write_json
from .structure import (
    build_bundle,
    coupling_from_physical,
    default_macro_points,
    default_micro_points,
    direct_solution,
    micro_log_shift,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ADMISSIBILITY = 3
EXIT_SOLVER = 4
EXIT_TOLERANCE = 5


def _emit(out_dir, name, columns, rows, fmt, **meta):
    base = os.path.join(out_dir, name)
    if fmt in ("csv", "both"):
        write_csv(base + ".csv", columns, rows)
    if fmt in ("json", "both"):
        write_json(base + ".json", table_payload(columns, rows, **meta))


# -- experiments ----------------------------------------------------------------


def run_validate_representation(problem, args):
    """Pointwise direct-vs-representation comparison on one or more pairs."""
    tol = args.tolerance if args.tolerance is not None else 1e-6
    pairs = [tuple(args.eps)] if args.eps else [(0.3, 0.5)]
    n = args.nodes
    rows = []
    worst = 0.0
    for e1, e2 in pairs:
        bundle = build_bundle(problem, e1, e2, n_outer=n, n_hole=n)
        direct = direct_solution(problem, bundle.eps, n_outer=n, n_hole=n)
        macro = default_macro_points()
        cases = [("macro", macro, bundle.solution_macro(macro), direct.evaluate(macro))]
        for h in (1, 2):
            xi = default_micro_points(bundle.ref, h)
            cases.append(
                (
                    f"micro{h}",
                    xi,
                    bundle.solution_micro(h, xi),
                    direct.evaluate(bundle.micro_to_physical(h, xi)),
                )
            )
        for region, pts, rep, ref in cases:
            for q, a, b in zip(pts, rep, ref):
                diff = abs(a - b)
                worst = max(worst, diff)
                rows.append(
                    [e1, e2, region, float(q[0]), float(q[1]),
                     float(b), float(a), float(diff)]
                )
    columns = ("eps1", "eps2", "region", "x1", "x2", "direct",
               "representation", "abs_diff")
    _emit(args.out, "validate_representation", columns, rows, args.format,
          tolerance=tol, max_abs_diff=worst)
    print(f"validate_representation: max |direct - representation| = {worst:.3e} "
          f"(tolerance {tol:.1e})")
    return EXIT_OK if worst < tol else EXIT_TOLERANCE


def _parse_decades(text):
    try:
        a, b = text.split("..")
        return int(a), int(b)
    except ValueError:
        raise ConfigError(f"--t-decades expects 'A..B', got {text!r}") from None


def run_asymptotic_sweep(problem, args):
    """Residual table of the two-term expansion along a scaling path."""
    path = asy.path_from_expression(args.family or "gamma=t")
    a, b = _parse_decades(args.t_decades or "2..5")
    ts = [10.0 ** (-k) for k in range(a, b + 1)]
    pts = np.array([args.point]) if args.point else np.array([[2.0, 0.0]])
    g0, _ = path.resolve_limits()
    if g0 == 0.0:
        report = asy.expansion_cluster_shrinking(problem, path, pts, ts, n=args.nodes)
    else:
        report = asy.expansion_cluster_fixed(problem, path, pts, ts, n=args.nodes)
    rows = report.rows()
    _emit(args.out, "asymptotic_sweep", report.COLUMNS, rows, args.format,
          path=report.tag, limit_value=report.limit_value,
          log_ratio_limit=report.log_ratio_limit,
          coefficient=report.coefficient,
          monotone_decay=report.monotone_decay())
    seq = report.normalized_max()
    print(f"asymptotic_sweep: normalized residuals {np.array2string(seq, precision=4)} "
          f"monotone={report.monotone_decay()}")
    return EXIT_OK if report.monotone_decay() else EXIT_TOLERANCE


def run_symmetry_check(problem, args):
    """Reflection-symmetry diagnostics with seeded random hole data."""
    tol = args.tolerance if args.tolerance is not None else 1e-7
    rng = np.random.default_rng(args.seed)
    coeffs = 0.5 * rng.standard_normal(4)
    f1 = TrigPoly(1.0 + coeffs[0], cos=tuple(coeffs[1:3]), sin=(coeffs[3],))
    from .fixtures import fix_sym

    sym = fix_sym(f_hole1=f1)
    g0 = args.gamma0 or 0.5
    n = args.nodes
    tilde = tilde_solution(sym, g0, n)
    alternating, mixed, H = asy.corner_constants(sym, g0, n)
    cross = (H[1, 0] - H[0, 1]) * tilde.flux(1)
    rows = [
        ["flux_hole1", tilde.flux(1), tol],
        ["flux_antisymmetry", tilde.flux(1) + tilde.flux(2), tol],
        ["corrector_transpose_gap", H[1, 0] - H[0, 1], tol],
        ["expansion_cross_factor", cross, tol],
    ]
    worst = max(abs(r[1]) for r in rows)
    rows.append(["alternating_constant", alternating, float("nan")])
    columns = ("check", "value", "tolerance")
    _emit(args.out, "symmetry_check", columns, rows, args.format,
          seed=args.seed, gamma0=g0)
    print(f"symmetry_check: worst symmetry residual {worst:.3e} (tolerance {tol:.1e}); "
          f"alternating constant {alternating:.6f}")
    if abs(alternating) < 1e-3:
        return EXIT_TOLERANCE
    return EXIT_OK if worst < tol else EXIT_TOLERANCE


def _convergence_cases():
    rho = 0.7

    def slp_density(s):
        return (rho * np.cos(s) - rho**2) / (1 - 2 * rho * np.cos(s) + rho**2)

    def slp_oracle(s):
        ks = np.arange(1, 200)
        return -(rho**ks / (2 * ks)) @ np.cos(np.outer(ks, s))

    def annulus(n):
        system = interior_system(circle(1.0), [circle(0.25)], n)
        g = np.concatenate([np.zeros(n), np.ones(n)])
        u = solve_interior_dirichlet(system, g)
        x = np.array([[0.375, 0.0]])
        return abs(u.evaluate(x)[0] - np.log(0.375) / np.log(0.25))

    def disk_green(n):
        from .dirichlet import green_function

        d = Discretization(circle(1.0), n)
        pairs = [((0.3, 0.1), (-0.35, 0.2)), ((0.1, -0.4), (0.25, 0.3))]
        err = 0.0
        for x, y in pairs:
            x, y = np.asarray(x), np.asarray(y)
            xs = x / (x @ x)
            exact = (
                np.log(np.linalg.norm(x - y))
                - np.log(np.linalg.norm(x) * np.linalg.norm(y - xs))
            ) / TWO_PI
            err = max(err, abs(green_function(d, x, y) - exact))
        return err

    def exterior_circle(n):
        d = Discretization(circle(1.0), n)
        sol = solve_exterior_single(d, np.cos(d.s))
        err = abs(sol.limit_at_infinity)
        err = max(err, abs(sol.evaluate(np.array([[3.0, 0.0]]))[0] - 1.0 / 3.0))
        return err

    def gauss_star(n):
        d = Discretization(star(1.0, 0.25, 5), n)
        W = op_W(BoundarySystem([d]))
        return float(np.abs(W.sum(axis=1) - 0.5).max())

    def slp_fourier(n):
        d = Discretization(circle(1.0), n)
        v = slp_self_matrix(d) @ slp_density(d.s)
        return float(np.abs(v - slp_oracle(d.s)).max())

    def star_dirichlet(n):
        d = Discretization(star(1.0, 0.25, 5), n)
        g = d.points[:, 0] ** 3 - 3 * d.points[:, 0] * d.points[:, 1] ** 2
        u = solve_interior_dirichlet(BoundarySystem([d]), g)
        pts = np.array([[0.05, 0.02], [-0.04, 0.06], [0.1, -0.05]])
        exact = pts[:, 0] ** 3 - 3 * pts[:, 0] * pts[:, 1] ** 2
        return float(np.abs(u.evaluate(pts) - exact).max())

    return {
        "annulus": annulus,
        "disk_green": disk_green,
        "exterior_circle": exterior_circle,
        "gauss_star": gauss_star,
        "slp_fourier": slp_fourier,
        "star_dirichlet": star_dirichlet,
    }


def run_convergence_study(problem, args):
    """Error-vs-n table on the closed-form oracle cases."""
    ns = (64, 128, 256)
    rows = []
    for case, fn in _convergence_cases().items():
        for n in ns:
            rows.append([case, n, float(fn(n))])
    columns = ("case", "n", "error")
    _emit(args.out, "convergence_study", columns, rows, args.format, nodes=list(ns))
    print("convergence_study:")
    for r in rows:
        print(f"  {r[0]:>16s}  n={r[1]:<4d} error={r[2]:.3e}")
    return EXIT_OK


def run_bundle_dump(problem, args):
    """Serialize the representation ingredients of one parameter pair."""
    e1, e2 = args.eps if args.eps else (0.3, 0.5)
    n = args.nodes
    bundle = build_bundle(problem, e1, e2, n_outer=n, n_hole=n)
    ref = bundle.ref
    lam_phys = coupling_from_physical(problem, bundle.eps, ref, bundle.flux)
    payload = {
        "eps1": e1,
        "eps2": e2,
        "nodes": n,
        "data_moments": bundle.moments.tolist(),
        "regular_matrix": bundle.regular.tolist(),
        "coupling_matrix": bundle.coupling.matrix.tolist(),
        "coupling_matrix_physical": lam_phys.tolist(),
        "det_direct": bundle.coupling.det_direct,
        "det_split": bundle.coupling.det_split,
        "rfactor": bundle.coupling.rfactor,
        "condition_number": bundle.coupling.cond,
        "inverse_split": bundle.coupling.inverse_split.tolist(),
        "micro_log_shift": [micro_log_shift(h, bundle.eps).tolist() for h in (1, 2)],
        "flux_masses": [t.masses().tolist() for t in bundle.flux],
    }
    write_json(os.path.join(args.out, "bundle.json"), payload)
    print(f"bundle_dump: det={bundle.coupling.det_direct:.6e} "
          f"cond={bundle.coupling.cond:.3e} -> {args.out}/bundle.json")
    return EXIT_OK


RUNNERS = {
    "validate_representation": run_validate_representation,
    "asymptotic_sweep": run_asymptotic_sweep,
    "symmetry_check": run_symmetry_check,
    "convergence_study": run_convergence_study,
    "bundle_dump": run_bundle_dump,
}


# -- argument handling ------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="closeholes",
        description="Boundary-integral experiments for the two-hole Dirichlet problem",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", help="TOML experiment file")
    run.add_argument("--fixture", help="named fixture (fix-twin, fix-sym)")
    run.add_argument("--eps", nargs=2, type=float, metavar=("E1", "E2"))
    run.add_argument("--family", help="scaling path, e.g. 'gamma=t' or '0.5+t'")
    run.add_argument("--t-decades", dest="t_decades", help="sweep range 'A..B'")
    run.add_argument("--nodes", type=int, default=128)
    run.add_argument("--point", nargs=2, type=float, metavar=("X", "Y"))
    run.add_argument("--out", default="closeholes_out")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--format", choices=("csv", "json", "both"), default="both")
    run.add_argument("--tolerance", type=float)
    run.add_argument("--gamma0", type=float)
    return parser


def _apply_config_file(args):
    doc = load_toml(args.config)
    problem = problem_from_tables(doc)
    kind, exp = experiment_from_tables(doc)
    if kind != args.experiment:
        raise ConfigError(
            f"experiment.kind '{kind}' does not match command-line "
            f"experiment '{args.experiment}'"
        )
    if args.eps is None and "eps" in exp:
        args.eps = [float(v) for v in exp["eps"]]
    if args.family is None and "family" in exp:
        args.family = str(exp["family"])
    if args.t_decades is None and "t_decades" in exp:
        args.t_decades = str(exp["t_decades"])
    if "nodes" in exp:
        args.nodes = int(exp["nodes"])
    if args.tolerance is None and "tolerance" in exp:
        args.tolerance = float(exp["tolerance"])
    if "point" in exp and args.point is None:
        args.point = [float(v) for v in exp["point"]]
    return problem


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            problem = _apply_config_file(args)
        elif args.fixture:
            try:
                problem = get_fixture(args.fixture)
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        else:
            problem = fix_twin()
        os.makedirs(args.out, exist_ok=True)
        runner = RUNNERS[args.experiment]
        return runner(problem, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        print(f"admissibility error: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (SolverError, ConsistencyError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CloseHolesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Scaling paths and two-term asymptotics of the perforated solution.

The asymptotic regime is selected by a path ``eps1 = t, eps2 = gamma(t)``
with finite limits ``gamma0`` of gamma and ``lambda0`` of the quotient
log t / log(t*gamma(t)).  For a cluster shrinking faster than its
diameter (gamma0 = 0) the leading correction is a multiple of the Green
function with pole at the collapse point and weight 1/log(t*gamma(t));
for a cluster of fixed relative scale (gamma0 > 0, forcing lambda0 = 1)
the weight is 1/log t and the coefficient couples the pair geometry
through the corrector constants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .degenerate import (
    background_harmonic,
    corrector_matrix,
    exterior_hole_solution,
    tilde_solution,
)
from .dirichlet import green_values
from .errors import ConfigError, SolverError
from .geometry import TWO_PI
from .potentials import Discretization
from .structure import StructureBundle, direct_solution, log_coupling_split

#: direct solves distrust t below this (oracle conditioning, not the formulas)
SMALLEST_TRUSTED_T = 1e-6


def direct_hole_nodes(t, base=128):
    """Node count rule for the physical hole curves in small-t solves."""
    return max(base, 32 * math.ceil(math.log10(1.0 / t)))


# -- scaling paths -------------------------------------------------------------


@dataclass
class ScalingPath:
    """A path t -> (t, gamma(t)) into the degenerate corner.

    ``limit_value`` and ``log_ratio_limit`` hold closed-form limits when
    the construction knows them; otherwise they are measured numerically
    (with Cauchy checks) on first use.
    """

    gamma: callable
    tag: str = "path"
    limit_value: float = None
    log_ratio_limit: float = None
    tabulated: bool = False

    def __call__(self, t):
        return self.gamma(np.asarray(t, dtype=float))

    def log_quotient(self, t):
        t = np.asarray(t, dtype=float)
        return np.log(t) / np.log(t * self(t))

    def measured_limit_value(self, ts=(1e-6, 1e-7, 1e-8), zero_snap=1e-5):
        vals = np.asarray([float(self(t)) for t in ts])
        if abs(vals[-1] - vals[-2]) > 1e-4 * max(1.0, abs(vals[-1])):
            raise ConfigError(
                f"{self.tag}: gamma(t) does not settle along {ts}: {vals}"
            )
        # a measured limit this small is a collapsing path, not a tiny fixed
        # scale: treat it as zero so the correct expansion is selected
        if abs(vals[-1]) < zero_snap:
            return 0.0
        return float(vals[-1])

    def measured_log_ratio(self, ts=(1e-4, 1e-5, 1e-6)):
        """Limit of the log quotient by polynomial extrapolation in 1/log t.

        The raw quotient converges only like 1/log t, so a finite-t
        value is biased by several percent; extrapolating a quadratic
        through three decades removes the bias to ~1e-4.
        """
        x = np.array([1.0 / np.log(t) for t in ts])
        q = np.array([float(self.log_quotient(t)) for t in ts])
        coeffs = np.polyfit(x, q, deg=len(ts) - 1)
        return float(np.polyval(coeffs, 0.0))

    def resolve_limits(self):
        g0 = (
            self.limit_value
            if self.limit_value is not None
            else self.measured_limit_value()
        )
        if self.log_ratio_limit is not None:
            lam0 = self.log_ratio_limit
        elif g0 > 0.0:
            lam0 = 1.0
        else:
            lam0 = self.measured_log_ratio()
        if not (0.0 <= lam0 < np.inf):
            raise ConfigError(f"{self.tag}: log-ratio limit {lam0} out of range")
        return float(g0), float(lam0)


def power_path(exponent, coefficient=1.0):
    """gamma(t) = coefficient * t**exponent (exponent > 0 collapses)."""
    if exponent < 0:
        raise ConfigError("power path exponent must be nonnegative")
    lam0 = 1.0 / (1.0 + exponent)
    g0 = 0.0 if exponent > 0 else float(coefficient)
    return ScalingPath(
        lambda t: coefficient * t**exponent,
        tag=f"gamma={coefficient}*t^{exponent}",
        limit_value=g0,
        log_ratio_limit=lam0 if exponent > 0 else None,
    )


def offset_path(limit_value, exponent=1.0, coefficient=1.0):
    """gamma(t) = limit_value + coefficient * t**exponent with limit > 0."""
    if limit_value <= 0.0:
        raise ConfigError("offset path needs a positive limit value")
    return ScalingPath(
        lambda t: limit_value + coefficient * t**exponent,
        tag=f"gamma={limit_value}+{coefficient}*t^{exponent}",
        limit_value=float(limit_value),
        log_ratio_limit=1.0,
    )


_EXPR_ALLOWED = re.compile(r"^[0-9t+\-*/.()eE ^]*$")


def path_from_expression(expr):
    """Scaling path from a plain expression in t, e.g. ``0.5 + t`` or ``t**2``.

    Only digits, ``t``, arithmetic operators, parentheses, and ``^``
    (rewritten to ``**``) are accepted.  Limits are verified numerically.
    """
    text = expr.strip()
    if text.startswith("gamma="):
        text = text[len("gamma="):]
    if not _EXPR_ALLOWED.match(text):
        raise ConfigError(f"unsupported characters in path expression {expr!r}")
    code = text.replace("^", "**")
    try:
        fn = eval(f"lambda t: 0.0*t + ({code})", {"__builtins__": {}}, {})
        probe = fn(np.array([1e-2, 1e-3]))
    except Exception as exc:
        raise ConfigError(f"cannot evaluate path expression {expr!r}: {exc}") from exc
    if not np.all(np.isfinite(probe)) or np.any(probe <= 0.0):
        raise ConfigError(f"path expression {expr!r} must be positive near 0")
    path = ScalingPath(fn, tag=f"gamma={text}", tabulated=True)
    path.resolve_limits()
    return path


# -- explicit inverse of the coupling matrix ------------------------------------


def lambda_inverse_explicit(R, eps):
    """Explicit inverse of the coupling matrix and its determinant factor.

    Returns ``(inverse, rfactor)``.  A vanishing factor contradicts the
    invertibility of the coupling matrix and raises.
    """
    rfactor, _, inverse = log_coupling_split(R, eps.eps1, eps.eps2)
    if abs(rfactor) < 1e-12:
        raise SolverError("coupling determinant factor vanished: assembly bug")
    return inverse, rfactor


# -- exact macro split ------------------------------------------------------------


def macro_split(bundle: StructureBundle, points):
    """The exact macro solution split into its named summands.

    Keys: ``background``, ``smooth_correction`` (the product-weighted
    smooth term), ``log_green`` (the Green-function term with the
    log-of-scale weight), ``analytic_remainder`` (the first-order
    analytic term), ``adjugate`` (the adjugate-weighted green vector),
    and ``total``.  The split isolates every log factor so the summands
    stay finite down to vanishing hole size.
    """
    pts = bundle.check_macro(points)
    eps = bundle.eps
    L = np.log(abs(eps.product))
    q = np.log(abs(eps.eps1)) / L
    rfactor, _, _ = log_coupling_split(bundle.regular, eps.eps1, eps.eps2)
    F = bundle.moments
    G = green_values(bundle.ref.outer, np.zeros(2), pts)
    V = bundle.green_vector_macro(pts)
    X = (V - G[:, None]) / eps.eps1
    quotient_matrix = np.array([[1.0, -q], [-q, 1.0]])
    background = bundle.background(pts)
    smooth_correction = bundle.smooth_field(pts) - background
    log_green = (
        TWO_PI
        / L
        * np.log(abs(eps.eps2))
        / rfactor
        * (F[0] + F[1])
        * G
    )
    analytic_remainder = (
        TWO_PI * eps.eps1 / rfactor * (X @ (quotient_matrix @ F))
    )
    adjugate = (
        TWO_PI**2
        / (L * rfactor)
        * (V @ (_adjugate2t(bundle.regular) @ F))
    )
    total = background + smooth_correction + log_green + analytic_remainder + adjugate
    return {
        "background": background,
        "smooth_correction": smooth_correction,
        "log_green": log_green,
        "analytic_remainder": analytic_remainder,
        "adjugate": adjugate,
        "total": total,
    }


def _adjugate2t(m):
    # transpose of the adjugate, i.e. the cofactor matrix
    return np.array([[m[1, 1], -m[1, 0]], [-m[0, 1], m[0, 0]]])


# -- two-term expansions -----------------------------------------------------------


@dataclass
class AsymptoticReport:
    """Measured residuals of a two-term expansion along a scaling path."""

    tag: str
    limit_value: float
    log_ratio_limit: float
    points: np.ndarray
    ts: np.ndarray
    gamma_ts: np.ndarray
    log_quotients: np.ndarray
    log_weights: np.ndarray          # the reciprocal of the expansion weight
    u_direct: np.ndarray             # (T, P)
    u_leading: np.ndarray            # (T, P)
    coefficient: float
    coefficient_fields: np.ndarray   # (P,) the Green factor at each point
    schema_version: int = 1

    @property
    def residual(self):
        return self.u_direct - self.u_leading

    @property
    def normalized_residual(self):
        return self.residual * self.log_weights[:, None]

    def normalized_max(self):
        return np.abs(self.normalized_residual).max(axis=1)

    def monotone_decay(self):
        seq = self.normalized_max()
        return bool(np.all(np.diff(seq) < 0.0))

    def decade_factors(self):
        seq = self.normalized_max()
        return seq[:-1] / seq[1:]

    def measured_coefficients(self, background):
        """(u_direct - background) * log weight: tends to the coefficient field."""
        return (self.u_direct - background[None, :]) * self.log_weights[:, None]

    def rows(self):
        out = []
        for a, t in enumerate(self.ts):
            for b in range(self.points.shape[0]):
                out.append(
                    [
                        float(t),
                        float(self.gamma_ts[a]),
                        float(self.log_quotients[a]),
                        float(self.u_direct[a, b]),
                        float(self.u_leading[a, b]),
                        float(self.residual[a, b]),
                        float(self.normalized_residual[a, b]),
                    ]
                )
        return out

    COLUMNS = (
        "t",
        "gamma_t",
        "log_quotient",
        "u_direct",
        "u_leading",
        "residual",
        "normalized_residual",
    )


def _direct_values(config, t, gamma_t, points, n_outer):
    eps = config.epsilon(t, gamma_t)
    sol = direct_solution(
        config, eps, n_outer=n_outer, n_hole=direct_hole_nodes(t)
    )
    return sol.evaluate(points)


def expansion_cluster_shrinking(config, path, points, ts, n=128):
    """Two-term expansion report for a collapsing cluster (limit value 0).

    The expansion weight is 1/log(t*gamma(t)); the leading coefficient
    combines the exterior limits of both hole solutions and the
    background value at the collapse point.
    """
    g0, lam0 = path.resolve_limits()
    if g0 != 0.0:
        raise ConfigError("shrinking-cluster expansion requires limit value 0")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ts = np.asarray(sorted(ts, reverse=True), dtype=float)
    if ts.min() < SMALLEST_TRUSTED_T:
        raise ConfigError(f"t below the trusted floor {SMALLEST_TRUSTED_T}")
    u0 = background_harmonic(config, n)
    u00 = u0.evaluate(np.zeros((1, 2)))[0]
    limits = [
        exterior_hole_solution(config, h, n).limit_at_infinity for h in (1, 2)
    ]
    coeff = TWO_PI / (1.0 + lam0) * (limits[0] + limits[1] - 2.0 * u00)
    outer = Discretization(config.outer, n)
    green = green_values(outer, np.zeros(2), pts)
    u0_vals = u0.evaluate(pts)
    gamma_ts = np.array([float(path(t)) for t in ts])
    weights = np.log(ts * gamma_ts)
    u_leading = u0_vals[None, :] + coeff * green[None, :] / weights[:, None]
    u_direct = np.stack(
        [_direct_values(config, t, g, pts, n) for t, g in zip(ts, gamma_ts)]
    )
    return AsymptoticReport(
        tag=path.tag,
        limit_value=g0,
        log_ratio_limit=lam0,
        points=pts,
        ts=ts,
        gamma_ts=gamma_ts,
        log_quotients=np.array([float(path.log_quotient(t)) for t in ts]),
        log_weights=weights,
        u_direct=u_direct,
        u_leading=u_leading,
        coefficient=float(coeff),
        coefficient_fields=coeff * green,
    )


def expansion_cluster_fixed(config, path, points, ts, n=128):
    """Two-term expansion report for a cluster of fixed relative scale.

    Requires a positive limit value inside the admissible range; the
    log-ratio limit is then 1 and the weight is 1/log t.
    """
    g0, lam0 = path.resolve_limits()
    if not 0.0 < g0 < config.delta2:
        raise ConfigError("fixed-scale expansion needs limit value in (0, delta2)")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ts = np.asarray(sorted(ts, reverse=True), dtype=float)
    if ts.min() < SMALLEST_TRUSTED_T:
        raise ConfigError(f"t below the trusted floor {SMALLEST_TRUSTED_T}")
    u0 = background_harmonic(config, n)
    u00 = u0.evaluate(np.zeros((1, 2)))[0]
    tilde = tilde_solution(config, g0, n)
    H = corrector_matrix(config, g0, n)
    cross = (H[1, 0] - H[0, 1]) * tilde.flux(1)
    coeff = TWO_PI * (tilde.limit_at_infinity - u00 + cross)
    outer = Discretization(config.outer, n)
    green = green_values(outer, np.zeros(2), pts)
    u0_vals = u0.evaluate(pts)
    gamma_ts = np.array([float(path(t)) for t in ts])
    weights = np.log(ts)
    u_leading = u0_vals[None, :] + coeff * green[None, :] / weights[:, None]
    u_direct = np.stack(
        [_direct_values(config, t, g, pts, n) for t, g in zip(ts, gamma_ts)]
    )
    return AsymptoticReport(
        tag=path.tag,
        limit_value=g0,
        log_ratio_limit=lam0,
        points=pts,
        ts=ts,
        gamma_ts=gamma_ts,
        log_quotients=np.array([float(path.log_quotient(t)) for t in ts]),
        log_weights=weights,
        u_direct=u_direct,
        u_leading=u_leading,
        coefficient=float(coeff),
        coefficient_fields=coeff * green,
    )


# -- corner constants of the pair geometry ----------------------------------------


def corner_constants(config, gamma0, n=128):
    """The alternating and mixed combinations of the corrector constants.

    The alternating one is the nonvanishing constant behind the
    fixed-scale determinant limit; the mixed one enters the data-moment
    sum of the same regime.
    """
    H = corrector_matrix(config, gamma0, n)
    alternating = H[0, 0] - H[0, 1] - H[1, 0] + H[1, 1]
    mixed = H[0, 0] - H[0, 1] + H[1, 0] - H[1, 1]
    return float(alternating), float(mixed), H

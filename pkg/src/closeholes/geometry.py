"""Curves, boundary data, and the two-hole perforated geometry.

A curve is a smooth closed 2*pi-periodic parametrization with analytic
position and derivative maps.  The perforated domain is built from three
reference curves (one outer boundary, two hole shapes containing the
origin), two anchor points p1 != p2, and a pair of scale parameters
(eps1, eps2): hole i occupies ``eps1 * p_i + eps1*eps2 * hole_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AdmissibilityError, GeometryError

TWO_PI = 2.0 * np.pi


def _rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


class Curve:
    """Closed planar curve with analytic parametrization on [0, 2*pi).

    Parameters
    ----------
    position, derivative, second_derivative : callable
        Vectorized maps from a parameter array of shape (m,) to points of
        shape (m, 2).  ``derivative`` must not vanish.
    label : str
        Short name used in diagnostics.
    """

    def __init__(self, position, derivative, second_derivative, label="curve"):
        self._position = position
        self._derivative = derivative
        self._second = second_derivative
        self.label = label

    def points(self, s):
        return self._position(np.atleast_1d(np.asarray(s, dtype=float)))

    def derivatives(self, s):
        return self._derivative(np.atleast_1d(np.asarray(s, dtype=float)))

    def second_derivatives(self, s):
        return self._second(np.atleast_1d(np.asarray(s, dtype=float)))

    def speeds(self, s):
        return np.linalg.norm(self.derivatives(s), axis=-1)

    def normals(self, s):
        """Outward unit normal: the unit tangent rotated by -pi/2.

        Outward is with respect to the enclosed bounded region, provided
        the parametrization is positively oriented (counterclockwise).
        """
        d = self.derivatives(s)
        t = d / np.linalg.norm(d, axis=-1, keepdims=True)
        return np.stack([t[:, 1], -t[:, 0]], axis=-1)

    def curvatures(self, s):
        d = self.derivatives(s)
        dd = self.second_derivatives(s)
        cross = d[:, 0] * dd[:, 1] - d[:, 1] * dd[:, 0]
        speed = np.linalg.norm(d, axis=-1)
        return cross / speed**3

    def affine(self, shift=(0.0, 0.0), factor=1.0, label=None):
        """Curve s -> shift + factor * position(s) for a scalar factor.

        A negative factor acts as a rotation by pi, so orientation and
        the outward-normal convention are preserved.
        """
        shift = np.asarray(shift, dtype=float)
        if factor == 0.0:
            raise GeometryError("degenerate hole: affine factor is zero")
        pos, der, sec = self._position, self._derivative, self._second
        return Curve(
            lambda s: shift + factor * pos(s),
            lambda s: factor * der(s),
            lambda s: factor * sec(s),
            label=label or f"{self.label}@affine",
        )

    def rotated(self, angle, label=None):
        """Curve rotated about the origin by ``angle``."""
        rot = _rotation(angle).T
        pos, der, sec = self._position, self._derivative, self._second
        return Curve(
            lambda s: pos(s) @ rot,
            lambda s: der(s) @ rot,
            lambda s: sec(s) @ rot,
            label=label or f"{self.label}@rot",
        )

    def __neg__(self):
        return self.affine(factor=-1.0, label=f"-{self.label}")

    # -- sampled predicates -------------------------------------------------

    def sample(self, n):
        s = TWO_PI * np.arange(n) / n
        return self.points(s)

    def enclosed_area(self, n=512):
        """Signed area by the shoelace/divergence quadrature (trapezoid)."""
        s = TWO_PI * np.arange(n) / n
        p = self.points(s)
        d = self.derivatives(s)
        return 0.5 * np.sum(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0]) * TWO_PI / n

    def contains(self, point, n=512):
        return winding_number(self.sample(n), np.asarray(point, dtype=float)) != 0

    def is_closed(self, tol=1e-12):
        a = self.points(np.array([0.0]))
        b = self.points(np.array([TWO_PI]))
        return float(np.linalg.norm(a - b)) <= tol * max(1.0, float(np.linalg.norm(a)))

    def is_simple(self, n=256):
        """No self-intersection among the n chords of the sampled polygon."""
        return _polygon_is_simple(self.sample(n))

    def min_speed(self, n=512):
        return float(self.speeds(TWO_PI * np.arange(n) / n).min())

    def validate(self, n=256):
        if not self.is_closed():
            raise GeometryError(f"{self.label}: parametrization is not 2*pi-periodic")
        if self.min_speed(n) <= 0.0:
            raise GeometryError(f"{self.label}: derivative vanishes")
        if not self.is_simple(n):
            raise GeometryError(f"{self.label}: curve self-intersects")
        if self.enclosed_area() <= 0.0:
            raise GeometryError(f"{self.label}: parametrization is not counterclockwise")


# -- curve factories --------------------------------------------------------


def circle(radius=1.0, center=(0.0, 0.0)):
    center = np.asarray(center, dtype=float)
    r = float(radius)
    if r <= 0:
        raise GeometryError("circle radius must be positive")

    def pos(s):
        return center + r * np.stack([np.cos(s), np.sin(s)], axis=-1)

    def der(s):
        return r * np.stack([-np.sin(s), np.cos(s)], axis=-1)

    def sec(s):
        return r * np.stack([-np.cos(s), -np.sin(s)], axis=-1)

    return Curve(pos, der, sec, label=f"circle(r={r})")


def ellipse(a=1.0, b=0.5, center=(0.0, 0.0), angle=0.0):
    center = np.asarray(center, dtype=float)
    rot = _rotation(angle).T

    def pos(s):
        base = np.stack([a * np.cos(s), b * np.sin(s)], axis=-1)
        return center + base @ rot

    def der(s):
        base = np.stack([-a * np.sin(s), b * np.cos(s)], axis=-1)
        return base @ rot

    def sec(s):
        base = np.stack([-a * np.cos(s), -b * np.sin(s)], axis=-1)
        return base @ rot

    return Curve(pos, der, sec, label=f"ellipse(a={a},b={b})")


def star(base=1.0, amplitude=0.2, arms=5, center=(0.0, 0.0)):
    """Star-shaped curve r(s) = base * (1 + amplitude*cos(arms*s))."""
    center = np.asarray(center, dtype=float)
    if abs(amplitude) >= 1.0:
        raise GeometryError("star amplitude must have modulus < 1")

    def radius(s):
        return base * (1.0 + amplitude * np.cos(arms * s))

    def radius_p(s):
        return -base * amplitude * arms * np.sin(arms * s)

    def radius_pp(s):
        return -base * amplitude * arms**2 * np.cos(arms * s)

    def pos(s):
        r = radius(s)
        return center + np.stack([r * np.cos(s), r * np.sin(s)], axis=-1)

    def der(s):
        r, rp = radius(s), radius_p(s)
        return np.stack(
            [rp * np.cos(s) - r * np.sin(s), rp * np.sin(s) + r * np.cos(s)], axis=-1
        )

    def sec(s):
        r, rp, rpp = radius(s), radius_p(s), radius_pp(s)
        return np.stack(
            [
                rpp * np.cos(s) - 2 * rp * np.sin(s) - r * np.cos(s),
                rpp * np.sin(s) + 2 * rp * np.cos(s) - r * np.sin(s),
            ],
            axis=-1,
        )

    return Curve(pos, der, sec, label=f"star(k={arms})")


def fourier_curve(xcos, xsin, ycos, ysin):
    """Curve from truncated Fourier series of each coordinate.

    ``xcos[k]`` multiplies cos(k*s) in the x coordinate (k = 0 is the
    constant term), ``xsin[k]`` multiplies sin((k+1)*s), and likewise for y.
    """
    xc = np.asarray(xcos, dtype=float)
    xs = np.asarray(xsin, dtype=float)
    yc = np.asarray(ycos, dtype=float)
    ys = np.asarray(ysin, dtype=float)

    def series(s, cos_c, sin_c, order):
        out = np.zeros_like(s)
        for k, c in enumerate(cos_c):
            kk = k
            if order == 0:
                out += c * np.cos(kk * s)
            elif order == 1:
                out += -c * kk * np.sin(kk * s)
            else:
                out += -c * kk**2 * np.cos(kk * s)
        for k, c in enumerate(sin_c):
            kk = k + 1
            if order == 0:
                out += c * np.sin(kk * s)
            elif order == 1:
                out += c * kk * np.cos(kk * s)
            else:
                out += -c * kk**2 * np.sin(kk * s)
        return out

    def make(order):
        def f(s):
            return np.stack(
                [series(s, xc, xs, order), series(s, yc, ys, order)], axis=-1
            )

        return f

    return Curve(make(0), make(1), make(2), label="fourier")


# -- boundary data ----------------------------------------------------------


class TrigPoly:
    """Trigonometric polynomial in the curve parameter, f(s) = c0 + sums."""

    def __init__(self, constant=0.0, cos=(), sin=()):
        self.constant = float(constant)
        self.cos = tuple(float(c) for c in cos)
        self.sin = tuple(float(c) for c in sin)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.full_like(s, self.constant)
        for k, c in enumerate(self.cos, start=1):
            out += c * np.cos(k * s)
        for k, c in enumerate(self.sin, start=1):
            out += c * np.sin(k * s)
        return out

    def as_dict(self):
        return {"constant": self.constant, "cos": list(self.cos), "sin": list(self.sin)}

    def __repr__(self):
        return f"TrigPoly(constant={self.constant}, cos={self.cos}, sin={self.sin})"


# -- sampled geometric predicates -------------------------------------------


def winding_number(polygon, point):
    """Winding number of a closed sampled polygon around ``point``."""
    d = polygon - point[None, :]
    ang = np.arctan2(d[:, 1], d[:, 0])
    dang = np.diff(np.concatenate([ang, ang[:1]]))
    dang = (dang + np.pi) % TWO_PI - np.pi
    return int(np.rint(dang.sum() / TWO_PI))


def _polygon_is_simple(p):
    """Pairwise segment-intersection test, skipping adjacent segments."""
    n = p.shape[0]
    a = p
    b = np.roll(p, -1, axis=0)
    d = b - a
    idx_i, idx_j = np.triu_indices(n, k=2)
    # the (0, n-1) pair is adjacent through the wrap-around
    keep = ~((idx_i == 0) & (idx_j == n - 1))
    idx_i, idx_j = idx_i[keep], idx_j[keep]
    ai, di = a[idx_i], d[idx_i]
    aj, dj = a[idx_j], d[idx_j]
    denom = di[:, 0] * dj[:, 1] - di[:, 1] * dj[:, 0]
    rhs = aj - ai
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rhs[:, 0] * dj[:, 1] - rhs[:, 1] * dj[:, 0]) / denom
        u = (rhs[:, 0] * di[:, 1] - rhs[:, 1] * di[:, 0]) / denom
    hit = (
        np.isfinite(t)
        & np.isfinite(u)
        & (t > 0)
        & (t < 1)
        & (u > 0)
        & (u < 1)
    )
    return not bool(hit.any())


def min_curve_distance(curve_a, curve_b, n=512):
    """Minimum pairwise distance between dense samples of two curves."""
    pa = curve_a.sample(n)
    pb = curve_b.sample(n)
    d = pa[:, None, :] - pb[None, :, :]
    return float(np.sqrt((d**2).sum(axis=-1)).min())


def curves_cross(curve_a, curve_b, n=256):
    """Segment-intersection test between two sampled closed curves.

    Nested curves do not cross; touching or overlapping ones do.
    """
    pa = curve_a.sample(n)
    pb = curve_b.sample(n)
    a0, a1 = pa, np.roll(pa, -1, axis=0)
    b0, b1 = pb, np.roll(pb, -1, axis=0)
    da = (a1 - a0)[:, None, :]
    db = (b1 - b0)[None, :, :]
    rhs = b0[None, :, :] - a0[:, None, :]
    denom = da[..., 0] * db[..., 1] - da[..., 1] * db[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rhs[..., 0] * db[..., 1] - rhs[..., 1] * db[..., 0]) / denom
        u = (rhs[..., 0] * da[..., 1] - rhs[..., 1] * da[..., 0]) / denom
    hit = (
        np.isfinite(t) & np.isfinite(u)
        & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    )
    return bool(hit.any())


# -- problem configuration ---------------------------------------------------


@dataclass
class EpsilonPair:
    """A point of the parameter rectangle with its degeneracy regime."""

    eps1: float
    eps2: float

    @property
    def regime(self):
        if self.eps1 == 0.0 and self.eps2 == 0.0:
            return "both_zero"
        if self.eps1 == 0.0:
            return "eps1_zero"
        if self.eps2 == 0.0:
            return "eps2_zero"
        return "generic"

    @property
    def product(self):
        return self.eps1 * self.eps2


@dataclass
class ProblemConfig:
    """Reference geometry, anchor points, parameter bounds, and boundary data.

    Boundary data are maps of the curve parameter s.  ``f_hole1`` and
    ``f_hole2`` are understood on the reference hole curves; the physical
    datum on a scaled hole boundary is the same parameter function.
    """

    outer: Curve
    hole1: Curve
    hole2: Curve
    p1: np.ndarray
    p2: np.ndarray
    delta1: float
    delta2: float
    f_outer: Callable = field(default_factory=TrigPoly)
    f_hole1: Callable = field(default_factory=TrigPoly)
    f_hole2: Callable = field(default_factory=TrigPoly)
    name: str = "config"

    def __post_init__(self):
        self.p1 = np.asarray(self.p1, dtype=float)
        self.p2 = np.asarray(self.p2, dtype=float)
        if np.allclose(self.p1, self.p2):
            raise GeometryError("anchor points p1 and p2 must be distinct")

    def hole(self, i):
        if i == 1:
            return self.hole1
        if i == 2:
            return self.hole2
        raise ValueError("hole index must be 1 or 2")

    def anchor(self, i):
        return self.p1 if i == 1 else self.p2

    def hole_data(self, i):
        return self.f_hole1 if i == 1 else self.f_hole2

    def epsilon(self, eps1, eps2):
        eps = EpsilonPair(float(eps1), float(eps2))
        if abs(eps.eps1) >= self.delta1 or abs(eps.eps2) >= self.delta2:
            raise AdmissibilityError(
                f"(eps1, eps2) = ({eps.eps1}, {eps.eps2}) outside "
                f"(-{self.delta1}, {self.delta1}) x (-{self.delta2}, {self.delta2})"
            )
        return eps

    def with_data(self, f_outer=None, f_hole1=None, f_hole2=None):
        return ProblemConfig(
            outer=self.outer,
            hole1=self.hole1,
            hole2=self.hole2,
            p1=self.p1.copy(),
            p2=self.p2.copy(),
            delta1=self.delta1,
            delta2=self.delta2,
            f_outer=f_outer if f_outer is not None else self.f_outer,
            f_hole1=f_hole1 if f_hole1 is not None else self.f_hole1,
            f_hole2=f_hole2 if f_hole2 is not None else self.f_hole2,
            name=self.name,
        )


# -- operations ---------------------------------------------------------------


def scaled_hole(config, i, eps):
    """Physical hole curve s -> eps1*p_i + eps1*eps2*hole_i(s).

    Rejects parameter pairs with eps1*eps2 == 0, for which the hole
    degenerates to a point.
    """
    if isinstance(eps, tuple):
        eps = EpsilonPair(*eps)
    if eps.eps1 == 0.0 or eps.eps2 == 0.0:
        raise GeometryError("degenerate hole: eps1*eps2 = 0 scales the hole to a point")
    shift = eps.eps1 * config.anchor(i)
    return config.hole(i).affine(
        shift=shift, factor=eps.product, label=f"hole{i}({eps.eps1},{eps.eps2})"
    )


def tilde_domain(config, eps2, n_check=512):
    """The pair of unit-distance rescaled hole curves p_i + eps2*hole_i.

    Raises if eps2 == 0 or if the two curves fail the sampled separation
    test.
    """
    if eps2 == 0.0:
        raise GeometryError("degenerate hole: eps2 = 0 scales both holes to points")
    a = config.hole1.affine(shift=config.p1, factor=eps2, label=f"hole1(1,{eps2})")
    b = config.hole2.affine(shift=config.p2, factor=eps2, label=f"hole2(1,{eps2})")
    if not _sampled_separated(a, b, n_check):
        raise GeometryError(f"separation violated at eps2={eps2}")
    return a, b


def _sampled_separated(curve_a, curve_b, n=512):
    gap = min_curve_distance(curve_a, curve_b, n=n)
    scale = max(
        float(np.abs(curve_a.sample(8)).max()), float(np.abs(curve_b.sample(8)).max())
    )
    return gap > 1e-7 * max(scale, 1.0) and not _sampled_overlap(curve_a, curve_b, n)


def _sampled_overlap(curve_a, curve_b, n=512):
    pa = curve_a.sample(n)
    pb = curve_b.sample(n)
    return (
        winding_number(pb, pa[0]) != 0
        or winding_number(pa, pb[0]) != 0
    )


@dataclass
class AdmissibilityReport:
    separation_ok: bool
    containment_ok: bool
    log_bound_ok: bool
    failures: list

    @property
    def ok(self):
        return self.separation_ok and self.containment_ok and self.log_bound_ok


def admissibility_check(config, n=256):
    """Sampled admissibility diagnostics for a configuration.

    Checks hole separation at eps2 = +-delta2, containment of both scaled
    holes in the outer region at the corners of the parameter rectangle,
    and the bound delta1*delta2 < 1 needed for log|eps1*eps2| < 0.
    """
    failures = []

    separation_ok = True
    for e2 in (config.delta2, -config.delta2):
        a = config.hole1.affine(shift=config.p1, factor=e2)
        b = config.hole2.affine(shift=config.p2, factor=e2)
        if not _sampled_separated(a, b, n):
            separation_ok = False
            pa = a.sample(n)
            pb = b.sample(n)
            d = pa[:, None, :] - pb[None, :, :]
            k = np.unravel_index(np.argmin((d**2).sum(-1)), (n, n))
            failures.append(("separation", f"eps2={e2}", pa[k[0]].tolist()))

    containment_ok = True
    outer_poly = config.outer.sample(max(n, 512))
    for e1 in (config.delta1, -config.delta1):
        for e2 in (config.delta2, -config.delta2):
            for i in (1, 2):
                c = config.hole(i).affine(
                    shift=e1 * config.anchor(i), factor=e1 * e2
                )
                pts = c.sample(n)
                inside = np.array([winding_number(outer_poly, q) != 0 for q in pts])
                if not inside.all():
                    containment_ok = False
                    bad = pts[~inside][0]
                    failures.append(
                        ("containment", f"hole{i}, eps=({e1},{e2})", bad.tolist())
                    )

    log_bound_ok = config.delta1 * config.delta2 < 1.0
    if not log_bound_ok:
        failures.append(
            ("log_bound", f"delta1*delta2 = {config.delta1 * config.delta2}", None)
        )

    return AdmissibilityReport(separation_ok, containment_ok, log_bound_ok, failures)


def require_admissible(config, n=256):
    report = admissibility_check(config, n=n)
    if not report.ok:
        raise AdmissibilityError(f"admissibility failed: {report.failures}")
    return report

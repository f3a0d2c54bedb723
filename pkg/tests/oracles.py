"""Independent reference computations used only by the test suite.

These never call the code paths they check: image formulas for disks,
adaptive quadrature of the raw kernels, radial harmonic interpolation,
and offset-contour flux quadrature by finite differences.
"""

import numpy as np
from scipy.integrate import quad

TWO_PI = 2.0 * np.pi


def disk_corrector(x, y, radius=1.0):
    """Interior harmonic on a disk with boundary data S(x - .), by images."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(x)
    if r == 0.0:
        return np.log(radius) / TWO_PI
    image = radius**2 * x / r**2
    return np.log(r * np.linalg.norm(y - image) / radius) / TWO_PI


def disk_green(x, y, radius=1.0):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.log(np.linalg.norm(x - y)) / TWO_PI - disk_corrector(x, y, radius)


def adaptive_single_layer(curve, density_fn, s_target):
    """On-boundary single layer by adaptive quadrature of the raw log kernel.

    Splits the parameter interval at the target so the endpoint log
    singularity is handled by the quadrature routine.
    """
    x = curve.points(np.array([s_target]))[0]

    def integrand(t):
        y = curve.points(np.array([t]))[0]
        speed = curve.speeds(np.array([t]))[0]
        return np.log(np.linalg.norm(x - y)) / TWO_PI * density_fn(t) * speed

    total = 0.0
    for a, b in ((s_target, s_target + np.pi), (s_target + np.pi, s_target + TWO_PI)):
        val, _ = quad(integrand, a, b, limit=400, epsabs=1e-13, epsrel=1e-13)
        total += val
    return total


def annulus_harmonic(r, inner_radius, outer_value=0.0, inner_value=1.0):
    """Radial harmonic on the annulus (inner_radius, 1) with constant data."""
    t = np.log(r) / np.log(inner_radius)
    return outer_value + (inner_value - outer_value) * t


def fd_flux_on_circle(field, center, radius, n=256, step=1e-4):
    """Outward flux through a circle by central finite differences.

    The field only needs pointwise evaluation; this is deliberately
    independent of any analytic gradient the field may carry.
    """
    ang = TWO_PI * np.arange(n) / n
    nu = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    pts = np.asarray(center)[None, :] + radius * nu
    plus = field.evaluate(pts + step * nu)
    minus = field.evaluate(pts - step * nu)
    dn = (plus - minus) / (2.0 * step)
    return float((dn * radius * TWO_PI / n).sum())

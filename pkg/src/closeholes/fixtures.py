"""Canonical geometries shared by the test suite and the CLI.

Three fixtures cover every oracle in the package:

* ``fix-disk``   -- unit disk with one concentric circular hole (annulus
  oracles, image-formula Green function).
* ``fix-twin``   -- radius-4 outer disk, two unit-disk holes anchored at
  (-1, 0) and (1, 0), delta1 = 0.5, delta2 = 0.9.
* ``fix-sym``    -- fix-twin with hole2 the point reflection of hole1
  (an off-center ellipse) and f2 induced by f1 through the reflection.

The outer domain of the underlying problem is never fixed by the theory;
these shapes are this artifact's choice.
"""

from __future__ import annotations

import numpy as np

from .geometry import Curve, ProblemConfig, TrigPoly, circle, ellipse


def fix_disk_config(hole_radius=0.5):
    """Annulus geometry: unit outer circle, concentric hole of given radius."""
    if not 0.0 < hole_radius < 1.0:
        raise ValueError("hole radius must lie in (0, 1)")
    return circle(1.0), circle(hole_radius)


def fix_twin(f_outer=None, f_hole1=None, f_hole2=None):
    """Radius-4 disk with two unit-disk holes at p = (-1, 0) and (1, 0)."""
    return ProblemConfig(
        outer=circle(4.0),
        hole1=circle(1.0),
        hole2=circle(1.0),
        p1=np.array([-1.0, 0.0]),
        p2=np.array([1.0, 0.0]),
        delta1=0.5,
        delta2=0.9,
        f_outer=f_outer or TrigPoly(),
        f_hole1=f_hole1 or TrigPoly(1.0),
        f_hole2=f_hole2 or TrigPoly(1.0),
        name="fix-twin",
    )


# Off-center ellipse: not invariant under point reflection, so hole2 = -hole1
# is a genuinely different shape and the symmetry checks are non-trivial.
_SYM_ELLIPSE = dict(a=0.8, b=0.55, center=(0.2, 0.1), angle=np.deg2rad(25.0))


def fix_sym(f_outer=None, f_hole1=None):
    """fix-twin variant with hole2 = -hole1 and f2(x) = f1(-x).

    Because hole2 is parametrized as s -> -position1(s), the reflected
    datum coincides with f1 as a function of the parameter.
    """
    hole1 = ellipse(**_SYM_ELLIPSE)
    f1 = f_hole1 or TrigPoly(1.0, cos=(0.4,), sin=(0.0, 0.25))
    return ProblemConfig(
        outer=circle(4.0),
        hole1=hole1,
        hole2=-hole1,
        p1=np.array([-1.0, 0.0]),
        p2=np.array([1.0, 0.0]),
        delta1=0.5,
        delta2=0.9,
        f_outer=f_outer or TrigPoly(),
        f_hole1=f1,
        f_hole2=f1,
        name="fix-sym",
    )


FIXTURES = {
    "fix-twin": fix_twin,
    "fix-sym": fix_sym,
}


def get_fixture(name, **data):
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise KeyError(
            f"unknown fixture {name!r}; available: {sorted(FIXTURES)}"
        ) from None
    return factory(**data)

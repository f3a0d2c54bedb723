"""Experiment configuration files (TOML).

A configuration names a fixture or spells out the three reference
curves, sets the boundary data as trigonometric polynomials in the curve
parameter, and describes one experiment.  Parse errors carry the
offending key path.
"""

from __future__ import annotations

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:                       # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .fixtures import get_fixture
from .geometry import ProblemConfig, TrigPoly, circle, ellipse, fourier_curve, star

EXPERIMENTS = (
    "validate_representation",
    "asymptotic_sweep",
    "symmetry_check",
    "convergence_study",
    "bundle_dump",
)


def load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


_SENTINEL = object()


def _get(table, key, kind, where, default=_SENTINEL):
    if key not in table:
        if default is not _SENTINEL:
            return default
        raise ConfigError(f"missing key '{where}.{key}'")
    value = table[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(
            f"key '{where}.{key}' must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def parse_curve(table, where, other=None):
    shape = _get(table, "shape", str, where)
    if shape == "circle":
        return circle(
            radius=_get(table, "radius", float, where),
            center=_get(table, "center", list, where, default=[0.0, 0.0]),
        )
    if shape == "ellipse":
        return ellipse(
            a=_get(table, "a", float, where),
            b=_get(table, "b", float, where),
            center=_get(table, "center", list, where, default=[0.0, 0.0]),
            angle=np.deg2rad(_get(table, "angle_deg", float, where, default=0.0)),
        )
    if shape == "star":
        return star(
            base=_get(table, "base", float, where),
            amplitude=_get(table, "amplitude", float, where),
            arms=int(_get(table, "arms", int, where, default=5)),
            center=_get(table, "center", list, where, default=[0.0, 0.0]),
        )
    if shape == "fourier":
        return fourier_curve(
            _get(table, "xcos", list, where),
            _get(table, "xsin", list, where, default=[]),
            _get(table, "ycos", list, where),
            _get(table, "ysin", list, where, default=[]),
        )
    if shape == "negate":
        if other is None:
            raise ConfigError(f"'{where}.shape = negate' needs hole1 defined first")
        return -other
    raise ConfigError(f"unknown shape '{shape}' at '{where}.shape'")


def parse_data(table, where):
    return TrigPoly(
        constant=_get(table, "constant", float, where, default=0.0),
        cos=_get(table, "cos", list, where, default=[]),
        sin=_get(table, "sin", list, where, default=[]),
    )


def problem_from_tables(doc):
    """Build a ProblemConfig from a parsed document."""
    prob = doc.get("problem", {})
    data = doc.get("data", {})
    data_kwargs = {}
    for key, target in (("outer", "f_outer"), ("hole1", "f_hole1"), ("hole2", "f_hole2")):
        if key in data:
            data_kwargs[target] = parse_data(data[key], f"data.{key}")
    fixture = prob.get("fixture")
    if fixture is not None:
        try:
            base = get_fixture(fixture)
        except KeyError as exc:
            raise ConfigError(f"problem.fixture: {exc}") from None
        return base.with_data(**data_kwargs) if data_kwargs else base
    for key in ("outer", "hole1", "hole2", "anchors"):
        if key not in prob:
            raise ConfigError(f"missing table 'problem.{key}' (or 'problem.fixture')")
    outer = parse_curve(prob["outer"], "problem.outer")
    hole1 = parse_curve(prob["hole1"], "problem.hole1")
    hole2 = parse_curve(prob["hole2"], "problem.hole2", other=hole1)
    anchors = prob["anchors"]
    return ProblemConfig(
        outer=outer,
        hole1=hole1,
        hole2=hole2,
        p1=np.asarray(_get(anchors, "p1", list, "problem.anchors"), dtype=float),
        p2=np.asarray(_get(anchors, "p2", list, "problem.anchors"), dtype=float),
        delta1=_get(anchors, "delta1", float, "problem.anchors"),
        delta2=_get(anchors, "delta2", float, "problem.anchors"),
        name="config-file",
        **data_kwargs,
    )


def experiment_from_tables(doc):
    """Extract (kind, parameters) from the experiment table."""
    exp = doc.get("experiment")
    if exp is None:
        raise ConfigError("missing table 'experiment'")
    kind = _get(exp, "kind", str, "experiment")
    if kind not in EXPERIMENTS:
        raise ConfigError(
            f"experiment.kind must be one of {EXPERIMENTS}, got '{kind}'"
        )
    return kind, exp

import numpy as np
import pytest

from closeholes.errors import AdmissibilityError, GeometryError
from closeholes.fixtures import fix_twin
from closeholes.geometry import (
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

TWO_PI = 2.0 * np.pi


def test_scaled_hole_unit_disk():
    cfg = fix_twin()
    curve = scaled_hole(cfg, 1, EpsilonPair(0.1, 0.5))
    s = np.linspace(0.0, TWO_PI, 40, endpoint=False)
    pts = curve.points(s)
    center = np.array([-0.1, 0.0])
    radii = np.linalg.norm(pts - center, axis=1)
    assert np.allclose(radii, 0.05, atol=1e-15)


def test_scaled_hole_degenerate_rejected():
    cfg = fix_twin()
    with pytest.raises(GeometryError, match="degenerate"):
        scaled_hole(cfg, 1, EpsilonPair(0.0, 0.5))
    with pytest.raises(GeometryError, match="degenerate"):
        scaled_hole(cfg, 2, EpsilonPair(0.3, 0.0))


def test_scaled_ellipse_area_shoelace():
    cfg = fix_twin()
    cfg = ProblemConfig(
        outer=cfg.outer, hole1=ellipse(1.0, 0.5), hole2=cfg.hole2,
        p1=cfg.p1, p2=cfg.p2, delta1=cfg.delta1, delta2=cfg.delta2,
    )
    curve = scaled_hole(cfg, 1, EpsilonPair(0.2, 0.2))
    # semi-axes 0.04 and 0.02 centered at 0.2 * p1
    assert abs(curve.enclosed_area() - np.pi * 8e-4) < 1e-15
    pts = curve.points(np.array([0.0, np.pi / 2]))
    assert np.allclose(pts[0], [-0.2 + 0.04, 0.0], atol=1e-15)
    assert np.allclose(pts[1], [-0.2, 0.02], atol=1e-15)


def test_tilde_domain_gap_and_equivalence():
    cfg = fix_twin()
    a, b = tilde_domain(cfg, 0.5)
    pa = a.sample(256)
    pb = b.sample(256)
    gap = np.sqrt(((pa[:, None] - pb[None, :]) ** 2).sum(-1)).min()
    assert abs(gap - 1.0) < 1e-12
    # pointwise identical to the generic scaling with eps1 = 1
    s = np.linspace(0, TWO_PI, 33, endpoint=False)
    for i, c in ((1, a), (2, b)):
        d = scaled_hole(cfg, i, EpsilonPair(1.0, 0.5))
        assert np.allclose(c.points(s), d.points(s), atol=1e-15)


def test_tilde_domain_min_distance_matches_bruteforce():
    cfg = fix_twin()
    cfg = ProblemConfig(
        outer=cfg.outer, hole1=ellipse(1.0, 0.6), hole2=ellipse(0.9, 0.7),
        p1=cfg.p1, p2=cfg.p2, delta1=cfg.delta1, delta2=cfg.delta2,
    )
    a, b = tilde_domain(cfg, 0.3)
    pa, pb = a.sample(800), b.sample(800)
    brute = np.sqrt(((pa[:, None] - pb[None, :]) ** 2).sum(-1)).min()
    from closeholes.geometry import min_curve_distance

    assert abs(min_curve_distance(a, b, n=800) - brute) < 1e-14


def test_tilde_domain_rejections():
    cfg = fix_twin()
    with pytest.raises(GeometryError, match="degenerate"):
        tilde_domain(cfg, 0.0)
    with pytest.raises(GeometryError, match="separation"):
        tilde_domain(cfg, 1.0)      # unit disks at distance 2 touch


def test_admissibility_fix_twin_passes():
    report = admissibility_check(fix_twin())
    assert report.ok
    assert report.failures == []


def test_admissibility_separation_failure():
    cfg = fix_twin()
    bad = ProblemConfig(
        outer=cfg.outer, hole1=cfg.hole1, hole2=cfg.hole2,
        p1=cfg.p1, p2=cfg.p2, delta1=0.5, delta2=1.1,
    )
    report = admissibility_check(bad)
    assert not report.separation_ok
    assert any(f[0] == "separation" for f in report.failures)
    worse = ProblemConfig(
        outer=cfg.outer, hole1=cfg.hole1, hole2=cfg.hole2,
        p1=cfg.p1, p2=cfg.p2, delta1=1.2, delta2=1.1,
    )
    assert not admissibility_check(worse).log_bound_ok


def test_admissibility_containment_failure():
    cfg = fix_twin()
    bad = ProblemConfig(
        outer=cfg.outer, hole1=cfg.hole1, hole2=cfg.hole2,
        p1=np.array([-9.0, 0.0]), p2=np.array([9.0, 0.0]),
        delta1=0.5, delta2=0.9,
    )
    report = admissibility_check(bad)
    assert not report.containment_ok
    check, detail, point = next(f for f in report.failures if f[0] == "containment")
    assert point is not None


def test_divergence_theorem_normal_identity():
    # integral of nu . x over the curve equals twice the enclosed area
    for curve in (circle(1.5), ellipse(1.0, 0.4), star(1.0, 0.25, 5)):
        n = 512
        s = TWO_PI * np.arange(n) / n
        pts = curve.points(s)
        nu = curve.normals(s)
        speeds = curve.speeds(s)
        integral = ((nu * pts).sum(axis=1) * speeds).sum() * TWO_PI / n
        assert abs(integral - 2.0 * curve.enclosed_area()) < 1e-10


def test_scaling_commutes_with_rotation():
    cfg = fix_twin()
    base = ellipse(1.0, 0.5)
    angle = 0.7
    cfg_rot = ProblemConfig(
        outer=cfg.outer, hole1=base.rotated(angle), hole2=cfg.hole2,
        p1=cfg.p1, p2=cfg.p2, delta1=cfg.delta1, delta2=cfg.delta2,
    )
    cfg_raw = ProblemConfig(
        outer=cfg.outer, hole1=base, hole2=cfg.hole2,
        p1=cfg.p1, p2=cfg.p2, delta1=cfg.delta1, delta2=cfg.delta2,
    )
    eps = EpsilonPair(0.3, 0.4)
    scaled_then_rotated = scaled_hole(cfg_raw, 1, eps)
    rotated_then_scaled = scaled_hole(cfg_rot, 1, eps)
    s = np.linspace(0, TWO_PI, 64, endpoint=False)
    center = eps.eps1 * cfg.p1
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    manual = center + (scaled_then_rotated.points(s) - center) @ rot.T
    assert np.allclose(manual, rotated_then_scaled.points(s), atol=1e-14)


def test_curve_validation():
    circle(2.0).validate()
    star(1.0, 0.3, 7).validate()
    # a figure-eight style curve self-intersects
    bad = fourier_curve([0.0, 1.0], [], [0.0], [0.0, 1.0])
    with pytest.raises(GeometryError):
        bad.validate()


def test_epsilon_regimes_and_bounds():
    cfg = fix_twin()
    assert cfg.epsilon(0.3, 0.5).regime == "generic"
    assert EpsilonPair(0.0, 0.5).regime == "eps1_zero"
    assert EpsilonPair(0.3, 0.0).regime == "eps2_zero"
    assert EpsilonPair(0.0, 0.0).regime == "both_zero"
    with pytest.raises(AdmissibilityError):
        cfg.epsilon(0.6, 0.5)
    with pytest.raises(AdmissibilityError):
        cfg.epsilon(0.3, 0.95)


def test_negative_parameters_supported():
    cfg = fix_twin()
    curve = scaled_hole(cfg, 1, EpsilonPair(-0.2, 0.4))
    # orientation-preserving: the enclosed area stays positive
    assert curve.enclosed_area() > 0.0
    pts = curve.points(np.array([0.0]))
    assert np.allclose(pts[0], [0.2 - 0.08, 0.0], atol=1e-15)


def test_trig_poly_roundtrip():
    f = TrigPoly(0.5, cos=(1.0, 0.0, 0.2), sin=(0.3,))
    s = np.linspace(0, TWO_PI, 7)
    expected = 0.5 + np.cos(s) + 0.2 * np.cos(3 * s) + 0.3 * np.sin(s)
    assert np.allclose(f(s), expected)
    assert f.as_dict()["cos"] == [1.0, 0.0, 0.2]

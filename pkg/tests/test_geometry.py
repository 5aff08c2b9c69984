"""Tests the curve and surface primitives"""

import math

import numpy as np
import pytest

from brepmesh.exceptions import GeometryError
from brepmesh.geometry import (
    BSplineCurve,
    BSplinePatch,
    CircularArc,
    Cone,
    Cylinder,
    LineSegment,
    Plane,
    Sphere,
    Torus,
    curve_closest_point,
    curve_eval,
    surface_closest_point,
    surface_eval,
)
from brepmesh.geometry._tools import angle_to_param, golden_section

Z = (0.0, 0.0, 1.0)

# -----------------------------------------------------------------------------


def test_line_segment():
    line = LineSegment((0, 0, 0), (2, 0, 0))
    assert np.allclose(curve_eval(line, 0.5), (1, 0, 0))
    assert np.allclose(line.eval([0.0, 1.0]), [(0, 0, 0), (2, 0, 0)])
    assert line.length() == pytest.approx(2.0)
    assert not line.closed

    t, d = curve_closest_point(line, (0.5, 1.0, 0.0))
    assert t == pytest.approx(0.25)
    assert d == pytest.approx(1.0)

    # Projection is clamped to the segment
    t, d = line.closest_point((-1.0, 0.0, 0.0))
    assert t == 0.0
    assert d == pytest.approx(1.0)

    # Parameters slightly outside are clamped, further outside rejected
    assert np.allclose(line.eval(1.0 + 1e-13), (2, 0, 0))
    with pytest.raises(ValueError, match="outside of the unit interval"):
        line.eval(1.1)

    with pytest.raises(GeometryError, match="three finite values"):
        LineSegment((0, 0), (1, 0, 0))


def test_circular_arc():
    circle = CircularArc((0, 0, 0), Z, 2.0)
    assert circle.closed
    assert np.allclose(circle.eval(0.0), (2, 0, 0))
    assert np.allclose(circle.eval(0.25), (0, 2, 0))
    assert circle.length(n=4096) == pytest.approx(4 * math.pi, rel=1e-5)

    t, d = circle.closest_point((0.0, -3.0, 0.0))
    assert t == pytest.approx(0.75)
    assert d == pytest.approx(1.0)

    # Reference direction and negative spans
    arc = CircularArc(
        (0, 0, 0),
        Z,
        1.0,
        angles=(0.0, -0.5 * math.pi),
        ref_direction=(0, 1, 0),
    )
    assert not arc.closed
    assert np.allclose(arc.eval(0.0), (0, 1, 0))
    assert np.allclose(arc.eval(1.0), (1, 0, 0))

    # Points off the arc snap to the angularly closer end
    t, _ = arc.closest_point((-1.0, 0.1, 0.0))
    assert t == 0.0

    c, c1, c2 = arc.derivatives(0.5)
    assert np.dot(c - arc.center, c1) == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(c2) == pytest.approx((0.5 * math.pi) ** 2)

    with pytest.raises(GeometryError, match="radius must be positive"):
        CircularArc((0, 0, 0), Z, 0.0)
    with pytest.raises(GeometryError, match="span must be non-zero"):
        CircularArc((0, 0, 0), Z, 1.0, angles=(1.0, 1.0))
    with pytest.raises(GeometryError, match="not be parallel"):
        CircularArc((0, 0, 0), Z, 1.0, ref_direction=(0, 0, 2))


def test_bspline_curve():
    # A degree-1 spline through three points is a polyline
    ctrl = [(0, 0, 0), (1, 0, 0), (1, 1, 0)]
    spline = BSplineCurve(1, [0, 0, 1, 2, 2], ctrl)
    assert np.allclose(spline.eval(0.0), (0, 0, 0))
    assert np.allclose(spline.eval(0.5), (1, 0, 0))
    assert np.allclose(spline.eval(1.0), (1, 1, 0))
    assert spline.length() == pytest.approx(2.0)

    # Generic closest-point search
    t, d = spline.closest_point((0.5, -0.5, 0.0))
    assert t == pytest.approx(0.25, abs=1e-8)
    assert d == pytest.approx(0.5, abs=1e-8)

    t, d = spline.closest_point((1.5, 0.5, 0.0), hint=0.76)
    assert t == pytest.approx(0.75, abs=1e-8)
    assert d == pytest.approx(0.5, abs=1e-8)

    # A cubic with a clamped knot vector interpolates its ends
    cubic = BSplineCurve(
        3,
        [0, 0, 0, 0, 1, 1, 1, 1],
        [(0, 0, 0), (1, 1, 0), (2, 1, 0), (3, 0, 0)],
    )
    assert np.allclose(cubic.eval([0.0, 1.0]), [(0, 0, 0), (3, 0, 0)])
    _, _, c2 = cubic.derivatives(0.5)
    assert np.linalg.norm(c2) > 0.0

    with pytest.raises(GeometryError, match="needs 5 entries"):
        BSplineCurve(1, [0, 1, 2], ctrl)
    with pytest.raises(GeometryError, match="non-decreasing"):
        BSplineCurve(1, [0, 0, 2, 1, 2], ctrl)
    with pytest.raises(GeometryError, match="between 1 and 3"):
        BSplineCurve(4, [0] * 8, ctrl)


def de_casteljau(ctrl, t: float) -> np.ndarray:
    """Evaluates a Bezier curve by repeated linear interpolation along the
    first axis of its control points"""
    pts = np.asarray(ctrl, dtype=float)
    while len(pts) > 1:
        pts = (1.0 - t) * pts[:-1] + t * pts[1:]
    return pts[0]


def test_bspline_curve_bezier():
    ctrl = [(0, 0, 0), (1, 2, 0), (2, -2, 0), (3, 0, 0)]
    cubic = BSplineCurve(3, [0, 0, 0, 0, 1, 1, 1, 1], ctrl)
    assert np.allclose(cubic.eval(0.5), (1.5, 0.0, 0.0))

    rng = np.random.default_rng(5)
    for t in rng.uniform(0.0, 1.0, size=50):
        assert np.allclose(cubic.eval(t), de_casteljau(ctrl, t), atol=1e-12)


def test_plane():
    plane = Plane((0, 0, 1), (2, 0, 0), (0, 3, 0))
    assert np.allclose(surface_eval(plane, 0.5, 0.5), (1, 1.5, 1))
    assert plane.periodic == (False, False)
    assert plane.singular_sides == frozenset()
    assert np.allclose(plane.normal(0.2, 0.3), Z)

    u, v, d = surface_closest_point(plane, (1.0, 1.5, 3.0))
    assert (u, v) == pytest.approx((0.5, 0.5))
    assert d == pytest.approx(2.0)

    with pytest.raises(GeometryError, match="parallel"):
        Plane((0, 0, 0), (1, 0, 0), (2, 0, 0))


def test_cylinder():
    cyl = Cylinder((0, 0, 0), Z, 0.5, heights=(0.0, 2.0))
    assert cyl.periodic == (True, False)
    assert cyl.singular_sides == frozenset()

    # The periodic direction identifies 1 with 0 exactly
    assert np.array_equal(cyl.eval(1.0, 0.3), cyl.eval(0.0, 0.3))

    u, v, d = cyl.closest_point((0.0, 1.0, 1.0))
    assert u == pytest.approx(0.25)
    assert v == pytest.approx(0.5)
    assert d == pytest.approx(0.5)

    with pytest.raises(GeometryError, match="radius must be positive"):
        Cylinder((0, 0, 0), Z, -1.0)


def test_sphere_and_cone_singularities():
    sphere = Sphere((0, 0, 0), 1.0)
    assert sphere.periodic == (True, False)
    assert sphere.singular_sides == frozenset(("v0", "v1"))
    assert np.allclose(sphere.eval(0.3, 0.0), Z)
    assert np.allclose(sphere.normal(0.3, 0.0), 0.0)

    u, v, d = sphere.closest_point((0.0, 2.0, 0.0))
    assert (u, v) == pytest.approx((0.25, 0.5))
    assert d == pytest.approx(1.0)

    cone = Cone((0, 0, 0), Z, math.pi / 4, heights=(0.0, 1.0))
    assert cone.periodic == (True, False)
    assert cone.singular_sides == frozenset(("v0",))

    # A point on the mantle projects onto itself
    p = cone.eval(0.125, 0.5)
    u, v, d = cone.closest_point(p)
    assert (u, v) == pytest.approx((0.125, 0.5))
    assert d == pytest.approx(0.0, abs=1e-12)

    with pytest.raises(GeometryError, match="half angle"):
        Cone((0, 0, 0), Z, math.pi)
    with pytest.raises(GeometryError, match="within"):
        Sphere((0, 0, 0), 1.0, colatitudes=(0.0, 4.0))


def test_torus():
    torus = Torus((0, 0, 0), Z, 2.0, 0.5)
    assert torus.periodic == (True, True)
    assert torus.singular_sides == frozenset()
    assert np.allclose(torus.eval(0.0, 0.0), (2.5, 0, 0))

    u, v, d = torus.closest_point((0.0, 4.0, 0.0))
    assert (u, v) == pytest.approx((0.25, 0.0))
    assert d == pytest.approx(1.5)

    with pytest.raises(GeometryError, match="major > minor"):
        Torus((0, 0, 0), Z, 1.0, 2.0)


def test_bspline_patch():
    # A bilinear patch spanning the unit square
    ctrl = [[(0, 0, 0), (0, 1, 0)], [(1, 0, 0), (1, 1, 0)]]
    patch = BSplinePatch((1, 1), [0, 0, 1, 1], [0, 0, 1, 1], ctrl)
    assert np.allclose(patch.eval(0.25, 0.75), (0.25, 0.75, 0))
    assert patch.periodic == (False, False)

    # Generic closest point, with and without hint
    u, v, d = patch.closest_point((0.3, 0.6, 0.2))
    assert (u, v) == pytest.approx((0.3, 0.6), abs=1e-7)
    assert d == pytest.approx(0.2, abs=1e-7)

    u, v, d = patch.closest_point((0.3, 0.6, 0.2), hint=(0.35, 0.55))
    assert (u, v) == pytest.approx((0.3, 0.6), abs=1e-7)

    # Partials of a bilinear patch
    _, su, sv, suu, _, svv = patch.partials(0.5, 0.5)
    assert np.allclose(su, (1, 0, 0))
    assert np.allclose(sv, (0, 1, 0))
    assert np.allclose(suu, 0.0) and np.allclose(svv, 0.0)

    with pytest.raises(GeometryError, match="shape"):
        BSplinePatch((1, 1), [0, 0, 1, 1], [0, 0, 1, 1], [(0, 0, 0)])


def bicubic_patch(seed: int = 0):
    """A bicubic Bezier patch over the unit square with random heights"""
    rng = np.random.default_rng(seed)
    ctrl = np.array(
        [
            [(i / 3, j / 3, rng.uniform(-0.3, 0.3)) for j in range(4)]
            for i in range(4)
        ]
    )
    knots = [0, 0, 0, 0, 1, 1, 1, 1]
    return BSplinePatch((3, 3), knots, knots, ctrl), ctrl


def test_bspline_patch_bezier():
    patch, ctrl = bicubic_patch()

    def oracle(u, v):
        return de_casteljau([de_casteljau(row, v) for row in ctrl], u)

    assert np.allclose(patch.eval(0.25, 0.75), oracle(0.25, 0.75))

    rng = np.random.default_rng(6)
    for u, v in rng.uniform(0.0, 1.0, size=(30, 2)):
        assert np.allclose(patch.eval(u, v), oracle(u, v), atol=1e-12)


def test_bspline_patch_closest_point():
    patch, _ = bicubic_patch(seed=1)
    diag = patch.scale

    s = np.linspace(0.0, 1.0, 1024)
    uu, vv = np.meshgrid(s, s, indexing="ij")
    grid = patch.eval(uu, vv).reshape(-1, 3)

    rng = np.random.default_rng(7)
    for u0, v0 in rng.uniform(0.1, 0.9, size=(12, 2)):
        p = patch.eval(u0, v0) + rng.uniform(0.05, 0.2) * patch.normal(u0, v0)
        p = p + rng.normal(scale=0.05, size=3)
        brute = np.linalg.norm(grid - p, axis=1).min()

        u, v, d = patch.closest_point(p)
        assert 0.0 <= u <= 1.0 and 0.0 <= v <= 1.0
        assert d == pytest.approx(np.linalg.norm(patch.eval(u, v) - p))

        # Never worse than the dense grid, and the grid is only coarsely
        # worse than the true minimum
        assert d <= brute + 1e-10 * diag
        assert d >= brute - 1e-5 * diag


def test_padded_surface():
    flat = Cylinder((0, 0, 0), Z, 0.5, heights=(0.0, 1e-12))
    padded = flat.padded(1e-6)

    assert padded is not flat
    assert padded.heights[1] - padded.heights[0] == pytest.approx(2e-6)
    assert np.mean(padded.heights) == pytest.approx(np.mean(flat.heights))
    height = padded.eval(0.0, 1.0)[2] - padded.eval(0.0, 0.0)[2]
    assert height == pytest.approx(2e-6)

    # The original is left alone
    assert flat.heights[1] - flat.heights[0] < 1e-9

    # Ranges that are wide enough are not touched
    cyl = Cylinder((0, 0, 0), Z, 0.5, heights=(0.0, 2.0))
    assert cyl.padded(1e-6) is cyl


# -----------------------------------------------------------------------------


def test_angle_to_param():
    assert angle_to_param(0.0, 0.0, math.pi) == 0.0
    assert angle_to_param(0.5 * math.pi, 0.0, math.pi) == pytest.approx(0.5)

    # Wraps around
    assert angle_to_param(-0.5 * math.pi, 0.0, 2 * math.pi) == pytest.approx(
        0.75
    )

    # Outside of the range: closer end
    assert angle_to_param(-0.1, 0.0, math.pi) == 0.0
    assert angle_to_param(math.pi + 0.1, 0.0, math.pi) == 1.0

    # Negative range direction
    assert angle_to_param(-0.25 * math.pi, 0.0, -math.pi) == pytest.approx(
        0.25
    )


def test_golden_section():
    x, fx = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.3, abs=1e-7)
    assert fx == pytest.approx(0.0, abs=1e-14)

    # Monotonic functions have their minimum at an interval end
    x, _ = golden_section(lambda x: x, 0.2, 0.7)
    assert x == 0.2

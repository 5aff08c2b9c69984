"""Tests the sampling of curves and surface patches"""

import math

import numpy as np
import pytest

from brepmesh.cfg import SamplingBudget
from brepmesh.exceptions import ResourceLimitError
from brepmesh.geometry import CircularArc, Cylinder, LineSegment, Plane, Sphere
from brepmesh.mesh import is_disk
from brepmesh.sampling import (
    QUADRATURE_POINTS,
    QUADRATURE_WEIGHTS,
    SampledCurve,
    chord_deviation,
    initial_grid_size,
    mesh_patch,
    sample_curve,
    triangle_deviation,
)

Z = (0.0, 0.0, 1.0)

# -----------------------------------------------------------------------------


def budget(epsilon: float, **kwargs) -> SamplingBudget:
    kwargs = dict(dict(max_edge_fraction=1.0, diagonal=1.0), **kwargs)
    return SamplingBudget(epsilon=epsilon, **kwargs)


# -----------------------------------------------------------------------------


def test_sample_quarter_circle():
    """A quarter circle of unit radius needs eight segments for a chord
    deviation of 0.01"""
    arc = CircularArc((0, 0, 0), (0, 0, 1), 1.0, angles=(0.0, 0.5 * math.pi))
    sampled = sample_curve(arc, budget(0.01), bedge=3)

    assert sampled.bedge == 3
    assert sampled.num_segments == 8
    assert np.allclose(sampled.t, np.linspace(0.0, 1.0, 9))
    assert np.allclose(sampled.points[0], (1, 0, 0))
    assert np.allclose(sampled.points[-1], (0, 1, 0))

    # Every segment stays within the tolerance
    for t0, t1 in zip(sampled.t[:-1], sampled.t[1:]):
        assert chord_deviation(arc, t0, t1) <= 0.01

    # A smaller tolerance gives more points
    finer = sample_curve(arc, budget(0.001))
    assert finer.num_segments == 32
    assert sampled.length < finer.length <= 0.5 * math.pi


def test_sample_curve_special_cases():
    line = LineSegment((0, 0, 0), (3, 0, 0))
    sampled = sample_curve(line, budget(1e-6))
    assert len(sampled) == 2
    assert sampled.length == pytest.approx(3.0)
    assert chord_deviation(line, 0.0, 1.0) == pytest.approx(0.0, abs=1e-15)

    # Minimum number of points
    sampled = sample_curve(line, budget(1e-6), min_points=10)
    assert len(sampled) >= 10

    # Closed curves get at least four segments, regardless of the tolerance
    circle = CircularArc((0, 0, 0), (0, 0, 1), 1.0)
    sampled = sample_curve(circle, budget(10.0))
    assert sampled.num_segments == 4
    assert np.allclose(sampled.points[0], sampled.points[-1])

    # Explicit tolerance overrides the budget
    fine = sample_curve(circle, budget(10.0), epsilon=1e-3)
    assert fine.num_segments > 4


def test_sampled_curve_validation():
    with pytest.raises(ValueError, match="at least two points"):
        SampledCurve(bedge=0, t=[0.0], points=[(0, 0, 0)])
    with pytest.raises(ValueError, match="span"):
        SampledCurve(bedge=0, t=[0.0, 0.5], points=[(0, 0, 0), (1, 0, 0)])
    with pytest.raises(ValueError, match="increase"):
        SampledCurve(
            bedge=0,
            t=[0.0, 0.6, 0.4, 1.0],
            points=np.zeros((4, 3)),
        )


# -----------------------------------------------------------------------------


def test_quadrature_rule():
    assert QUADRATURE_WEIGHTS.sum() == pytest.approx(1.0)
    assert np.allclose(QUADRATURE_POINTS.sum(axis=1), 1.0)

    # Exact for polynomials up to degree 5; compare mean values over the
    # reference triangle with corners (0, 0), (1, 0) and (0, 1)
    x, y = QUADRATURE_POINTS[:, 1], QUADRATURE_POINTS[:, 2]
    assert QUADRATURE_WEIGHTS @ x**2 == pytest.approx(1 / 6)
    assert QUADRATURE_WEIGHTS @ (x**2 * y) == pytest.approx(1 / 30)
    assert QUADRATURE_WEIGHTS @ x**5 == pytest.approx(2 / 42)


def test_triangle_deviation():
    plane = Plane((0, 0, 0), (1, 0, 0), (0, 1, 0))
    uv = [(0, 0), (1, 0), (0, 1)]
    xyz = [(0, 0, 0), (1, 0, 0), (0, 1, 0)]
    assert triangle_deviation(plane, uv, xyz) == pytest.approx(
        (0.0, 0.0), abs=1e-15
    )

    # Lifting the triangle off the plane
    mean, mx = triangle_deviation(plane, uv, np.add(xyz, (0, 0, 0.1)))
    assert mean == pytest.approx(0.1)
    assert mx == pytest.approx(0.1)

    # Curved surfaces deviate from their chords
    sphere = Sphere((0, 0, 0), 1.0)
    uv = np.array([(0.1, 0.3), (0.2, 0.3), (0.1, 0.4)])
    xyz = sphere.eval(uv[:, 0], uv[:, 1])
    mean, mx = triangle_deviation(sphere, uv, xyz)
    assert 0.0 < mean <= mx

    # Parameter triangles of zero area have no mean deviation
    flat = [(0.1, 0.3), (0.2, 0.3), (0.3, 0.3)]
    flat_xyz = sphere.eval(*np.transpose(flat))
    mean, _ = triangle_deviation(sphere, flat, flat_xyz)
    assert mean == 0.0

    with pytest.raises(ValueError, match="order 5"):
        triangle_deviation(sphere, uv, xyz, order=3)


# -----------------------------------------------------------------------------


def test_mesh_patch_plane():
    plane = Plane((0, 0, 0), (1, 0, 0), (0, 1, 0))
    b = budget(1e-3, max_edge_fraction=0.1, diagonal=math.sqrt(2))
    mesh = mesh_patch(plane, b, face=4)

    assert is_disk(mesh)
    assert mesh.faces() == [4]
    assert mesh.scale == pytest.approx(math.sqrt(2))
    assert all(v in mesh.uv for v in mesh.vertices())
    for a, c in mesh.edges():
        assert mesh.edge_length(a, c) <= b.max_edge_length + 1e-12

    # Deterministic
    other = mesh_patch(plane, b, face=4)
    assert other.tris == mesh.tris


def test_mesh_patch_sphere():
    sphere = Sphere((0, 0, 0), 1.0)
    b = budget(0.01, max_edge_fraction=0.5, diagonal=2 * math.sqrt(3))
    mesh = mesh_patch(sphere, b)

    # The full parameter square is meshed, poles and seam included
    assert is_disk(mesh)
    for tid in mesh.tris:
        uv = [mesh.uv[v] for v in mesh.tris[tid]]
        _, dev = triangle_deviation(sphere, uv, mesh.tri_points(tid))
        assert dev <= 0.01 + 1e-12

    # A smaller tolerance needs more triangles
    finer = mesh_patch(sphere, b, epsilon=0.002)
    assert finer.num_triangles > mesh.num_triangles


def test_mesh_patch_triangle_cap():
    sphere = Sphere((0, 0, 0), 1.0)
    b = budget(1e-4, diagonal=2 * math.sqrt(3), max_triangles=50)

    # The initial grid is kept below the cap ...
    assert initial_grid_size(sphere, b) == 4

    # ... but the refinement exceeds it
    with pytest.raises(ResourceLimitError, match="cap of 50") as exc_info:
        mesh_patch(sphere, b, face=3)
    assert exc_info.value.face == 3
    assert "b-face 3" in str(exc_info.value)


def test_mesh_patch_tolerances():
    cyl = Cylinder((0, 0, 0), Z, 0.5, heights=(0.0, 2.0))
    diag = math.sqrt(6)

    counts = []
    for fraction in (0.1, 0.01, 0.001):
        mesh = mesh_patch(cyl, budget(fraction * diag, diagonal=diag))
        assert is_disk(mesh)
        counts.append(mesh.num_triangles)
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]


def test_mesh_patch_degenerate_domain():
    flat = Cylinder((0, 0, 0), Z, 0.5, heights=(0.0, 1e-12))

    def z_extent(mesh):
        z = [p[2] for p in mesh.positions.values()]
        return max(z) - min(z)

    mesh = mesh_patch(flat, budget(1e-3, domain_padding=1e-6))
    assert is_disk(mesh)
    assert z_extent(mesh) == pytest.approx(2e-6)

    # With the default padding the strip stays much thinner
    mesh = mesh_patch(flat, budget(1e-3))
    assert z_extent(mesh) < 1e-9

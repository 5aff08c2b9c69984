"""Tests the isotropic remeshing stage"""

import math

import numpy as np
import pytest

from brepmesh.cfg import RemeshConfig
from brepmesh.fixtures import build_fixture
from brepmesh.geometry import BSplineCurve, CircularArc
from brepmesh.mesh import is_disk
from brepmesh.remeshing import RemeshStats, Remesher, arc_midpoint, remesh

from ._fixtures import grid_mesh, meshed, plate_hole
from .test_stitching import label_bottom

# -----------------------------------------------------------------------------


def always_valid(mesh) -> bool:
    return True


def remesh_cfg(target: float, **kwargs) -> RemeshConfig:
    return RemeshConfig(target_edge_length=target, envelope_eps=1e-3, **kwargs)


# -----------------------------------------------------------------------------


def test_arc_midpoint():
    arc = CircularArc((0, 0, 0), (0, 0, 1), 1.0, angles=(0.0, math.pi))
    assert arc_midpoint(arc, 0.0, 1.0) == pytest.approx(0.5, abs=1e-3)
    assert arc_midpoint(arc, 0.2, 0.4) == pytest.approx(0.3, abs=1e-3)

    # The first leg of this polyline takes up a third of the parameter range
    # but half of the length
    polyline = BSplineCurve(
        1, [0, 0, 1, 3, 3], [(0, 0, 0), (1, 0, 0), (1, 1, 0)]
    )
    assert arc_midpoint(polyline, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-2)

    # Zero-length ranges
    assert arc_midpoint(arc, 0.3, 0.3) == 0.3


def test_remesh_stats():
    stats = RemeshStats(passes=2, splits=5)
    assert stats.to_dict() == dict(
        passes=2,
        splits=5,
        collapses=0,
        flips=0,
        smoothed=0,
        reverted_passes=0,
    )


# -----------------------------------------------------------------------------


def test_split_labeled_edge(plate_hole):
    mesh = label_bottom(grid_mesh(2), 2)
    remesher = Remesher(mesh, plate_hole, remesh_cfg(0.1))

    assert remesher.try_split(0, 1)
    m = mesh.num_vertices - 1
    assert np.allclose(mesh.positions[m], (0.25, 0, 0))
    assert mesh.bedge[m] == (0, pytest.approx(0.25))
    assert mesh.edge_label(0, m) == mesh.edge_label(m, 1) == 0
    assert not mesh.has_edge(0, 1)

    # Labeled edges are never flipped, b-vertices never moved
    assert not remesher.try_flip(m, 1)
    assert not remesher.try_smooth(0)


def test_remesh_coarsens(plate_hole):
    mesh = grid_mesh(4)
    num_triangles = mesh.num_triangles
    stats = RemeshStats()
    remesh(
        mesh,
        plate_hole,
        remesh_cfg(0.5),
        validator=always_valid,
        stats=stats,
    )

    assert stats.passes >= 1
    assert stats.collapses > 0
    assert stats.reverted_passes == 0
    assert mesh.num_triangles < num_triangles
    assert is_disk(mesh)

    # Everything stays on the plane
    for v in mesh.vertices():
        assert mesh.positions[v][2] == pytest.approx(0.0, abs=1e-12)


def test_remesh_refines(plate_hole):
    mesh = grid_mesh(1)
    stats = RemeshStats()
    remesh(
        mesh,
        plate_hole,
        remesh_cfg(0.2, max_passes=3),
        validator=always_valid,
        stats=stats,
    )

    assert stats.splits > 0
    assert mesh.num_triangles > 2
    assert is_disk(mesh)
    for v in mesh.vertices():
        assert mesh.positions[v][2] == pytest.approx(0.0, abs=1e-12)


def test_remesh_reverts_invalid_passes(plate_hole):
    calls = []

    def first_only(mesh) -> bool:
        calls.append(mesh.num_triangles)
        return len(calls) == 1

    mesh = grid_mesh(4)
    tris = dict(mesh.tris)
    stats = RemeshStats()
    remesh(
        mesh, plate_hole, remesh_cfg(0.5), validator=first_only, stats=stats
    )

    assert len(calls) == 2
    assert stats.passes == 1
    assert stats.reverted_passes == 1
    assert stats.collapses == 0
    assert mesh.tris == tris

    # Invalid input is left alone
    stats = RemeshStats()
    remesh(
        mesh,
        plate_hole,
        remesh_cfg(0.5),
        validator=lambda m: False,
        stats=stats,
    )
    assert stats.passes == 0
    assert mesh.tris == tris


def test_min_area(plate_hole):
    mesh = grid_mesh(4)
    remesher = Remesher(
        mesh, plate_hole, remesh_cfg(0.1, min_area_factor=0.5)
    )
    assert remesher.min_area == pytest.approx(1.0)

    # Both halves of the split would be far below the minimum area
    tris = dict(mesh.tris)
    assert not remesher.try_split(0, 1)
    assert mesh.tris == tris


def test_cached_deviations():
    brep = build_fixture("sphere").brep
    mesh = meshed("sphere").mesh.copy()
    scale = mesh.scale
    config = RemeshConfig(
        target_edge_length=0.3 * scale,
        envelope_eps=0.01 * scale,
        max_passes=2,
    )
    remesher = Remesher(mesh, brep, config, validator=always_valid)
    stats = remesher.run()
    assert stats.collapses + stats.splits + stats.flips > 0

    # Deviations taken over from accepted candidates match a recomputation
    live = [tid for tid in remesher._dev if tid in mesh.tris]
    assert live
    for tid in live:
        fresh = remesher._deviation(mesh.tris[tid], mesh.tri_face[tid], {})
        assert remesher._dev[tid] == pytest.approx(fresh, abs=1e-9 * scale)

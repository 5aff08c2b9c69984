"""Tests the topology check, the deviation measurement and the mesh
statistics"""

import numpy as np
import pytest

from brepmesh.exceptions import LabelResolutionError
from brepmesh.validation import (
    _canonical_cycle,
    check_topology,
    measure_deviation,
    mesh_statistics,
    resolve_labels,
)

from ._fixtures import cube, grid_mesh, meshed, plate_hole

# -----------------------------------------------------------------------------


def test_canonical_cycle():
    assert _canonical_cycle([3, 1, 1, 2]) == (1, 2, 3)
    assert _canonical_cycle([2, 1, 3]) == (1, 2, 3)
    assert _canonical_cycle([1, 1, 2, 2, 1]) == (1, 2)
    assert _canonical_cycle([4]) == (4,)
    assert _canonical_cycle([]) == ()


def test_check_topology_clean(cube):
    report = check_topology(meshed("cube").mesh, cube)

    assert report.ok
    assert report.adjacency_match
    assert not report.discrepancies
    assert len(report.faces) == 6
    assert len(report.edges) == 12
    assert str(report).startswith("Topology preserved: 6 b-faces")

    for fr in report.faces.values():
        assert fr.connected and fr.disk_after_cut
        assert fr.euler == 1
        assert fr.boundary_loops == 1
        assert len(fr.chains) == 1 and len(fr.chains[0]) == 4
    for er in report.edges.values():
        assert er.simple and not er.closed

    d = report.to_dict()
    assert d["ok"] is True
    assert "num_triangles" in d["faces"][0]
    assert "num_triangles" not in report.signature()["faces"][0]
    assert "num_edges" not in report.signature()["edges"][0]


def test_check_topology_discrepancies(cube):
    # An unlabeled edge between two faces
    mesh = meshed("cube").mesh.copy()
    a, b = mesh.labeled_edges(0)[0]
    mesh.label_edge(a, b, None)

    report = check_topology(mesh, cube)
    assert not report.ok
    assert any(
        "unlabeled edges join different b-faces" in msg
        for msg in report.discrepancies
    )
    assert "topology discrepancies" in str(report)

    # A b-vertex carried twice
    mesh = meshed("cube").mesh.copy()
    free = min(v for v in mesh.vertices() if not mesh.is_labeled(v))
    mesh.bvertex[free] = 0
    report = check_topology(mesh, cube)
    assert "b-vertex 0 is carried by 2 mesh vertices" in report.discrepancies


def test_resolve_labels(cube):
    mesh = meshed("cube").mesh.copy()
    resolve_labels(mesh, cube)

    a, b = mesh.labeled_edges(0)[0]
    mesh.label_edge(a, b, 99)
    with pytest.raises(LabelResolutionError, match=r"unknown b-edges \[99\]"):
        check_topology(mesh, cube)


# -----------------------------------------------------------------------------


def test_measure_deviation(plate_hole):
    mesh = grid_mesh(4)
    max_dev, normalized = measure_deviation(mesh, plate_hole, 1000)
    assert max_dev == pytest.approx(0.0, abs=1e-12)
    assert normalized == pytest.approx(0.0, abs=1e-12)

    # Lifting the mesh off the plane
    for v in mesh.vertices():
        mesh.positions[v] = mesh.positions[v] + np.array([0.0, 0.0, 0.01])
    max_dev, normalized = measure_deviation(mesh, plate_hole, 1000)
    assert max_dev == pytest.approx(0.01)
    assert normalized == pytest.approx(0.01 / plate_hole.diagonal)

    # Reproducible
    assert measure_deviation(mesh, plate_hole, 1000, seed=1) == (
        measure_deviation(mesh, plate_hole, 1000, seed=1)
    )

    with pytest.raises(ValueError, match="at least 1000"):
        measure_deviation(mesh, plate_hole, 999)


def test_mesh_statistics():
    stats = mesh_statistics(grid_mesh(2))
    assert stats["vertices"] == 9
    assert stats["edges"] == 16
    assert stats["triangles"] == 8
    assert stats["euler_characteristic"] == 1
    assert stats["boundary_loops"] == 1
    assert stats["components"] == 1
    assert stats["quality"]["min_quality"] == pytest.approx(np.sqrt(3) / 2)


def test_mesh_statistics_of_pipeline_results():
    stats = meshed("sphere").report["mesh"]
    assert stats["euler_characteristic"] == 2
    assert stats["boundary_loops"] == 0
    assert stats["components"] == 1

    stats = meshed("plate_hole").report["mesh"]
    assert stats["euler_characteristic"] == 0
    assert stats["boundary_loops"] == 2

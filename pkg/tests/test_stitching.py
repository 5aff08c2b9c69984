"""Tests snapping, conforming and merging of face meshes"""

import numpy as np
import pytest

from brepmesh.exceptions import MeshOperationError, StitchingError
from brepmesh.mesh import LabeledTriMesh, chain_params, label_chains
from brepmesh.stitching import (
    _glue_conflicts,
    _solve_harmonic,
    canonical_params,
    conform_edge,
    guard_refine,
    merge_all,
    merge_key,
    snap_and_diffuse,
)

from ._fixtures import grid_mesh, plate_hole

# -----------------------------------------------------------------------------


def label_bottom(mesh: LabeledTriMesh, n: int, *, bedge: int = 0):
    """Labels the bottom side of a :py:func:`grid_mesh` as ``bedge``, running
    from b-vertex 0 to b-vertex 1"""
    mesh.bvertex[0] = 0
    mesh.bvertex[n] = 1
    for i in range(1, n):
        mesh.bedge[i] = (bedge, i / n)
    for i in range(n):
        mesh.label_edge(i, i + 1, bedge)
    mesh.bedge_ends[bedge] = (0, 1)
    return mesh


def single_triangle(third, *, face: int) -> LabeledTriMesh:
    mesh = LabeledTriMesh.from_arrays(
        [(0, 0, 0), (1, 0, 0), third], [(0, 1, 2)], face=face
    )
    mesh.bvertex[0] = 0
    mesh.bvertex[1] = 1
    mesh.label_edge(0, 1, 0)
    return mesh


# -----------------------------------------------------------------------------


def test_snap_and_diffuse(plate_hole):
    mesh = grid_mesh(2)
    mesh.bvertex[0] = 0
    mesh.bedge[1] = (0, 0.5)
    mesh.positions[0] = np.array([0.0, 0.0, 0.2])
    mesh.positions[1] = np.array([0.5, 0.0, 0.2])

    disp = snap_and_diffuse(mesh, plate_hole)
    assert disp.shape == (mesh.num_vertices, 3)

    # Labeled vertices are exactly on their geometry
    assert np.array_equal(mesh.positions[0], (0, 0, 0))
    assert np.allclose(mesh.positions[1], (0.5, 0, 0))

    # Unlabeled boundary vertices stay in place
    assert np.array_equal(mesh.positions[2], (1, 0, 0))
    assert np.array_equal(mesh.positions[6], (0, 1, 0))

    # Interior vertices follow partially
    assert -0.2 < mesh.positions[4][2] < 0.0


def test_merge_key():
    mesh = label_bottom(grid_mesh(2), 2)
    assert merge_key(mesh, 3, 0) == ("v", 0)
    assert merge_key(mesh, 3, 1) == ("e", 0, 0.5)
    assert merge_key(mesh, 3, 4) == ("i", 3, 4)


def test_conform_edge(plate_hole):
    coarse = label_bottom(grid_mesh(2), 2)
    fine = label_bottom(grid_mesh(4), 4)
    curve = plate_hole.curve(0)

    expected = [0.0, 0.25, 0.5, 0.75, 1.0]
    assert canonical_params({0: coarse, 1: fine}, 0) == expected
    assert conform_edge(coarse, fine, 0, curve) == expected

    # The coarse chain got the missing vertices, on the curve
    (chain,) = label_chains(coarse, 0)
    assert len(chain) == 5
    assert chain_params(coarse, chain, 0) == pytest.approx(expected)
    assert np.allclose(coarse.positions[chain[1]], (0.25, 0, 0))

    # The fine one is unchanged
    assert fine.num_vertices == 25
    (chain,) = label_chains(fine, 0)
    assert chain == [0, 1, 2, 3, 4]


def test_guard_refine():
    # Two copies of a b-vertex with a common neighbour
    mesh = grid_mesh(2)
    mesh.bvertex[0] = 7
    mesh.bvertex[2] = 7
    assert (0, 1) in _glue_conflicts(mesh, 0)

    assert guard_refine(mesh) > 0
    assert not _glue_conflicts(mesh, 0)
    assert 1 not in mesh.neighbors(0) or 1 not in mesh.neighbors(2)

    # Idempotent
    assert guard_refine(mesh) == 0


def test_merge_all(plate_hole):
    topo = plate_hole.topology
    meshes = {
        0: single_triangle((0, 1, 0), face=0),
        1: single_triangle((0, -1, 0), face=1),
    }
    merged = merge_all(meshes, topo, scale=1.0)

    assert merged.num_vertices == 4
    assert merged.num_triangles == 2
    assert sorted(merged.tri_face.values()) == [0, 1]
    assert sorted(merged.bvertex.values()) == [0, 1]
    ((a, b),) = merged.labeled_edges(0)
    assert sorted(merged.bvertex[v] for v in (a, b)) == [0, 1]
    assert len(merged.edge_tris(a, b)) == 2
    assert merged.bedge_ends[0] == (0, 1)

    # Vertices with equal keys must coincide
    meshes[1].positions[1] = np.array([1.0, 0.0, 0.1])
    with pytest.raises(StitchingError, match="apart"):
        merge_all(meshes, topo, scale=1.0)

    # ... unless the tolerance allows it
    merged = merge_all(meshes, topo, scale=1.0, merge_tol=0.2)
    assert merged.num_vertices == 4

    # Triangles may not degenerate
    meshes[1] = single_triangle((0, -1, 0), face=1)
    meshes[1].bvertex[2] = 0
    with pytest.raises(StitchingError, match="degenerates"):
        merge_all(meshes, topo, scale=1.0, merge_tol=2.0)


def test_harmonic_maximum_principle():
    rng = np.random.default_rng(11)

    for _ in range(100):
        mesh = grid_mesh(5)
        for a, b in sorted(mesh.edges()):
            if rng.random() < 0.3:
                try:
                    mesh.flip_edge(a, b)
                except MeshOperationError:
                    pass

        verts = mesh.vertices()
        index = {v: i for i, v in enumerate(verts)}
        fixed = np.array([mesh.is_boundary_vertex(v) for v in verts])
        disp = np.zeros((len(verts), 3))
        disp[fixed] = rng.normal(size=(int(fixed.sum()), 3))

        solution = _solve_harmonic(mesh, verts, index, fixed, disp)
        values = disp.copy()
        values[~fixed] = solution

        # No interior displacement exceeds the largest boundary one
        bound = np.linalg.norm(disp[fixed], axis=1).max()
        assert np.linalg.norm(solution, axis=1).max() <= bound + 1e-12

        # Each interior value is the mean of its neighbours
        for i in np.flatnonzero(~fixed):
            nbrs = [index[w] for w in mesh.neighbors(verts[i])]
            assert np.allclose(values[i], values[nbrs].mean(axis=0))

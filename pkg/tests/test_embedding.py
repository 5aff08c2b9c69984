"""Tests the embedding of b-loops onto patch meshes"""

import math
from collections import Counter

import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from brepmesh.cfg import GuardsConfig, HeuristicsConfig, make_sampling_budget
from brepmesh.embedding import (
    KEEP_DISK,
    HeuristicStats,
    TraceState,
    embed_face,
    embed_loop,
    preprocess_nonmanifold,
    project_onto_mesh,
    restore_disk,
    shared_loops,
    shortest_path,
    snap_curve_endpoints,
    trace_segment,
)
from brepmesh.embedding.face import _check_vertex_copies
from brepmesh.embedding.heuristics import (
    collapse_singular_sides,
    periodic_rewire,
)
from brepmesh.embedding.trace import _nudge
from brepmesh.exceptions import (
    EmbeddingError,
    HeuristicRejected,
    LinkConditionError,
)
from brepmesh.fixtures import build_fixture
from brepmesh.geometry import Cylinder, Plane, Sphere
from brepmesh.mesh import (
    LabeledTriMesh,
    TriangleLocator,
    component_analysis,
    is_disk,
    label_chains,
    weld,
)
from brepmesh.sampling import SampledCurve, mesh_patch, sample_curve

from ._fixtures import fast_cfg, grid_mesh, plate_hole

# -----------------------------------------------------------------------------


def face_inputs(brep, face: int):
    """Patch mesh and endpoint-snapped curve samples of one b-face"""
    budget = make_sampling_budget(fast_cfg(), brep.diagonal)
    topo = brep.topology
    curves = {}
    for E in sorted(topo.face_edge_uses(face)):
        edge = topo.edges[E]
        curves[E] = snap_curve_endpoints(
            sample_curve(brep.curve(E), budget, bedge=E),
            brep.point(edge.start),
            brep.point(edge.end),
        )
    patch = mesh_patch(brep.surface(face), budget, face=face)
    return patch, curves, budget


def assert_annulus(mesh):
    (info,) = component_analysis(mesh)
    assert info.euler == 0
    assert info.boundary_loops == 2


# -----------------------------------------------------------------------------


def test_snap_curve_endpoints():
    sampled = SampledCurve(
        bedge=1, t=[0.0, 0.5, 1.0], points=[(0, 0, 0), (1, 0, 0), (2, 0, 0)]
    )
    snapped = snap_curve_endpoints(sampled, (0, 1, 0), (2, 0, 1))

    assert snapped.bedge == 1
    assert np.array_equal(snapped.t, sampled.t)
    assert np.allclose(snapped.points[0], (0, 1, 0))
    assert np.allclose(snapped.points[-1], (2, 0, 1))

    # Interior points move by the interpolated displacement
    assert np.allclose(snapped.points[1], (1, 0.5, 0.5))

    # The input is not modified
    assert np.allclose(sampled.points[0], (0, 0, 0))


def test_preprocess_nonmanifold():
    # The figure eight visits b-vertex 0 twice
    topo = build_fixture("figure_eight").brep.topology
    loops, merge = preprocess_nonmanifold(topo.faces[0].loops, topo)

    (loop,) = loops
    assert loop.loop == 0
    assert loop.vertex_keys == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (0, 1)]
    assert loop.edges[4].end == (0, 1)
    assert loop.edges[5].end == (0, 0)
    assert merge.duplicated_vertices == {0: [1]}
    assert merge.duplicated_edges == {}
    assert merge.num_duplicates == 1
    assert merge.restored_counts(loops) == dict(vertices=5, edges=6)

    # The lateral face of the cylinder uses its seam twice
    topo = build_fixture("cylinder").brep.topology
    loops, merge = preprocess_nonmanifold(topo.faces[0].loops, topo)

    edges = loops[0].edges
    assert [(le.edge, le.forward, le.copy) for le in edges] == [
        (0, True, 0),
        (2, True, 0),
        (1, False, 0),
        (2, False, 1),
    ]
    assert edges[1].start == (0, 1)
    assert edges[3].start == (1, 1)
    assert merge.to_dict() == dict(
        duplicated_edges={2: [1]},
        duplicated_vertices={0: [1], 1: [1]},
    )
    assert merge.num_duplicates == 3
    assert merge.restored_counts(loops) == dict(vertices=2, edges=3)

    # Without duplication, every entity keeps a single key
    (shared,) = shared_loops(topo.faces[0].loops, topo)
    assert {le.copy for le in shared.edges} == {0}
    assert shared.vertex_keys == [(0, 0), (0, 0), (1, 0), (1, 0)]


def test_heuristic_stats():
    stats = HeuristicStats()
    stats.attempt("optimistic_tracing")
    stats.reject("optimistic_tracing")

    other = HeuristicStats()
    other.attempt("optimistic_tracing")
    other.accept("optimistic_tracing")
    other.restore_disk_calls = 2
    stats.merge(other)

    d = stats.to_dict()
    assert d["optimistic_tracing"] == dict(attempted=2, accepted=1, rejected=1)
    assert d["periodic_rewire"] == dict(attempted=0, accepted=0, rejected=0)
    assert d["restore_disk_calls"] == 2


# -----------------------------------------------------------------------------


def test_shortest_path():
    mesh = grid_mesh(2)
    none = dict(forbidden_edges=set(), forbidden_vertices=set())

    # Along the diagonal
    assert shortest_path(mesh, 0, 8, **none) == [0, 4, 8]

    # Among paths of equal length, the lexicographically smallest one
    path = shortest_path(
        mesh, 0, 8, forbidden_edges={(0, 4)}, forbidden_vertices=set()
    )
    assert path == [0, 1, 4, 8]

    # Forbidden vertices are avoided unless they are source or target
    path = shortest_path(
        mesh, 0, 8, forbidden_edges=set(), forbidden_vertices={0, 4, 8}
    )
    assert path == [0, 1, 5, 8]

    # Unreachable
    path = shortest_path(
        mesh,
        0,
        8,
        forbidden_edges={(5, 8), (7, 8), (4, 8)},
        forbidden_vertices=set(),
    )
    assert path is None


def brute_force_distance(mesh, s, e, forbidden_edges, forbidden_vertices):
    """Length of the shortest admissible path, by Dijkstra's algorithm on
    the whole edge graph without the forbidden parts"""
    blocked = set(forbidden_vertices) - {s, e}
    rows, cols, lengths = [], [], []
    for a, b in sorted(mesh.edges()):
        if (a, b) in forbidden_edges or a in blocked or b in blocked:
            continue
        rows.append(a)
        cols.append(b)
        lengths.append(mesh.edge_length(a, b))

    n = max(mesh.vertices()) + 1
    graph = coo_matrix((lengths, (rows, cols)), shape=(n, n)).tocsr()
    return dijkstra(graph, directed=False, indices=s)[e]


def test_shortest_path_is_shortest():
    rng = np.random.default_rng(3)
    reachable = 0

    for _ in range(100):
        mesh = grid_mesh(6)
        for v in mesh.vertices():
            if not mesh.is_boundary_vertex(v):
                jitter = rng.uniform(-0.05, 0.05, size=2)
                mesh.positions[v] = mesh.positions[v] + (*jitter, 0.0)

        edges = sorted(mesh.edges())
        verts = mesh.vertices()
        forbidden_edges = {e for e in edges if rng.random() < 0.15}
        forbidden_vertices = {v for v in verts if rng.random() < 0.1}
        s, e = (int(v) for v in rng.choice(verts, size=2, replace=False))

        path = shortest_path(
            mesh,
            s,
            e,
            forbidden_edges=forbidden_edges,
            forbidden_vertices=forbidden_vertices,
        )
        expected = brute_force_distance(
            mesh, s, e, forbidden_edges, forbidden_vertices
        )
        if not np.isfinite(expected):
            assert path is None
            continue

        reachable += 1
        assert (path[0], path[-1]) == (s, e)
        assert len(set(path)) == len(path)
        assert not set(path[1:-1]) & forbidden_vertices
        for a, b in zip(path, path[1:]):
            assert mesh.has_edge(a, b)
            assert (min(a, b), max(a, b)) not in forbidden_edges

        length = sum(mesh.edge_length(a, b) for a, b in zip(path, path[1:]))
        assert length == pytest.approx(expected, abs=1e-9)

    assert reachable > 50


def test_project_onto_mesh():
    # Coincident vertices are reused
    mesh = grid_mesh(2)
    assert project_onto_mesh(mesh, (0.5, 0.5, 0.1)) == 4
    assert mesh.num_vertices == 9

    # Points on an edge split it
    v = project_onto_mesh(mesh, (0.25, 0.0, 0.0))
    assert v == 9
    assert mesh.num_triangles == 9
    assert mesh.is_boundary_vertex(v)

    # Points inside a triangle split the triangle
    mesh = grid_mesh(2)
    v = project_onto_mesh(mesh, (0.3, 0.1, 0.0))
    assert np.allclose(mesh.positions[v], (0.3, 0.1, 0.0))
    assert mesh.num_triangles == 10
    assert not mesh.is_boundary_vertex(v)

    # Projections onto forbidden edges are moved into the triangle
    mesh = grid_mesh(2)
    v = project_onto_mesh(
        mesh,
        (0.25, 0.0, 0.0),
        locator=TriangleLocator(mesh),
        forbidden_edges={(0, 1)},
        forbidden_vertices={0, 1},
    )
    assert not mesh.is_boundary_vertex(v)
    assert mesh.positions[v][1] > 0.0
    assert mesh.has_edge(0, 1)


def test_project_onto_mesh_ties():
    """Points above a forbidden diagonal are equally close to both of its
    triangles; the hints decide on which side the new vertex goes"""

    def project(**hints):
        mesh = grid_mesh(1)
        v = project_onto_mesh(
            mesh,
            (0.5, 0.5, 1.0),
            forbidden_edges={(0, 3)},
            forbidden_vertices={0, 3},
            **hints,
        )
        x, y, _ = mesh.positions[v]
        return "lower" if x > y else "upper"

    # Without hints, the lower triangle id wins
    assert project() == "lower"

    # Closest centroid to the previous position
    assert project(near=(1.0, 0.0, 0.0)) == "lower"
    assert project(near=(0.0, 1.0, 0.0)) == "upper"

    # Staying away from a parameter position takes precedence
    assert project(near=(1.0, 0.0, 0.0), away=(1.0, 0.0)) == "upper"
    assert project(away=(0.0, 1.0)) == "lower"


def test_nudge():
    # A proper triangle: halfway towards the centroid
    mesh = grid_mesh(1)
    v = _nudge(mesh, 0, np.array([0.5, 0.0, 0.0]))
    assert np.allclose(mesh.positions[v], (7 / 12, 1 / 6, 0.0))

    # Triangles of zero area use the closest proper triangle around them
    points = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0.5, 0, 0)]
    mesh = LabeledTriMesh.from_arrays(
        points, [(0, 1, 2), (1, 0, 3)], scale=1.0
    )
    v = _nudge(mesh, 1, np.array([0.5, 0.0, 0.0]))
    assert np.allclose(mesh.positions[v], (1 / 3, 1 / 3, 0.0))
    assert 1 in mesh.tris

    flat = LabeledTriMesh.from_arrays(
        [(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 1, 2)], scale=1.0
    )
    with pytest.raises(EmbeddingError, match="non-zero area"):
        _nudge(flat, 0, np.array([1.0, 0.0, 0.0]))


def test_trace_segment():
    mesh = grid_mesh(4)
    state = TraceState.start(mesh, tol=1e-12, forbid_boundary=False)
    assert not state.forbidden

    state.s, state.e = 0, 24
    chain = trace_segment(mesh, state)
    assert chain.vertices == (0, 6, 12, 18, 24)
    assert state.gamma == [(0, 6), (6, 12), (12, 18), (18, 24)]
    assert set(state.gamma) <= state.forbidden
    assert {6, 12, 18} <= state.fverts

    # A second trace between the same vertices avoids the first one
    chain = trace_segment(mesh, state)
    assert not set(chain.vertices[1:-1]) & {6, 12, 18}

    with pytest.raises(EmbeddingError, match="forbidden"):
        state.append([0, 6])

    state.s = state.e = 3
    with pytest.raises(EmbeddingError, match="to itself"):
        trace_segment(mesh, state)


def test_trace_state_start():
    mesh = grid_mesh(4)
    state = TraceState.start(mesh, tol=1e-12)

    assert state.forbidden == mesh.boundary_edges()
    assert state.fverts == mesh.boundary_vertices()

    # No interior edge connects two boundary vertices any longer
    for a, b in mesh.edges():
        if (a, b) not in state.forbidden:
            assert not {a, b} <= state.fverts


def test_restore_disk():
    # A grid with a square hole in the middle
    mesh = grid_mesh(4)
    mesh.remove_triangle(10)
    mesh.remove_triangle(11)
    assert_annulus(mesh)

    pairs = restore_disk(mesh)
    assert pairs
    assert is_disk(mesh)

    # Welding the slit vertices restores the hole
    weld(mesh, pairs)
    assert_annulus(mesh)

    # Disks are left alone
    mesh = grid_mesh(2)
    assert restore_disk(mesh) == []
    assert mesh.num_triangles == 8


# -----------------------------------------------------------------------------


def test_embed_outer_loop(plate_hole):
    patch, curves, _ = face_inputs(plate_hole, 0)
    topo = plate_hole.topology
    loops, _ = preprocess_nonmanifold(topo.faces[0].loops, topo)

    mesh = patch.copy()
    emb = embed_loop(mesh, loops[0], curves, KEEP_DISK)

    assert is_disk(mesh)
    assert emb.num_segments >= 4
    assert set(emb.chain_lengths) == {0, 1, 2, 3}
    assert all(0.5 < L < 2.0 for L in emb.chain_lengths.values())

    # The mesh boundary is the labeled cycle
    assert set(mesh.boundary_edges()) == set(mesh.labeled_edges())
    assert set(mesh.edge_labels.values()) == {0, 1, 2, 3}
    assert sorted(mesh.bvertex.values()) == [0, 1, 2, 3]

    # The patch is not modified
    assert not patch.edge_labels


def test_embed_face_plate(plate_hole):
    patch, curves, budget = face_inputs(plate_hole, 0)
    emb = embed_face(
        patch,
        0,
        plate_hole,
        curves,
        heuristics=HeuristicsConfig.all_off(),
        budget=budget,
    )
    mesh = emb.mesh

    assert emb.face == 0
    assert not emb.periodic
    assert emb.long_trace_retries == 0
    assert emb.merge_map.num_duplicates == 0
    assert emb.stats.restore_disk_calls == 0

    assert_annulus(mesh)
    assert set(mesh.boundary_edges()) == set(mesh.labeled_edges())
    assert sorted(mesh.bvertex.values()) == [0, 1, 2, 3, 4]
    for E in range(5):
        assert len(label_chains(mesh, E)) == 1

    # The hole is a closed chain starting and ending at b-vertex 4
    (hole,) = label_chains(mesh, 4)
    assert hole[0] == hole[-1]
    assert mesh.bvertex[hole[0]] == 4


def test_embed_face_with_heuristics(plate_hole):
    patch, curves, budget = face_inputs(plate_hole, 0)
    emb = embed_face(patch, 0, plate_hole, curves, budget=budget)

    assert_annulus(emb.mesh)
    for name, c in emb.stats.to_dict().items():
        if name != "restore_disk_calls":
            assert c["attempted"] == c["accepted"] + c["rejected"]

    d = emb.stats.to_dict()
    assert d["outer_loop_tracing"]["attempted"] == 1
    assert d["periodic_rewire"]["attempted"] == 0
    assert d["long_trace_guard"]["accepted"] == 1


def test_embed_face_repeated_vertex():
    brep = build_fixture("figure_eight").brep
    patch, curves, budget = face_inputs(brep, 0)
    emb = embed_face(
        patch,
        0,
        brep,
        curves,
        guards=GuardsConfig(),
        budget=budget,
    )

    # Both visits of b-vertex 0 got a vertex of their own
    assert emb.merge_map.duplicated_vertices == {0: [1]}
    assert list(emb.mesh.bvertex.values()).count(0) == 2
    assert is_disk(emb.mesh)


@pytest.mark.parametrize(
    "exc", [EmbeddingError, HeuristicRejected, LinkConditionError]
)
def test_rejected_heuristic_is_reverted(plate_hole, monkeypatch, exc):
    patch, curves, budget = face_inputs(plate_hole, 0)
    off = HeuristicsConfig.all_off()
    reference = embed_face(
        patch, 0, plate_hole, curves, heuristics=off, budget=budget
    )

    def failing_refinement(mesh, *args, **kwargs):
        tid = min(mesh.tris)
        mesh.split_triangle(tid, mesh.tri_points(tid).mean(axis=0))
        raise exc("refinement went wrong")

    monkeypatch.setattr(
        "brepmesh.embedding.face.initial_refinement", failing_refinement
    )
    emb = embed_face(
        patch,
        0,
        plate_hole,
        curves,
        heuristics=off.model_copy(update=dict(initial_refinement=True)),
        budget=budget,
    )

    # The split was undone and the base algorithm produced the same mesh
    assert emb.mesh.tris == reference.mesh.tris
    assert emb.mesh.edge_labels == reference.mesh.edge_labels
    assert emb.stats.to_dict()["initial_refinement"] == dict(
        attempted=1, accepted=0, rejected=1
    )
    assert_annulus(emb.mesh)


@pytest.mark.parametrize("name", ["cylinder", "sphere", "cone"])
def test_embed_face_closed_surfaces(name):
    brep = build_fixture(name).brep
    topo = brep.topology
    patch, curves, budget = face_inputs(brep, 0)
    emb = embed_face(
        patch,
        0,
        brep,
        curves,
        heuristics=HeuristicsConfig.all_off(),
        budget=budget,
    )
    mesh = emb.mesh

    assert is_disk(mesh)
    assert set(mesh.boundary_edges()) == set(mesh.labeled_edges())
    assert emb.merge_map.num_duplicates > 0

    # One chain per use of a b-edge in the loops of the face
    loops, _ = preprocess_nonmanifold(topo.faces[0].loops, topo)
    uses = Counter(le.edge for lp in loops for le in lp.edges)
    for E, count in uses.items():
        assert len(label_chains(mesh, E)) == count


def test_check_vertex_copies():
    topo = build_fixture("figure_eight").brep.topology
    loops, merge = preprocess_nonmanifold(topo.faces[0].loops, topo)

    mesh = grid_mesh(2)
    mesh.bvertex.update({0: 0, 1: 1, 2: 2, 5: 3, 8: 4, 7: 0})
    _check_vertex_copies(mesh, loops, merge)

    # One copy of the doubly visited b-vertex is missing
    del mesh.bvertex[7]
    with pytest.raises(EmbeddingError, match="has 1 mesh vertices but 2"):
        _check_vertex_copies(mesh, loops, merge)

    # A b-vertex was lost entirely
    mesh.bvertex[7] = 0
    del mesh.bvertex[8]
    with pytest.raises(
        EmbeddingError, match="placed 4 distinct b-vertices, expected 5"
    ):
        _check_vertex_copies(mesh, loops, merge)


# -----------------------------------------------------------------------------


def test_collapse_singular_sides():
    sphere = Sphere((0, 0, 0), 1.0)
    budget = make_sampling_budget(fast_cfg(), 2 * math.sqrt(3))
    mesh = mesh_patch(sphere, budget)

    assert collapse_singular_sides(mesh, sphere) == 2
    assert is_disk(mesh)
    for value in (0.0, 1.0):
        pole = [v for v in mesh.uv if abs(mesh.uv[v][1] - value) <= 1e-9]
        assert len(pole) == 1

    # Nothing to do without singular sides
    plane = Plane((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert collapse_singular_sides(grid_mesh(2), plane) == 0


def test_periodic_rewire():
    cyl = Cylinder((0, 0, 0), (0, 0, 1), 0.5, heights=(0.0, 1.0))
    budget = make_sampling_budget(fast_cfg(), math.sqrt(3))
    mesh = mesh_patch(cyl, budget)

    assert periodic_rewire(mesh, cyl) > 0
    assert not mesh.uv
    assert_annulus(mesh)

    plane = Plane((0, 0, 0), (1, 0, 0), (0, 1, 0))
    with pytest.raises(HeuristicRejected, match="is not periodic"):
        periodic_rewire(grid_mesh(2), plane)

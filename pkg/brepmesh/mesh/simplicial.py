"""Local refinement making a mesh a simplicial embedding of an edge set"""

import logging
from typing import Iterable, Optional, Set

from ..exceptions import MeshOperationError
from .trimesh import Edge, LabeledTriMesh, ekey, tri_edges

log = logging.getLogger(__name__)


def feature_vertices(features: Iterable[Edge]) -> Set[int]:
    return {v for e in features for v in e}


def enforce_simplicial_embedding(
    mesh: LabeledTriMesh,
    features: Set[Edge],
    *,
    vertices: Optional[Iterable[int]] = None,
    fverts: Optional[Set[int]] = None,
    max_rounds: int = 8,
) -> int:
    """Refines the mesh until the feature edges ``F`` are simplicially
    embedded:

    (a) no edge outside ``F`` connects two vertices of ``F``, and
    (b) no triangle has all three corners on ``F``.

    Offending edges are split at their midpoint, then offending triangles at
    their centroid; ``F`` itself is never modified. A triangle of zero area
    is split on its longest edge outside ``F`` instead. With ``vertices``
    given, only edges and triangles around these vertices are inspected.

    Args:
        mesh (LabeledTriMesh): The mesh to refine in place
        features (Set[Edge]): The edge set ``F``
        vertices (Iterable[int], optional): Restricts the check to the
            triangles around these vertices
        fverts (Set[int], optional): The vertices counted as lying on ``F``;
            defaults to the endpoints of ``F``. May contain more vertices,
            e.g. isolated ones that paths must not pass through.
        max_rounds (int): Refinement rounds before giving up

    Returns:
        int: The number of splits performed

    Raises:
        MeshOperationError: If violations remain after ``max_rounds``
    """
    if fverts is None:
        features = {ekey(*e) for e in features}
        fverts = feature_vertices(features)
    local = None if vertices is None else set(vertices)
    num_splits = 0

    for _ in range(max_rounds):
        changed = 0
        for a, b in _offending_edges(mesh, features, fverts, local):
            if mesh.has_edge(a, b):
                mesh.split_edge(a, b)
                changed += 1

        for tid in _offending_triangles(mesh, fverts, local):
            if tid in mesh.tris and _split_offending(mesh, tid, features):
                changed += 1

        num_splits += changed
        if not changed:
            break
    else:
        remaining = len(
            _offending_edges(mesh, features, fverts, local)
        ) + len(_offending_triangles(mesh, fverts, local))
        if remaining:
            raise MeshOperationError(
                f"Simplicial embedding still has {remaining} violation(s) "
                f"after {max_rounds} refinement rounds"
            )

    if num_splits:
        log.debug(
            "Simplicial embedding of %d feature edges: %d split(s).",
            len(features),
            num_splits,
        )
    return num_splits


def _split_offending(mesh: LabeledTriMesh, tid: int, features) -> bool:
    if not mesh.is_degenerate(tid):
        mesh.split_triangle(tid, mesh.tri_points(tid).mean(axis=0))
        return True

    free = [e for e in tri_edges(mesh.tris[tid]) if e not in features]
    if not free:
        log.caution(
            "Triangle %d has zero area and all its edges are features; "
            "cannot refine it.",
            tid,
        )
        return False
    a, b = max(free, key=lambda e: (mesh.edge_length(*e), e))
    mesh.split_edge(a, b)
    return True


def _candidate_triangles(mesh: LabeledTriMesh, local) -> Iterable[int]:
    if local is None:
        return sorted(mesh.tris)
    return sorted({t for v in local for t in mesh.vtris.get(v, ())})


def _offending_edges(mesh, features, fverts, local):
    found = set()
    for tid in _candidate_triangles(mesh, local):
        for e in tri_edges(mesh.tris[tid]):
            if e not in features and e[0] in fverts and e[1] in fverts:
                found.add(e)
    return sorted(found)


def _offending_triangles(mesh, fverts, local):
    return [
        tid
        for tid in _candidate_triangles(mesh, local)
        if all(v in fverts for v in mesh.tris[tid])
    ]


def check_simplicial_embedding(
    mesh: LabeledTriMesh, features: Set[Edge]
) -> bool:
    """Whether postconditions (a) and (b) hold"""
    features = {ekey(*e) for e in features}
    fverts = feature_vertices(features)
    return not _offending_edges(
        mesh, features, fverts, None
    ) and not _offending_triangles(mesh, fverts, None)

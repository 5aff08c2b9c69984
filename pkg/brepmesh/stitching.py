"""Stage 4: snapping face meshes onto the B-Rep geometry and merging them
into one conforming mesh.

Boundary vertices are moved onto their curves (or b-vertex points) and the
displacement is propagated into the interior by a uniform-Laplacian
Dirichlet problem. Face meshes are then made to share one canonical list of
curve parameters per b-edge, so that merging by label keys is exact.
"""

import logging
from collections import defaultdict
from typing import Dict, Hashable, List, Mapping, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu

from .brep import BRep, BRepTopology
from .exceptions import StitchingError
from .mesh import (
    LabeledTriMesh,
    chain_params,
    enforce_simplicial_embedding,
    label_chains,
)
from .mesh.cutting import UnionFind
from .mesh.trimesh import Edge, ekey

log = logging.getLogger(__name__)

PARAM_DEDUP_TOL = 1e-12
"""Curve parameters closer than this are considered identical"""

MAX_GUARD_ROUNDS = 8


# -----------------------------------------------------------------------------


def _target_position(mesh: LabeledTriMesh, brep: BRep, v: int):
    if v in mesh.bvertex:
        return brep.point(mesh.bvertex[v])
    if v in mesh.bedge:
        edge, t = mesh.bedge[v]
        return brep.curve(edge).eval(t)
    return None


def snap_and_diffuse(mesh: LabeledTriMesh, brep: BRep) -> np.ndarray:
    """Moves labeled vertices exactly onto their geometry and distributes
    the displacement over the remaining vertices.

    The displacement ``u`` of the free vertices solves the uniform
    Laplace equation (every free displacement is the mean of its
    neighbours') with the snapping displacements as Dirichlet values;
    unlabeled boundary vertices are kept in place. The system is factorized
    once and solved per coordinate.

    Returns:
        np.ndarray: The displacement of every vertex, in the order of
            :py:meth:`~brepmesh.mesh.LabeledTriMesh.vertices`

    Raises:
        StitchingError: If a free vertex has no neighbours
    """
    enforce_simplicial_embedding(mesh, mesh.boundary_edges())

    verts = mesh.vertices()
    index = {v: i for i, v in enumerate(verts)}
    disp = np.zeros((len(verts), 3))
    fixed = np.zeros(len(verts), dtype=bool)
    bverts = mesh.boundary_vertices()

    for v in verts:
        target = _target_position(mesh, brep, v)
        if target is not None:
            disp[index[v]] = target - mesh.positions[v]
            fixed[index[v]] = True
        elif v in bverts:
            fixed[index[v]] = True

    free = np.flatnonzero(~fixed)
    if len(free):
        disp[free] = _solve_harmonic(mesh, verts, index, fixed, disp)

    for v in verts:
        target = _target_position(mesh, brep, v)
        if target is not None:
            mesh.positions[v] = np.array(target, dtype=float)
        else:
            mesh.positions[v] = mesh.positions[v] + disp[index[v]]

    log.debug(
        "Snapped %d labeled vertices, diffused onto %d free ones; max "
        "displacement %.3g.",
        int(fixed.sum()),
        len(free),
        float(np.linalg.norm(disp, axis=1).max()) if len(disp) else 0.0,
    )
    return disp


def _solve_harmonic(mesh, verts, index, fixed, disp) -> np.ndarray:
    free = np.flatnonzero(~fixed)
    free_pos = -np.ones(len(verts), dtype=int)
    free_pos[free] = np.arange(len(free))

    rows, cols, vals = [], [], []
    rhs = np.zeros((len(free), 3))
    for k, i in enumerate(free):
        nbrs = sorted(mesh.neighbors(verts[i]))
        if not nbrs:
            raise StitchingError(f"Vertex {verts[i]} has no neighbours")
        rows.append(k)
        cols.append(k)
        vals.append(float(len(nbrs)))
        for w in nbrs:
            j = index[w]
            if fixed[j]:
                rhs[k] += disp[j]
            else:
                rows.append(k)
                cols.append(free_pos[j])
                vals.append(-1.0)

    n = len(free)
    a = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()
    lu = splu(a)
    return np.column_stack([lu.solve(rhs[:, d]) for d in range(3)])


# -----------------------------------------------------------------------------


def merge_key(mesh: LabeledTriMesh, face: int, v: int) -> Hashable:
    """The identity of a vertex across face meshes"""
    if v in mesh.bvertex:
        return ("v", mesh.bvertex[v])
    if v in mesh.bedge:
        edge, t = mesh.bedge[v]
        return ("e", edge, t)
    return ("i", face, v)


def _chain_components(mesh: LabeledTriMesh) -> Dict[int, Dict[int, int]]:
    """Per b-edge label: maps chain vertices (excluding b-vertices) to the
    id of the chain they belong to"""
    result = {}
    for label in sorted(set(mesh.edge_labels.values())):
        uf = UnionFind()
        for a, b in mesh.labeled_edges(label):
            for v in (a, b):
                if v not in mesh.bvertex:
                    uf.add(v)
            if a not in mesh.bvertex and b not in mesh.bvertex:
                uf.union(a, b)
        result[label] = {v: uf.find(v) for g in uf.groups() for v in g}
    return result


def _glue_conflicts(mesh: LabeledTriMesh, face: int) -> List[Edge]:
    """Unlabeled edges that would become non-manifold, or would leave fewer
    than three edges between two copies of a b-edge, once vertices with
    equal merge keys are identified"""
    comps = _chain_components(mesh)
    key = {v: merge_key(mesh, face, v) for v in mesh.vertices()}

    def chain_ids(v) -> Dict[int, int]:
        return {lbl: c[v] for lbl, c in comps.items() if v in c}

    bad = set()
    by_keys = defaultdict(list)
    for a, b in sorted(mesh.edges()):
        lbl = mesh.edge_label(a, b)
        by_keys[frozenset((key[a], key[b]))].append(((a, b), lbl))
        if lbl is not None:
            continue
        if key[a] == key[b]:
            bad.add((a, b))
        ca, cb = chain_ids(a), chain_ids(b)
        if any(cb.get(lbl) not in (None, c) for lbl, c in ca.items()):
            bad.add((a, b))

    for edges in by_keys.values():
        if len(edges) > 1:
            bad.update(e for e, lbl in edges if lbl is None)

    for x in mesh.vertices():
        if mesh.is_labeled(x):
            continue
        seen: Dict[int, Tuple[int, int]] = {}
        for n in sorted(mesh.neighbors(x)):
            for lbl, c in chain_ids(n).items():
                if lbl in seen and seen[lbl][0] != c:
                    bad.add(ekey(x, n))
                    bad.add(ekey(x, seen[lbl][1]))
                seen.setdefault(lbl, (c, n))
    return sorted(bad)


def guard_refine(mesh: LabeledTriMesh, *, face: int = 0) -> int:
    """Refines a face mesh so that merging it stays manifold.

    Makes the mesh a simplicial embedding of its boundary, then splits
    unlabeled edges around vertices that are going to be identified (copies
    of the same b-edge or b-vertex) for at least two rounds, until the
    copies are at least three edges apart.

    Returns:
        int: The number of splits
    """
    num = enforce_simplicial_embedding(mesh, mesh.boundary_edges())
    for rnd in range(MAX_GUARD_ROUNDS):
        bad = _glue_conflicts(mesh, face)
        if not bad:
            break
        for a, b in bad:
            if mesh.has_edge(a, b):
                mesh.split_edge(a, b)
                num += 1
        log.debug(
            "Guard round %d on face %d: %d split(s).", rnd, face, len(bad)
        )
    else:
        if _glue_conflicts(mesh, face):
            raise StitchingError(
                f"Face {face} still has conflicting edges after "
                f"{MAX_GUARD_ROUNDS} guard rounds"
            )
    return num


# -----------------------------------------------------------------------------


def _dedup(values) -> List[float]:
    out: List[float] = []
    for t in sorted(values):
        if not out or t - out[-1] > PARAM_DEDUP_TOL:
            out.append(float(t))
    return out


def _canonical(t: float, canonical: List[float]) -> float:
    i = int(np.searchsorted(canonical, t))
    best = min(
        (c for c in canonical[max(i - 1, 0) : i + 1]),
        key=lambda c: abs(c - t),
    )
    return best


def canonical_params(
    meshes: Mapping[int, LabeledTriMesh], bedge: int
) -> List[float]:
    """The sorted union of the curve parameters of all chains labeled
    ``bedge``, deduplicated within :py:data:`PARAM_DEDUP_TOL`"""
    values = {0.0, 1.0}
    for mesh in meshes.values():
        for chain in label_chains(mesh, bedge):
            values.update(chain_params(mesh, chain, bedge))
    return _dedup(values)


def _conform_mesh(mesh, bedge: int, curve, canonical: List[float]) -> int:
    """Inserts the missing canonical parameters into every chain of
    ``bedge`` and snaps existing parameters to their canonical value"""
    num = 0
    for chain in label_chains(mesh, bedge):
        params = chain_params(mesh, chain, bedge)
        for v, t in zip(chain, params):
            if v not in mesh.bvertex:
                mesh.bedge[v] = (bedge, _canonical(t, canonical))

        for (a, b), (ta, tb) in zip(
            zip(chain, chain[1:]), zip(params, params[1:])
        ):
            lo, hi = min(ta, tb), max(ta, tb)
            inner = [
                t
                for t in canonical
                if lo + PARAM_DEDUP_TOL < t < hi - PARAM_DEDUP_TOL
            ]
            if ta > tb:
                inner.reverse()
            cur = a
            for t in inner:
                cur = mesh.split_edge(cur, b, curve.eval(t), t=t)
                num += 1
    return num


def conform_edge(
    mesh_a: LabeledTriMesh,
    mesh_b: LabeledTriMesh,
    bedge: int,
    curve,
    *,
    canonical: Optional[List[float]] = None,
) -> List[float]:
    """Makes the chains of ``bedge`` in two face meshes identical: both get
    a vertex at every parameter of the other.

    Returns:
        List[float]: The canonical parameter list both chains now follow
    """
    if canonical is None:
        canonical = canonical_params({0: mesh_a, 1: mesh_b}, bedge)
    _conform_mesh(mesh_a, bedge, curve, canonical)
    if mesh_b is not mesh_a:
        _conform_mesh(mesh_b, bedge, curve, canonical)
    return canonical


def conform_all(meshes: Mapping[int, LabeledTriMesh], brep: BRep) -> int:
    """Conforms every b-edge across all face meshes using it; returns the
    number of inserted vertices"""
    users = defaultdict(list)
    for face, mesh in meshes.items():
        for label in set(mesh.edge_labels.values()):
            users[label].append(face)

    num = 0
    for bedge in sorted(users):
        sub = {f: meshes[f] for f in sorted(users[bedge])}
        canonical = canonical_params(sub, bedge)
        curve = brep.curve(bedge)
        for mesh in sub.values():
            num += _conform_mesh(mesh, bedge, curve, canonical)
    log.debug("Conformed %d b-edges, inserted %d vertices.", len(users), num)
    return num


def merge_all(
    meshes: Mapping[int, LabeledTriMesh],
    topology: BRepTopology,
    *,
    scale: float,
    merge_tol: float = 1e-9,
) -> LabeledTriMesh:
    """Merges conforming face meshes into one mesh by identifying vertices
    with equal merge keys.

    Raises:
        StitchingError: If vertices with equal keys are further apart than
            ``merge_tol`` times ``scale``, or a triangle degenerates
    """
    merged = LabeledTriMesh(scale=scale)
    key_to_vid: Dict[Hashable, int] = {}
    tol = merge_tol * scale

    for face in sorted(meshes):
        mesh = meshes[face]
        local = {}
        for v in mesh.vertices():
            key = merge_key(mesh, face, v)
            pos = mesh.positions[v]
            if key in key_to_vid:
                g = key_to_vid[key]
                gap = float(np.linalg.norm(merged.positions[g] - pos))
                if gap > tol:
                    raise StitchingError(
                        f"Vertices with key {key} are {gap:.3g} apart"
                    )
            else:
                g = merged.add_vertex(
                    pos,
                    bvertex=mesh.bvertex.get(v),
                    bedge=mesh.bedge.get(v) if key[0] == "e" else None,
                )
                key_to_vid[key] = g
            local[v] = g

        for tid in sorted(mesh.tris):
            a, b, c = (local[v] for v in mesh.tris[tid])
            if len({a, b, c}) != 3:
                raise StitchingError(
                    f"Triangle {tid} of face {face} degenerates when merged"
                )
            merged.add_triangle(a, b, c, face=face)
        for (a, b), lbl in mesh.edge_labels.items():
            merged.label_edge(local[a], local[b], lbl)

    merged.bedge_ends = {
        e.id: (e.start, e.end) for e in topology.edges.values()
    }
    log.debug("Merged %d face meshes: %s", len(meshes), merged)
    return merged

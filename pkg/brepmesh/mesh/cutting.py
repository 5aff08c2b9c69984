"""Cutting meshes along edge chains, welding, and component analysis.

The disk predicate used throughout is purely combinatorial: a component is
a disk iff it is connected, has Euler characteristic 1 and exactly one
boundary loop.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set

from ..exceptions import ChainError
from .trimesh import Edge, LabeledTriMesh, ekey, tri_edges

log = logging.getLogger(__name__)


# -----------------------------------------------------------------------------


class UnionFind:
    """Disjoint sets over hashable items; representatives are the minimal
    items of each set"""

    def __init__(self, items: Iterable = ()):
        self._parent = {x: x for x in items}

    def add(self, x):
        self._parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if rb < ra:
            ra, rb = rb, ra
        self._parent[rb] = ra

    def groups(self) -> List[list]:
        """All sets, each sorted, ordered by their minimal item"""
        out: Dict = {}
        for x in sorted(self._parent):
            out.setdefault(self.find(x), []).append(x)
        return [out[k] for k in sorted(out)]


@dataclass(frozen=True)
class EdgeChain:
    """An ordered simple path or simple cycle of mesh vertices.

    For cycles, the closing edge from the last to the first vertex is
    implied.
    """

    vertices: tuple
    closed: bool = False
    label: Optional[int] = None
    role: str = "trace"

    def __post_init__(self):
        n = len(self.vertices)
        if n < 2 or (self.closed and n < 3):
            raise ChainError(f"Too few vertices for a chain: {self.vertices}")
        if len(set(self.vertices)) != n:
            raise ChainError(
                f"Chain is not simple, it repeats a vertex: {self.vertices}"
            )

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def edges(self) -> List[Edge]:
        vs = list(self.vertices)
        pairs = list(zip(vs[:-1], vs[1:]))
        if self.closed:
            pairs.append((vs[-1], vs[0]))
        return [ekey(a, b) for a, b in pairs]

    def length(self, mesh: LabeledTriMesh) -> float:
        return sum(mesh.edge_length(a, b) for a, b in self.edges)


@dataclass
class CutResult:
    """The triangle sets of the components after a cut, ordered by their
    minimal triangle id, and a map from vertex copies to original ids"""

    components: List[FrozenSet[int]] = field(default_factory=list)
    originals: Dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class ComponentInfo:
    triangles: FrozenSet[int]
    V: int
    E: int
    F: int
    boundary_loops: int

    @property
    def euler(self) -> int:
        return self.V - self.E + self.F

    @property
    def is_disk(self) -> bool:
        return self.euler == 1 and self.boundary_loops == 1


# -----------------------------------------------------------------------------


def cut_along_chain(mesh: LabeledTriMesh, chain: EdgeChain) -> CutResult:
    """Cuts the mesh along a simple path or cycle of existing edges.

    Raises:
        ChainError: If an edge of the chain does not exist
    """
    return cut_along_edges(mesh, chain.edges)


def cut_along_edges(
    mesh: LabeledTriMesh, edges: Iterable[Edge]
) -> CutResult:
    """Cuts the mesh along an arbitrary set of edges, in place.

    Around every endpoint of a cut edge, the incident triangles are grouped
    into fans that are connected through uncut edges. The fan with the
    lowest triangle id keeps the vertex; every further fan gets a copy
    carrying the same position and labels.

    Returns:
        CutResult: The resulting edge-connected components
    """
    cut = {ekey(*e) for e in edges}
    for e in sorted(cut):
        if not mesh.has_edge(*e):
            raise ChainError(f"Cannot cut along missing edge {e}")

    old_labels = dict(mesh.edge_labels)
    cut_vertices = sorted({v for e in cut for v in e})

    # Compute all fans on the original connectivity first
    fans = {v: _fans_around(mesh, v, cut) for v in cut_vertices}

    originals = {}
    for v in cut_vertices:
        for fan in fans[v][1:]:
            copy_id = mesh.add_vertex(
                mesh.positions[v],
                uv=mesh.uv.get(v),
                bvertex=mesh.bvertex.get(v),
                bedge=mesh.bedge.get(v),
            )
            originals[copy_id] = v
            for tid in fan:
                face = mesh.tri_face[tid]
                tri = tuple(copy_id if w == v else w for w in mesh.tris[tid])
                mesh.remove_triangle(tid)
                mesh.tris[tid] = tri
                mesh.tri_face[tid] = face
                for w in tri:
                    mesh.vtris[w].add(tid)

    def original(v: int) -> int:
        return originals.get(v, v)

    mesh.edge_labels = {}
    for tri in mesh.tris.values():
        for a, b in tri_edges(tri):
            lbl = old_labels.get(ekey(original(a), original(b)))
            if lbl is not None:
                mesh.edge_labels[(a, b)] = lbl

    result = CutResult(
        components=edge_components(mesh), originals=originals
    )
    log.debug(
        "Cut along %d edges: %d vertex copies, %d component(s).",
        len(cut),
        len(originals),
        len(result),
    )
    return result


def _fans_around(
    mesh: LabeledTriMesh, v: int, cut: Set[Edge]
) -> List[List[int]]:
    """Groups the triangles around ``v`` that are connected via uncut edges
    incident to ``v``; ordered by minimal triangle id"""
    tids = sorted(mesh.vtris[v])
    uf = UnionFind(tids)
    by_edge: Dict[Edge, List[int]] = {}
    for tid in tids:
        for w in mesh.tris[tid]:
            if w != v:
                by_edge.setdefault(ekey(v, w), []).append(tid)

    for e, ts in by_edge.items():
        if e in cut:
            continue
        for t in ts[1:]:
            uf.union(ts[0], t)
    return uf.groups()


def edge_components(
    mesh: LabeledTriMesh,
    tids: Optional[Iterable[int]] = None,
    *,
    blocked: Iterable[Edge] = (),
) -> List[FrozenSet[int]]:
    """Edge-connected triangle components, ordered by minimal triangle id.

    Triangles are not connected across ``blocked`` edges, which gives the
    components of cutting along these edges without modifying the mesh.
    """
    tids = sorted(mesh.tris if tids is None else tids)
    blocked = {ekey(*e) for e in blocked}
    uf = UnionFind(tids)
    by_edge: Dict[Edge, int] = {}
    for tid in tids:
        for e in tri_edges(mesh.tris[tid]):
            if e in blocked:
                continue
            if e in by_edge:
                uf.union(by_edge[e], tid)
            else:
                by_edge[e] = tid
    return [frozenset(g) for g in uf.groups()]


def keep_triangles(mesh: LabeledTriMesh, keep: Iterable[int]):
    """Removes every triangle not in ``keep`` as well as orphaned vertices
    and edge labels"""
    keep = set(keep)
    for tid in sorted(set(mesh.tris) - keep):
        mesh.remove_triangle(tid)
    mesh.remove_unreferenced_vertices()
    mesh.prune_edge_labels()


def weld(mesh: LabeledTriMesh, pairs: Sequence[tuple]) -> Dict[int, int]:
    """Identifies vertices: every ``(keep, drop)`` pair replaces ``drop`` by
    ``keep`` in all triangles.

    Triangles that become degenerate are removed. The surviving vertex takes
    the stronger label. Edge labels are carried over.

    Returns:
        Dict[int, int]: Maps every dropped vertex to its representative
    """
    uf = UnionFind()
    for keep, drop in pairs:
        uf.add(keep)
        uf.add(drop)
    for keep, drop in pairs:
        uf.union(keep, drop)

    rep = {}
    for group in uf.groups():
        target = min(
            group, key=lambda v: (-mesh.label_strength(v), v)
        )
        for v in group:
            if v != target:
                rep[v] = target
    if not rep:
        return rep

    old_labels = dict(mesh.edge_labels)
    for v, target in rep.items():
        if mesh.label_strength(v) > mesh.label_strength(target):
            mesh.bedge[target] = mesh.bedge[v]

    affected = sorted({t for v in rep for t in mesh.vtris.get(v, ())})
    for tid in affected:
        tri = tuple(rep.get(w, w) for w in mesh.tris[tid])
        face = mesh.tri_face[tid]
        mesh.remove_triangle(tid)
        if len(set(tri)) == 3:
            mesh.tris[tid] = tri
            mesh.tri_face[tid] = face
            for w in tri:
                mesh.vtris[w].add(tid)

    mesh.edge_labels = {}
    for (a, b), lbl in old_labels.items():
        e = ekey(rep.get(a, a), rep.get(b, b))
        if e[0] != e[1]:
            mesh.edge_labels.setdefault(e, lbl)
    for v in rep:
        if not mesh.vtris.get(v):
            mesh.remove_vertex(v)
    mesh.prune_edge_labels()
    return rep


# -----------------------------------------------------------------------------


def boundary_loop_count(boundary: Iterable[Edge]) -> int:
    """Cycle rank ``E - V + C`` of the boundary graph, which equals the
    number of boundary loops of a surface"""
    boundary = list(boundary)
    if not boundary:
        return 0
    verts = {v for e in boundary for v in e}
    uf = UnionFind(verts)
    for a, b in boundary:
        uf.union(a, b)
    num_comps = len({uf.find(v) for v in verts})
    return len(boundary) - len(verts) + num_comps


def _edge_counts(
    mesh: LabeledTriMesh, tids: Iterable[int]
) -> Dict[Edge, int]:
    emap: Dict[Edge, int] = {}
    for tid in tids:
        for e in tri_edges(mesh.tris[tid]):
            emap[e] = emap.get(e, 0) + 1
    return emap


def component_boundary(
    mesh: LabeledTriMesh, tids: Iterable[int]
) -> List[Edge]:
    """The edges used by exactly one triangle of the given set"""
    return sorted(e for e, n in _edge_counts(mesh, tids).items() if n == 1)


def analyze_triangles(
    mesh: LabeledTriMesh, tids: Iterable[int]
) -> ComponentInfo:
    """Counts of a set of triangles, considered as a surface of its own"""
    tids = frozenset(tids)
    emap = _edge_counts(mesh, tids)
    verts = {v for tid in tids for v in mesh.tris[tid]}
    boundary = [e for e, n in emap.items() if n == 1]
    return ComponentInfo(
        triangles=tids,
        V=len(verts),
        E=len(emap),
        F=len(tids),
        boundary_loops=boundary_loop_count(boundary),
    )


def component_analysis(mesh: LabeledTriMesh) -> List[ComponentInfo]:
    """Per edge-connected component: counts, boundary loops, disk flag"""
    return [analyze_triangles(mesh, c) for c in edge_components(mesh)]


def is_disk(mesh: LabeledTriMesh) -> bool:
    """Whether the whole mesh is a single combinatorial disk"""
    comps = component_analysis(mesh)
    return len(comps) == 1 and comps[0].is_disk

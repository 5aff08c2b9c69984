"""An editable, labeled triangle mesh and its local operations.

Vertices and triangles are addressed by integer ids that are never reused.
Triangles are stored as oriented vertex triples and carry the id of the
b-face they belong to. Edges are keyed by the sorted pair of their vertex
ids and may carry a b-edge label. Vertices may carry a b-vertex label or a
``(b-edge, t)`` label.

Labels obey a strength order: b-vertex over b-edge over none.
"""

import logging
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

import numpy as np

from ..exceptions import (
    DegenerateTriangleError,
    FeatureEdgeError,
    FrozenVertexError,
    LinkConditionError,
    MeshOperationError,
)

log = logging.getLogger(__name__)

Edge = Tuple[int, int]


def ekey(a: int, b: int) -> Edge:
    """The canonical (sorted) key of an undirected edge"""
    return (a, b) if a < b else (b, a)


def tri_edges(tri: Tuple[int, int, int]) -> Iterator[Edge]:
    a, b, c = tri
    yield ekey(a, b)
    yield ekey(b, c)
    yield ekey(c, a)


def rotate_to_edge(tri: Tuple[int, int, int], a: int, b: int):
    """Rotates a triangle such that the edge ``{a, b}`` comes first, keeping
    the orientation; returns ``(p0, p1, p2)``"""
    for i in range(3):
        p0, p1, p2 = tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]
        if {p0, p1} == {a, b}:
            return p0, p1, p2
    raise MeshOperationError(f"Triangle {tri} does not contain edge {a, b}")


# -----------------------------------------------------------------------------


class LabeledTriMesh:
    """A triangle mesh whose entities carry B-Rep provenance labels.

    Args:
        scale (float): The model bounding box diagonal; tolerances of the
            local operations are relative to it.
    """

    def __init__(self, *, scale: float = 1.0):
        self.scale = float(scale)

        self.positions: Dict[int, np.ndarray] = {}
        self.uv: Dict[int, Tuple[float, float]] = {}
        self.bvertex: Dict[int, int] = {}
        self.bedge: Dict[int, Tuple[int, float]] = {}

        self.tris: Dict[int, Tuple[int, int, int]] = {}
        self.tri_face: Dict[int, int] = {}
        self.vtris: Dict[int, Set[int]] = {}
        self.edge_labels: Dict[Edge, int] = {}

        self.bedge_ends: Dict[int, Tuple[int, int]] = {}
        """Maps b-edge ids to their start and end b-vertex ids; used to
        derive the curve parameter of b-vertices along a chain"""

        self._next_vid = 0
        self._next_tid = 0

    # .. Construction .........................................................

    @classmethod
    def from_arrays(
        cls,
        points,
        triangles,
        *,
        face: int = 0,
        uv=None,
        scale: Optional[float] = None,
    ) -> "LabeledTriMesh":
        """Builds a mesh from a point array and a triangle index array"""
        points = np.asarray(points, dtype=float)
        if scale is None:
            scale = float(
                np.linalg.norm(points.max(axis=0) - points.min(axis=0))
            )
        mesh = cls(scale=scale or 1.0)
        for i, p in enumerate(points):
            mesh.add_vertex(p, uv=None if uv is None else tuple(uv[i]))
        for a, b, c in np.asarray(triangles, dtype=int):
            mesh.add_triangle(int(a), int(b), int(c), face=face)
        return mesh

    def add_vertex(
        self,
        position,
        *,
        uv: Optional[Tuple[float, float]] = None,
        bvertex: Optional[int] = None,
        bedge: Optional[Tuple[int, float]] = None,
    ) -> int:
        vid = self._next_vid
        self._next_vid += 1
        self.positions[vid] = np.array(position, dtype=float)
        self.vtris[vid] = set()
        if uv is not None:
            self.uv[vid] = (float(uv[0]), float(uv[1]))
        if bvertex is not None:
            self.bvertex[vid] = bvertex
        if bedge is not None:
            self.bedge[vid] = (bedge[0], float(bedge[1]))
        return vid

    def add_triangle(self, a: int, b: int, c: int, *, face: int) -> int:
        if len({a, b, c}) != 3:
            raise DegenerateTriangleError(
                f"Triangle ({a}, {b}, {c}) repeats a vertex"
            )
        tid = self._next_tid
        self._next_tid += 1
        self.tris[tid] = (a, b, c)
        self.tri_face[tid] = face
        for v in (a, b, c):
            self.vtris[v].add(tid)
        return tid

    def remove_triangle(self, tid: int):
        for v in self.tris.pop(tid):
            self.vtris[v].discard(tid)
        del self.tri_face[tid]

    def remove_vertex(self, vid: int):
        """Removes an isolated vertex and its labels"""
        if self.vtris.get(vid):
            raise MeshOperationError(f"Vertex {vid} is still referenced")
        for store in (self.positions, self.uv, self.bvertex, self.bedge):
            store.pop(vid, None)
        self.vtris.pop(vid, None)

    def remove_unreferenced_vertices(self) -> int:
        unused = [v for v, ts in self.vtris.items() if not ts]
        for v in unused:
            self.remove_vertex(v)
        return len(unused)

    def copy(self) -> "LabeledTriMesh":
        new = type(self).__new__(type(self))
        new.__dict__.update(_copy_state(self.__dict__))
        return new

    def snapshot_state(self) -> dict:
        """A copy of the mutable state, see :py:meth:`restore_state`"""
        return _copy_state(self.__dict__)

    def restore_state(self, state: dict):
        self.__dict__.update(_copy_state(state))

    def submesh(self, tids: Iterable[int]) -> "LabeledTriMesh":
        """A new mesh made of the given triangles only.

        Vertex and triangle ids are kept, as are the labels of the vertices
        and edges the triangles use.
        """
        sub = type(self)(scale=self.scale)
        tids = sorted(tids)
        verts = {v for t in tids for v in self.tris[t]}

        sub.positions = {v: self.positions[v].copy() for v in verts}
        sub.vtris = {v: set() for v in verts}
        for name in ("uv", "bvertex", "bedge"):
            src = getattr(self, name)
            setattr(sub, name, {v: src[v] for v in verts if v in src})

        for t in tids:
            sub.tris[t] = self.tris[t]
            sub.tri_face[t] = self.tri_face[t]
            for v in self.tris[t]:
                sub.vtris[v].add(t)

        sub.edge_labels = {
            e: lbl
            for e, lbl in self.edge_labels.items()
            if e[0] in verts and e[1] in verts and sub.has_edge(*e)
        }
        sub.bedge_ends = dict(self.bedge_ends)
        sub._next_vid = self._next_vid
        sub._next_tid = self._next_tid
        return sub

    # .. Basic queries ........................................................

    def __repr__(self) -> str:
        return (
            f"<LabeledTriMesh: V={self.num_vertices}, E={self.num_edges}, "
            f"F={self.num_triangles}>"
        )

    @property
    def num_vertices(self) -> int:
        return sum(1 for ts in self.vtris.values() if ts)

    @property
    def num_triangles(self) -> int:
        return len(self.tris)

    @property
    def num_edges(self) -> int:
        return len(self.edges())

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_triangles

    def vertices(self) -> List[int]:
        """Ids of all vertices referenced by a triangle, sorted"""
        return sorted(v for v, ts in self.vtris.items() if ts)

    def edges(self) -> Set[Edge]:
        return {e for tri in self.tris.values() for e in tri_edges(tri)}

    def edge_map(self) -> Dict[Edge, List[int]]:
        """Maps every edge to its incident triangles, in id order"""
        emap: Dict[Edge, List[int]] = {}
        for tid in sorted(self.tris):
            for e in tri_edges(self.tris[tid]):
                emap.setdefault(e, []).append(tid)
        return emap

    def edge_tris(self, a: int, b: int) -> List[int]:
        return sorted(self.vtris.get(a, set()) & self.vtris.get(b, set()))

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.vtris.get(a, set()) & self.vtris.get(b, set()))

    def is_boundary_edge(self, a: int, b: int) -> bool:
        return len(self.edge_tris(a, b)) == 1

    def boundary_edges(self) -> Set[Edge]:
        return {e for e, ts in self.edge_map().items() if len(ts) == 1}

    def boundary_vertices(self) -> Set[int]:
        return {v for e in self.boundary_edges() for v in e}

    def is_boundary_vertex(self, v: int) -> bool:
        return any(
            self.is_boundary_edge(v, w) for w in self.neighbors(v)
        )

    def neighbors(self, v: int) -> Set[int]:
        return {
            w for tid in self.vtris.get(v, ()) for w in self.tris[tid]
        } - {v}

    def opposite_vertices(self, a: int, b: int) -> List[int]:
        return [
            next(w for w in self.tris[tid] if w not in (a, b))
            for tid in self.edge_tris(a, b)
        ]

    def faces(self) -> List[int]:
        return sorted(set(self.tri_face.values()))

    def triangles_of_face(self, face: int) -> List[int]:
        return sorted(t for t, f in self.tri_face.items() if f == face)

    # .. Geometry .............................................................

    def tri_points(self, tid: int) -> np.ndarray:
        return np.array([self.positions[v] for v in self.tris[tid]])

    def triangle_area(self, tid: int) -> float:
        a, b, c = self.tri_points(tid)
        return 0.5 * float(np.linalg.norm(np.cross(b - a, c - a)))

    def is_degenerate(self, tid: int) -> bool:
        """Whether a triangle has (near) zero area; it cannot be split"""
        tol = 1e-12 * self.scale
        return self.triangle_area(tid) <= tol * tol

    def triangle_normal(self, tid: int) -> np.ndarray:
        """Unit normal; zero for degenerate triangles"""
        a, b, c = self.tri_points(tid)
        n = np.cross(b - a, c - a)
        norm = np.linalg.norm(n)
        return n / norm if norm > 0.0 else n

    def edge_length(self, a: int, b: int) -> float:
        return float(np.linalg.norm(self.positions[a] - self.positions[b]))

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray, Dict[int, int]]:
        """Compact arrays ``(points, triangles)`` plus the map from vertex id
        to row index; rows follow vertex id order, triangles tid order"""
        vids = self.vertices()
        index = {v: i for i, v in enumerate(vids)}
        points = np.array([self.positions[v] for v in vids]).reshape(-1, 3)
        tris = np.array(
            [[index[v] for v in self.tris[t]] for t in sorted(self.tris)],
            dtype=int,
        ).reshape(-1, 3)
        return points, tris, index

    # .. Labels ...............................................................

    def edge_label(self, a: int, b: int) -> Optional[int]:
        return self.edge_labels.get(ekey(a, b))

    def label_edge(self, a: int, b: int, bedge: Optional[int]):
        if bedge is None:
            self.edge_labels.pop(ekey(a, b), None)
        else:
            self.edge_labels[ekey(a, b)] = bedge

    def label_strength(self, v: int) -> int:
        if v in self.bvertex:
            return 2
        return 1 if v in self.bedge else 0

    def is_frozen(self, v: int) -> bool:
        return v in self.bvertex

    def is_labeled(self, v: int) -> bool:
        return v in self.bvertex or v in self.bedge

    def param_on(self, v: int, bedge: int, *, near: float = 0.0) -> float:
        """The curve parameter of a vertex on the given b-edge.

        For b-vertex-labeled vertices, this is 0 or 1 depending on which end
        of the b-edge they are; on closed b-edges, the end closer to
        ``near`` is chosen.
        """
        if v in self.bedge and self.bedge[v][0] == bedge:
            return self.bedge[v][1]
        if v in self.bvertex and bedge in self.bedge_ends:
            start, end = self.bedge_ends[bedge]
            bv = self.bvertex[v]
            if start == end == bv:
                return 1.0 if near > 0.5 else 0.0
            if bv == start:
                return 0.0
            if bv == end:
                return 1.0
        raise MeshOperationError(
            f"Vertex {v} carries no parameter on b-edge {bedge}"
        )

    def prune_edge_labels(self):
        """Drops labels of edges that no longer exist"""
        self.edge_labels = {
            e: lbl for e, lbl in self.edge_labels.items() if self.has_edge(*e)
        }

    def labeled_edges(self, bedge: Optional[int] = None) -> List[Edge]:
        return sorted(
            e
            for e, lbl in self.edge_labels.items()
            if bedge is None or lbl == bedge
        )

    # .. Local operations .....................................................

    def split_edge(
        self,
        a: int,
        b: int,
        position=None,
        *,
        t: Optional[float] = None,
        uv: Optional[Tuple[float, float]] = None,
    ) -> int:
        """Splits the edge ``{a, b}`` by inserting a new vertex.

        Args:
            a, b (int): The edge's endpoints
            position (optional): Where to place the new vertex; defaults to
                the midpoint
            t (float, optional): The curve parameter of the new vertex if the
                edge is labeled; interpolated from the endpoints otherwise
            uv (optional): Parametric coordinates; interpolated if both
                endpoints have them

        Returns:
            int: The id of the new vertex
        """
        tids = self.edge_tris(a, b)
        if not tids:
            raise MeshOperationError(f"Edge {a, b} does not exist")

        pa, pb = self.positions[a], self.positions[b]
        if position is None:
            position = 0.5 * (pa + pb)
        position = np.asarray(position, dtype=float)
        d = pb - pa
        dd = float(np.dot(d, d))
        lam = 0.5 if dd == 0.0 else float(np.dot(position - pa, d) / dd)
        lam = min(max(lam, 0.0), 1.0)

        if uv is None and a in self.uv and b in self.uv:
            uv = tuple(
                (1.0 - lam) * np.array(self.uv[a]) + lam * np.array(self.uv[b])
            )

        label = self.edge_label(a, b)
        bedge = None
        if label is not None:
            if t is None:
                ta = self.param_on(a, label)
                tb = self.param_on(b, label, near=ta)
                ta = self.param_on(a, label, near=tb)
                t = (1.0 - lam) * ta + lam * tb
            bedge = (label, t)

        m = self.add_vertex(position, uv=uv, bedge=bedge)
        for tid in tids:
            face = self.tri_face[tid]
            p0, p1, p2 = rotate_to_edge(self.tris[tid], a, b)
            self.remove_triangle(tid)
            self.add_triangle(p0, m, p2, face=face)
            self.add_triangle(m, p1, p2, face=face)

        if label is not None:
            self.edge_labels.pop(ekey(a, b))
            self.label_edge(a, m, label)
            self.label_edge(m, b, label)
        return m

    def split_triangle(
        self,
        tid: int,
        position,
        *,
        uv: Optional[Tuple[float, float]] = None,
    ) -> int:
        """Inserts a vertex into a triangle (1-to-3 split).

        Positions within the coincidence tolerance of a corner return that
        corner; positions on an edge split the edge instead.

        Raises:
            DegenerateTriangleError: If the triangle has (near) zero area
        """
        tol = 1e-12 * self.scale
        pts = self.tri_points(tid)
        if self.is_degenerate(tid):
            raise DegenerateTriangleError(
                f"Cannot split triangle {tid} of zero area"
            )

        position = np.asarray(position, dtype=float)
        tri = self.tris[tid]
        for v, p in zip(tri, pts):
            if np.linalg.norm(position - p) <= tol:
                return v

        bary = barycentric(position, *pts)
        for i in range(3):
            if bary[i] * _height(pts, i) <= tol:
                a, b = tri[(i + 1) % 3], tri[(i + 2) % 3]
                return self.split_edge(a, b, position, uv=uv)

        if uv is None and all(v in self.uv for v in tri):
            uv = tuple(
                sum(w * np.array(self.uv[v]) for w, v in zip(bary, tri))
            )

        face = self.tri_face[tid]
        a, b, c = tri
        m = self.add_vertex(position, uv=uv)
        self.remove_triangle(tid)
        self.add_triangle(a, b, m, face=face)
        self.add_triangle(b, c, m, face=face)
        self.add_triangle(c, a, m, face=face)
        return m

    def flip_edge(self, a: int, b: int) -> Tuple[int, int]:
        """Replaces the diagonal ``{a, b}`` of two triangles by the other one.

        Returns:
            Tuple[int, int]: The new edge
        """
        if self.edge_label(a, b) is not None:
            raise FeatureEdgeError(
                f"Cannot flip edge {a, b}: feature edge (b-edge "
                f"{self.edge_label(a, b)})"
            )
        tids = self.edge_tris(a, b)
        if len(tids) != 2:
            raise MeshOperationError(
                f"Cannot flip edge {a, b} with {len(tids)} incident "
                "triangle(s)"
            )
        t1, t2 = tids
        if self.tri_face[t1] != self.tri_face[t2]:
            raise FeatureEdgeError(
                f"Cannot flip edge {a, b} between different b-faces"
            )

        p0, p1, c = rotate_to_edge(self.tris[t1], a, b)
        q0, q1, d = rotate_to_edge(self.tris[t2], a, b)
        if (q0, q1) != (p1, p0):
            raise MeshOperationError(
                f"Inconsistent orientation around edge {a, b}"
            )
        if c == d or self.has_edge(c, d):
            raise MeshOperationError(
                f"Flipping edge {a, b} would duplicate edge {c, d}"
            )

        face = self.tri_face[t1]
        self.remove_triangle(t1)
        self.remove_triangle(t2)
        self.add_triangle(p0, d, c, face=face)
        self.add_triangle(d, p1, c, face=face)
        return ekey(c, d)

    def check_collapse(self, keep: int, remove: int):
        """Raises if collapsing ``remove`` into ``keep`` is inadmissible"""
        tids = self.edge_tris(keep, remove)
        if not tids:
            raise MeshOperationError(f"Edge {keep, remove} does not exist")
        if self.is_frozen(remove):
            raise FrozenVertexError(
                f"Cannot remove vertex {remove}: frozen b-vertex "
                f"{self.bvertex[remove]}"
            )

        label = self.edge_label(keep, remove)
        if remove in self.bedge:
            chain = self.bedge[remove][0]
            if label != chain:
                raise FeatureEdgeError(
                    f"Cannot move chain vertex {remove} of b-edge {chain} "
                    "off its chain"
                )
        elif label is not None:
            raise FeatureEdgeError(
                f"Inconsistent labels on edge {keep, remove}"
            )

        boundary = self.is_boundary_edge(keep, remove)
        if (
            not boundary
            and self.is_boundary_vertex(keep)
            and self.is_boundary_vertex(remove)
        ):
            raise LinkConditionError(
                f"Edge {keep, remove} is interior but connects two boundary "
                "vertices"
            )

        common = self.neighbors(keep) & self.neighbors(remove)
        if common != set(self.opposite_vertices(keep, remove)):
            raise LinkConditionError(
                f"Collapsing edge {keep, remove} violates the link condition"
            )

        # Edges that merge must not carry different labels
        for w in common:
            la, lb = self.edge_label(keep, w), self.edge_label(remove, w)
            if la is not None and lb is not None and la != lb:
                raise FeatureEdgeError(
                    f"Collapsing edge {keep, remove} would merge b-edges "
                    f"{la} and {lb}"
                )

        if len(self.tris) - len(tids) < 2 or (
            len(self.neighbors(keep) | self.neighbors(remove)) <= 3
        ):
            raise LinkConditionError(
                f"Collapsing edge {keep, remove} would degenerate the mesh"
            )

    def collapse_edge(self, keep: int, remove: int):
        """Merges vertex ``remove`` into vertex ``keep``.

        The surviving vertex keeps its position and the stronger of the two
        labels; labels of merged edges are unified.

        Raises:
            MeshOperationError: If the collapse is inadmissible, see
                :py:meth:`check_collapse`
        """
        self.check_collapse(keep, remove)

        moved = {}
        for w in self.neighbors(remove) - {keep}:
            lbl = self.edge_labels.pop(ekey(remove, w), None)
            if lbl is not None:
                moved[w] = lbl
        self.edge_labels.pop(ekey(keep, remove), None)

        for tid in sorted(self.vtris[remove]):
            tri = self.tris[tid]
            face = self.tri_face[tid]
            self.remove_triangle(tid)
            if keep in tri:
                continue
            new = tuple(keep if v == remove else v for v in tri)
            self.add_triangle(*new, face=face)

        for w, lbl in moved.items():
            self.edge_labels[ekey(keep, w)] = lbl

        if self.label_strength(remove) > self.label_strength(keep):
            self.bedge[keep] = self.bedge[remove]
        self.remove_vertex(remove)


# -----------------------------------------------------------------------------


def barycentric(p, a, b, c) -> np.ndarray:
    """Barycentric coordinates of the projection of ``p`` into the plane of
    the triangle ``(a, b, c)``"""
    v0, v1, v2 = b - a, c - a, p - a
    d00, d01, d11 = np.dot(v0, v0), np.dot(v0, v1), np.dot(v1, v1)
    d20, d21 = np.dot(v2, v0), np.dot(v2, v1)
    denom = d00 * d11 - d01 * d01
    if denom == 0.0:
        return np.array([1.0, 0.0, 0.0])
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    return np.array([1.0 - v - w, v, w])


def _height(pts: np.ndarray, i: int) -> float:
    """Height of the triangle over the edge opposite to corner ``i``"""
    p = pts[i]
    a, b = pts[(i + 1) % 3], pts[(i + 2) % 3]
    base = np.linalg.norm(b - a)
    if base == 0.0:
        return 0.0
    return float(np.linalg.norm(np.cross(b - a, p - a)) / base)


def _copy_state(state: dict) -> dict:
    """Copies the containers of a mesh state; the values they hold are
    immutable, except for the position arrays, which are copied as well"""
    new = {k: dict(v) if isinstance(v, dict) else v for k, v in state.items()}
    new["positions"] = {v: p.copy() for v, p in state["positions"].items()}
    new["vtris"] = {v: set(ts) for v, ts in state["vtris"].items()}
    return new

"""Tracing b-loops as simple cycles of mesh edges.

A loop is traced segment by segment: every sample point of its curves is
projected onto the mesh, and consecutive projected vertices are connected
by a shortest path that avoids the forbidden edge set ``F``. ``F`` starts
out as the mesh boundary and grows by every traced edge, which keeps the
traced cycle simple. Cutting the mesh along the cycle then separates the
region the loop bounds from the rest.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import (
    Dict,
    Iterable,
    List,
    Literal,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import numpy as np

from ..exceptions import EmbeddingError, HeuristicRejected, LongTraceError
from ..mesh import (
    CutResult,
    EdgeChain,
    TriangleLocator,
    component_boundary,
    cut_along_edges,
    enforce_simplicial_embedding,
    keep_triangles,
)
from ..mesh.cutting import analyze_triangles, edge_components
from ..mesh.simplicial import feature_vertices
from ..mesh.trimesh import Edge, LabeledTriMesh, ekey
from ..sampling import SampledCurve
from .loops import LoopEdge, ManifoldLoop, VertexKey

log = logging.getLogger(__name__)

KEEP_DISK = "keep_disk"
KEEP_COMPLEMENT = "keep_complement"
KeepMode = Literal["keep_disk", "keep_complement"]

MAX_TRACE_RETRIES = 3
"""Local refinements attempted when no admissible path exists"""

NUDGE_FACTOR = 0.5
"""Projections onto forbidden features are moved this far towards the
centroid of the closest triangle"""


# -----------------------------------------------------------------------------


@dataclass
class TraceState:
    """The mutable state of tracing one loop (or one set of loops).

    Every change to ``F`` goes through :py:meth:`forbid` or
    :py:meth:`append`, which refine the mesh locally such that it stays a
    simplicial embedding of ``F``. This keeps the complement of ``F``
    connected, so that the next segment always has an admissible path.

    Attributes:
        mesh (LabeledTriMesh): The mesh being traced onto
        locator (TriangleLocator): Closest-triangle queries on the mesh
        forbidden (Set[Edge]): The forbidden edge set ``F``
        fverts (Set[int]): All endpoints of edges in ``F`` and the vertices
            of already placed b-vertices
        gamma (List[Edge]): The traced edges, in tracing order
        tol (float): The absolute coincidence tolerance
        s, e (int): Source and target of the current segment
    """

    mesh: LabeledTriMesh
    locator: TriangleLocator
    forbidden: Set[Edge]
    fverts: Set[int]
    tol: float
    gamma: List[Edge] = field(default_factory=list)
    s: Optional[int] = None
    e: Optional[int] = None

    @classmethod
    def start(
        cls, mesh: LabeledTriMesh, *, tol: float, forbid_boundary: bool = True
    ) -> "TraceState":
        """Initializes ``F`` with the mesh boundary and makes the mesh a
        simplicial embedding of it"""
        forbidden = set(mesh.boundary_edges()) if forbid_boundary else set()
        if forbidden:
            enforce_simplicial_embedding(mesh, forbidden)
        return cls(
            mesh=mesh,
            locator=TriangleLocator(mesh),
            forbidden=forbidden,
            fverts=feature_vertices(forbidden),
            tol=tol,
        )

    def embed(self, verts: Iterable[int]):
        """Restores the simplicial embedding of ``F`` around ``verts``"""
        enforce_simplicial_embedding(
            self.mesh, self.forbidden, vertices=verts, fverts=self.fverts
        )

    def forbid(self, edges):
        edges = [ekey(*e) for e in edges]
        self.forbidden.update(edges)
        for e in edges:
            self.fverts.update(e)
        self.embed({v for e in edges for v in e})

    def forbid_vertex(self, v: int):
        """Adds a single vertex, e.g. a placed b-vertex, to the vertices
        paths may only start or end in"""
        self.fverts.add(v)
        self.embed([v])

    def append(self, path: Sequence[int]):
        edges = [ekey(a, b) for a, b in zip(path, path[1:])]
        for e in edges:
            if e in self.forbidden:
                raise EmbeddingError(
                    f"Traced edge {e} is forbidden; the traced cycle would "
                    "not be simple"
                )
        self.gamma.extend(edges)
        self.forbid(edges)

    def project(self, point, *, near=None, away=None) -> int:
        return project_onto_mesh(
            self.mesh,
            point,
            locator=self.locator,
            forbidden_edges=self.forbidden,
            forbidden_vertices=self.fverts,
            tol=self.tol,
            near=near,
            away=away,
        )


def _line_distance(p, a, b) -> float:
    d = b - a
    n = float(np.linalg.norm(d))
    if n == 0.0:
        return float(np.linalg.norm(p - a))
    return float(np.linalg.norm(np.cross(p - a, d))) / n


def _centroid(mesh: LabeledTriMesh, tid: int) -> np.ndarray:
    return mesh.tri_points(tid).mean(axis=0)


def _tie_rank(mesh: LabeledTriMesh, tid: int, near, away) -> tuple:
    """Orders equally close triangles: far from ``away`` in parameter space
    first, then close to ``near``, then by id"""
    far = 0.0
    tri = mesh.tris[tid]
    if away is not None and all(v in mesh.uv for v in tri):
        uv = np.mean([mesh.uv[v] for v in tri], axis=0)
        far = -float(np.linalg.norm(uv - np.asarray(away, dtype=float)))
    close = 0.0
    if near is not None:
        near = np.asarray(near, dtype=float)
        close = float(np.linalg.norm(_centroid(mesh, tid) - near))
    return far, close, tid


def project_onto_mesh(
    mesh: LabeledTriMesh,
    point,
    *,
    locator: Optional[TriangleLocator] = None,
    forbidden_edges: Set[Edge] = frozenset(),
    forbidden_vertices: Set[int] = frozenset(),
    tol: Optional[float] = None,
    near=None,
    away=None,
) -> int:
    """Inserts the closest point of the mesh to ``point`` as a vertex.

    A coincident vertex is reused, a point on an edge splits that edge and
    any other point splits its triangle. If the closest feature is a
    forbidden vertex or edge, the point is moved towards the centroid of the
    triangle instead, so that the new vertex is never on ``F``.

    Args:
        near (optional): If several triangles are closest, the one whose
            centroid is closest to this position is used. On patches whose
            sides map onto the same curve (seams, poles), this keeps the
            samples of one curve on the side the trace comes from.
        away (optional): Parametric coordinates to stay away from; takes
            precedence over ``near``. Used for the second traversal of a
            seam, which belongs on the other side of the patch.

    Returns:
        int: The mesh vertex
    """
    if locator is None:
        locator = TriangleLocator(mesh)
    if tol is None:
        tol = 1e-12 * mesh.scale

    ties = locator.closest_triangles(point)
    if not ties:
        raise EmbeddingError("Cannot project onto an empty mesh")
    tid, q, _ = ties[0]
    if len(ties) > 1 and (near is not None or away is not None):
        tid, q, _ = min(
            ties, key=lambda tie: _tie_rank(mesh, tie[0], near, away)
        )

    tri = mesh.tris[tid]
    pts = mesh.tri_points(tid)

    for v, p in zip(tri, pts):
        if np.linalg.norm(q - p) <= tol:
            if v not in forbidden_vertices:
                return v
            return _nudge(mesh, tid, q)

    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        a, b = tri[j], tri[k]
        if _line_distance(q, pts[j], pts[k]) <= tol:
            if ekey(a, b) in forbidden_edges:
                return _nudge(mesh, tid, q)
            return mesh.split_edge(a, b, q)

    return mesh.split_triangle(tid, q)


def _nudge(mesh: LabeledTriMesh, tid: int, q) -> int:
    """Inserts a vertex between ``q`` and the centroid of a triangle; a
    triangle of zero area is replaced by the closest proper triangle around
    it, whose centroid is used directly"""
    if not mesh.is_degenerate(tid):
        return mesh.split_triangle(
            tid, q + NUDGE_FACTOR * (_centroid(mesh, tid) - q)
        )

    around = {t for v in mesh.tris[tid] for t in mesh.vtris[v]}
    proper = sorted(t for t in around if not mesh.is_degenerate(t))
    if not proper:
        raise EmbeddingError(
            f"No triangle of non-zero area around triangle {tid}"
        )
    best = min(
        proper,
        key=lambda t: (float(np.linalg.norm(_centroid(mesh, t) - q)), t),
    )
    return mesh.split_triangle(best, _centroid(mesh, best))


# -----------------------------------------------------------------------------


def shortest_path(
    mesh: LabeledTriMesh,
    s: int,
    e: int,
    *,
    forbidden_edges: Set[Edge],
    forbidden_vertices: Set[int],
) -> Optional[List[int]]:
    """Shortest path on the edge graph weighted by 3D edge length.

    The search is guided by the straight-line distance to ``e``, which never
    overestimates the remaining path length, so the result is the one of
    Dijkstra's algorithm while only a band around the segment is explored.

    Edges in ``forbidden_edges`` are never used; vertices in
    ``forbidden_vertices`` are only allowed as source or target. Paths of
    equal length are ordered lexicographically by their vertex sequence.

    Returns:
        Optional[List[int]]: The vertex sequence from ``s`` to ``e`` or None
            if ``e`` is not reachable
    """
    tie_tol = 1e-12 * mesh.scale
    target = mesh.positions[e]
    dist = {s: 0.0}
    prev: Dict[int, Optional[int]] = {s: None}
    done = set()

    def remaining(v) -> float:
        return float(np.linalg.norm(mesh.positions[v] - target))

    # Among equal estimates, shorter prefixes come first, so every
    # predecessor on a shortest path is settled before its successor
    heap = [(remaining(s), 0.0, s)]

    def path_to(v) -> List[int]:
        seq = []
        while v is not None:
            seq.append(v)
            v = prev[v]
        return seq[::-1]

    while heap:
        _, d, v = heappop(heap)
        if v in done:
            continue
        done.add(v)
        if v == e:
            return path_to(e)
        if v in forbidden_vertices and v != s:
            continue

        for w in sorted(mesh.neighbors(v)):
            if w in done or ekey(v, w) in forbidden_edges:
                continue
            if w in forbidden_vertices and w != e:
                continue
            nd = d + mesh.edge_length(v, w)
            old = dist.get(w)
            if old is None or nd < old - tie_tol:
                better = True
            elif abs(nd - old) <= tie_tol:
                better = path_to(v) + [w] < path_to(w)
            else:
                better = False
            if better:
                dist[w] = nd
                prev[w] = v
                heappush(heap, (nd + remaining(w), nd, w))
    return None


def _refine_around(mesh: LabeledTriMesh, state: TraceState, verts):
    """Local refinement that creates new admissible vertices around the
    segment endpoints and the forbidden vertices next to them"""
    ring = set(verts)
    for v in verts:
        ring |= mesh.neighbors(v)
    blocked = {v for v in ring if v in state.fverts}
    for v in sorted(blocked):
        ring |= mesh.neighbors(v)
    state.embed(ring)

    for v in sorted(set(verts) | blocked):
        for w in sorted(mesh.neighbors(v)):
            if ekey(v, w) not in state.forbidden and mesh.has_edge(v, w):
                mesh.split_edge(v, w)


def trace_segment(mesh: LabeledTriMesh, state: TraceState) -> EdgeChain:
    """Traces a shortest admissible path from ``state.s`` to ``state.e`` and
    appends it to the traced cycle and to ``F``.

    Raises:
        EmbeddingError: If no path exists even after local refinement
    """
    s, e = state.s, state.e
    if s == e:
        raise EmbeddingError(f"Segment from vertex {s} to itself")

    for attempt in range(MAX_TRACE_RETRIES + 1):
        path = shortest_path(
            mesh,
            s,
            e,
            forbidden_edges=state.forbidden,
            forbidden_vertices=state.fverts,
        )
        if path is not None:
            break
        if attempt == MAX_TRACE_RETRIES:
            raise EmbeddingError(
                f"No admissible path from vertex {s} to vertex {e} after "
                f"{MAX_TRACE_RETRIES} local refinements; |F| = "
                f"{len(state.forbidden)}"
            )
        log.debug("No path from %d to %d, refining locally ...", s, e)
        _refine_around(mesh, state, (s, e))

    state.append(path)
    return EdgeChain(vertices=tuple(path))


# -----------------------------------------------------------------------------


@dataclass
class LoopEmbedding:
    """The outcome of embedding one loop, or all loops of a face at once"""

    cycle: List[Edge]
    cut: CutResult
    kept: frozenset
    chain_lengths: Dict[int, float] = field(default_factory=dict)
    num_segments: int = 0


class LoopTracer:
    """Traces oriented b-edges one after the other onto a mesh.

    Args:
        mesh (LabeledTriMesh): The mesh to trace onto; modified in place
        curves (Dict[int, SampledCurve]): Endpoint-snapped samples per b-edge
        tol (float): Absolute coincidence tolerance
        boundary_tracing (bool): Whether the traces may use boundary edges.
            In this mode, connectivity is checked after every segment that
            touches the boundary through interior edges.
        long_trace_factor (float, optional): Raise
            :py:exc:`LongTraceError` if a chain gets longer than this factor
            times its curve
    """

    def __init__(
        self,
        mesh: LabeledTriMesh,
        curves: Dict[int, SampledCurve],
        *,
        tol: float,
        boundary_tracing: bool = False,
        long_trace_factor: Optional[float] = None,
    ):
        self.mesh = mesh
        self.curves = curves
        self.boundary_tracing = boundary_tracing
        self.long_trace_factor = long_trace_factor
        self.state = TraceState.start(
            mesh, tol=tol, forbid_boundary=not boundary_tracing
        )
        self.key_vertex: Dict[VertexKey, int] = {}
        self.chain_lengths: Dict[int, float] = {}
        self.num_segments = 0

        # Mean parametric position of the first traced copy of each b-edge
        self.chain_uv: Dict[int, np.ndarray] = {}

    def vertex_for(
        self, key: VertexKey, point, *, near=None, away=None
    ) -> int:
        """The mesh vertex of a b-vertex key; projected on first use"""
        if key not in self.key_vertex:
            v = self.state.project(point, near=near, away=away)
            self.mesh.bedge.pop(v, None)
            self.mesh.bvertex[v] = key[0]
            self.key_vertex[key] = v
            self.state.forbid_vertex(v)
        return self.key_vertex[key]

    def _samples(self, le: LoopEdge) -> Tuple[np.ndarray, np.ndarray]:
        sampled = self.curves[le.edge]
        if le.forward:
            return sampled.t, sampled.points
        return sampled.t[::-1], sampled.points[::-1]

    def trace_edge(self, le: LoopEdge, *, remaining=()) -> List[int]:
        """Traces one oriented b-edge and labels the resulting chain.

        Args:
            le (LoopEdge): The oriented b-edge with its vertex keys
            remaining: Points of the loop that are still to be traced; used
                for the connectivity check of boundary tracing

        Returns:
            List[int]: The vertex sequence of the chain
        """
        mesh, state = self.mesh, self.state
        ts, pts = self._samples(le)
        start, end = (le.start, le.end) if le.forward else (le.end, le.start)
        mesh.bedge_ends[le.edge] = (start[0], end[0])

        away = self.chain_uv.get(le.edge) if le.copy else None
        prev = self.vertex_for(le.start, pts[0], away=away)
        prev_t = ts[0]
        chain = [prev]
        length = 0.0
        n = len(pts) - 1

        for i in range(1, n + 1):
            last = i == n
            if last:
                v = self.vertex_for(
                    le.end, pts[i], near=mesh.positions[prev], away=away
                )
            else:
                if np.linalg.norm(pts[i] - mesh.positions[prev]) <= state.tol:
                    continue
                v = state.project(
                    pts[i], near=mesh.positions[prev], away=away
                )
                mesh.bedge[v] = (le.edge, float(ts[i]))
            if v == prev:
                continue

            state.s, state.e = prev, v
            path = trace_segment(mesh, state).vertices
            length += self._label_path(path, le.edge, prev_t, ts[i])
            chain.extend(path[1:])
            self.num_segments += 1

            if self.boundary_tracing:
                rest = list(pts[i + 1:]) + list(remaining)
                self._check_barrier(path, rest)
            prev, prev_t = v, ts[i]

        uvs = [mesh.uv[v] for v in chain if v in mesh.uv]
        if uvs:
            self.chain_uv.setdefault(le.edge, np.mean(uvs, axis=0))

        self.chain_lengths[le.edge] = (
            self.chain_lengths.get(le.edge, 0.0) + length
        )
        curve_length = self.curves[le.edge].length
        if (
            self.long_trace_factor is not None
            and length > self.long_trace_factor * curve_length
        ):
            raise LongTraceError(le.edge, length, curve_length)
        return chain

    def _label_path(self, path, bedge: int, t0: float, t1: float) -> float:
        """Labels the edges of a traced path and gives its inner vertices a
        curve parameter by arc-length interpolation; returns the length"""
        mesh = self.mesh
        seg = [mesh.edge_length(a, b) for a, b in zip(path, path[1:])]
        total = sum(seg)
        acc = 0.0
        for k, (a, b) in enumerate(zip(path, path[1:])):
            mesh.label_edge(a, b, bedge)
            acc += seg[k]
            if b != path[-1]:
                frac = acc / total if total > 0 else 0.5
                mesh.bedge[b] = (bedge, float(t0 + frac * (t1 - t0)))
        return total

    def _check_barrier(self, path, remaining):
        """Boundary tracing may split off parts of the mesh. If that
        happened, the part with most of the remaining points is kept and
        tracing continues in standard mode."""
        mesh, state = self.mesh, self.state
        touches = any(
            not mesh.is_boundary_edge(a, b)
            and (mesh.is_boundary_vertex(a) or mesh.is_boundary_vertex(b))
            for a, b in zip(path, path[1:])
        )
        if not touches:
            return

        comps = edge_components(mesh, blocked=state.gamma)
        if len(comps) == 1:
            return

        counts = Counter()
        owner = {t: i for i, c in enumerate(comps) for t in c}
        for p in remaining:
            tid = state.locator.closest_triangle(p)[0]
            if tid is not None:
                counts[owner[tid]] += 1
        best = max(
            range(len(comps)),
            key=lambda i: (counts[i], len(comps[i]), -min(comps[i])),
        )
        keep_triangles(mesh, comps[best])
        if any(not mesh.has_edge(*e) for e in state.gamma):
            raise HeuristicRejected(
                "Boundary tracing disconnected the mesh and lost traced edges"
            )

        log.debug(
            "Boundary tracing split the mesh; kept %d of %d triangles and "
            "continued in standard mode.",
            len(comps[best]),
            sum(len(c) for c in comps),
        )
        self.boundary_tracing = False
        state.fverts &= set(mesh.vertices())
        state.forbid(mesh.boundary_edges())
        state.locator.rebuild()


# -----------------------------------------------------------------------------


def _inside_components(mesh: LabeledTriMesh, cut: CutResult, cycle):
    """Components whose boundary consists of traced edges only"""
    cycle = set(cycle)
    orig = cut.originals

    def on_cycle(e):
        return ekey(orig.get(e[0], e[0]), orig.get(e[1], e[1])) in cycle

    return [
        c
        for c in cut.components
        if all(on_cycle(e) for e in component_boundary(mesh, c))
    ]


def embed_loop(
    mesh: LabeledTriMesh,
    loop: ManifoldLoop,
    curves: Dict[int, SampledCurve],
    mode: KeepMode,
    *,
    tol: Optional[float] = None,
    boundary_tracing: bool = False,
    optimistic: bool = False,
    long_trace_factor: Optional[float] = None,
) -> LoopEmbedding:
    """Embeds a manifold loop as a simple cycle of labeled edges and cuts
    the mesh along it.

    With ``KEEP_DISK``, the disk bounded by the cycle is kept, with
    ``KEEP_COMPLEMENT`` everything else.

    Args:
        mesh (LabeledTriMesh): A disk, or for ``optimistic`` tracing any
            surface with boundary; modified in place
        loop (ManifoldLoop): The loop, free of repeated entities
        curves (Dict[int, SampledCurve]): Endpoint-snapped curve samples
        mode (KeepMode): Which side of the cycle to keep
        tol (float, optional): Coincidence tolerance; relative 1e-12
        boundary_tracing (bool): Let the trace run along the boundary
        optimistic (bool): The mesh need not be a disk; the cut must yield
            two components, one of them a disk
        long_trace_factor (float, optional): Threshold of the long-trace
            guard

    Raises:
        EmbeddingError: If the base algorithm ends up in an invalid state
        HeuristicRejected: If a heuristic mode fails its validation
    """
    if tol is None:
        tol = 1e-12 * mesh.scale
    strict = not (boundary_tracing or optimistic)
    failure = EmbeddingError if strict else HeuristicRejected

    tracer = LoopTracer(
        mesh,
        curves,
        tol=tol,
        boundary_tracing=boundary_tracing,
        long_trace_factor=long_trace_factor,
    )
    items = loop.edges
    for k, le in enumerate(items):
        remaining = []
        if tracer.boundary_tracing:
            for later in items[k + 1:]:
                remaining.extend(tracer._samples(later)[1])
        tracer.trace_edge(le, remaining=remaining)

    cycle = list(tracer.state.gamma)
    cut = cut_along_edges(mesh, cycle)
    inside = _inside_components(mesh, cut, cycle)

    if (strict or optimistic) and len(cut) != 2:
        raise failure(
            f"Cutting along loop {loop.loop} gave {len(cut)} components, "
            "expected 2"
        )
    if len(inside) != 1 or not analyze_triangles(mesh, inside[0]).is_disk:
        raise failure(
            f"Loop {loop.loop} does not bound exactly one disk "
            f"({len(inside)} candidate component(s))"
        )

    if mode == KEEP_DISK:
        kept = inside[0]
    else:
        kept = frozenset(
            t for c in cut.components if c != inside[0] for t in c
        )
    keep_triangles(mesh, kept)

    log.debug(
        "Embedded loop %d (%s): %d segments, %d cycle edges.",
        loop.loop,
        mode,
        tracer.num_segments,
        len(cycle),
    )
    return LoopEmbedding(
        cycle=cycle,
        cut=cut,
        kept=frozenset(kept),
        chain_lengths=tracer.chain_lengths,
        num_segments=tracer.num_segments,
    )


def embed_loop_graph(
    mesh: LabeledTriMesh,
    loops: Sequence[ManifoldLoop],
    curves: Dict[int, SampledCurve],
    *,
    tol: Optional[float] = None,
    long_trace_factor: Optional[float] = None,
) -> LoopEmbedding:
    """Traces all loops of a face at once, every b-edge and b-vertex only
    once, and keeps the region they bound.

    Used on periodic patches whose sides were glued: repeated b-edges like
    seams are traced once and the cut opens them up into two chains.

    Raises:
        HeuristicRejected: Unless exactly one component is bounded by the
            traced edges, with one boundary loop per b-loop, genus zero and
            every b-edge appearing as often as the loops use it
    """
    if tol is None:
        tol = 1e-12 * mesh.scale
    tracer = LoopTracer(
        mesh, curves, tol=tol, long_trace_factor=long_trace_factor
    )

    uses = Counter(le.edge for lp in loops for le in lp.edges)
    traced = set()
    for lp in loops:
        for le in lp.edges:
            if le.edge in traced:
                continue
            traced.add(le.edge)
            tracer.trace_edge(le)

    cycle = list(tracer.state.gamma)
    per_edge = Counter(mesh.edge_label(*e) for e in cycle)
    cut = cut_along_edges(mesh, cycle)
    candidates = []
    for c in _inside_components(mesh, cut, cycle):
        info = analyze_triangles(mesh, c)
        if (
            info.boundary_loops != len(loops)
            or info.euler != 2 - len(loops)
        ):
            continue
        on_boundary = Counter(
            mesh.edge_label(*e) for e in component_boundary(mesh, c)
        )
        if all(
            on_boundary[E] == uses[E] * per_edge.get(E, 0)
            for E in uses
        ):
            candidates.append(c)

    if len(candidates) != 1:
        raise HeuristicRejected(
            f"Tracing {len(loops)} loop(s) once per b-edge left "
            f"{len(candidates)} admissible component(s)"
        )
    keep_triangles(mesh, candidates[0])
    return LoopEmbedding(
        cycle=cycle,
        cut=cut,
        kept=candidates[0],
        chain_lengths=tracer.chain_lengths,
        num_segments=tracer.num_segments,
    )

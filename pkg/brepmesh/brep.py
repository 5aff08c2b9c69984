"""The B-Rep data model: pure topology plus a geometric embedding.

The topology consists of b-vertices, b-edges between two b-vertices, b-loops
(closed sequences of oriented b-edges) and b-faces (one outer b-loop plus
any number of inner b-loops). The geometry maps every entity to a point,
curve or surface, respectively; no consistency between these embeddings is
assumed.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .exceptions import GeometryError
from .geometry import ParametricCurve, ParametricSurface
from .geometry._tools import bbox_diagonal

log = logging.getLogger(__name__)


# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class BEdge:
    id: int
    start: int
    end: int


@dataclass(frozen=True)
class OrientedEdge:
    """A b-edge as used by a loop; ``forward`` means start to end"""

    edge: int
    forward: bool = True


@dataclass(frozen=True)
class BLoop:
    id: int
    edges: Tuple[OrientedEdge, ...]


@dataclass(frozen=True)
class BFace:
    id: int
    outer: int
    inner: Tuple[int, ...] = ()

    @property
    def loops(self) -> Tuple[int, ...]:
        """The outer loop id followed by the inner loop ids"""
        return (self.outer,) + tuple(self.inner)


class BRepTopology:
    """The combinatorial part of a B-Rep.

    Entities are stored in id order. Loops may be non-manifold, i.e. a
    b-vertex or b-edge may occur more than once within the same loop.
    """

    def __init__(
        self,
        *,
        vertices,
        edges,
        loops,
        faces,
    ):
        self.vertices: Tuple[int, ...] = tuple(
            sorted(int(v) for v in vertices)
        )
        self.edges: Dict[int, BEdge] = {
            e.id: e for e in sorted(edges, key=lambda e: e.id)
        }
        self.loops: Dict[int, BLoop] = {
            lp.id: lp for lp in sorted(loops, key=lambda lp: lp.id)
        }
        self.faces: Dict[int, BFace] = {
            f.id: f for f in sorted(faces, key=lambda f: f.id)
        }

    def __repr__(self) -> str:
        v, e, lp, f = self.counts.values()
        return (
            f"<BRepTopology: {v} vertices, {e} edges, {lp} loops, "
            f"{f} faces>"
        )

    @property
    def counts(self) -> Dict[str, int]:
        return dict(
            vertices=len(self.vertices),
            edges=len(self.edges),
            loops=len(self.loops),
            faces=len(self.faces),
        )

    def oriented_vertices(self, oe: OrientedEdge) -> Tuple[int, int]:
        """The effective (start, end) b-vertex ids of an oriented b-edge"""
        e = self.edges[oe.edge]
        return (e.start, e.end) if oe.forward else (e.end, e.start)

    def loop_vertices(self, loop_id: int) -> List[int]:
        """The effective start vertices of the loop's oriented edges"""
        return [
            self.oriented_vertices(oe)[0] for oe in self.loops[loop_id].edges
        ]

    def face_edge_uses(self, face_id: int) -> Counter:
        """How often each b-edge is used by the loops of a face"""
        uses = Counter()
        for loop_id in self.faces[face_id].loops:
            uses.update(oe.edge for oe in self.loops[loop_id].edges)
        return uses

    def edge_faces(self, edge_id: int) -> Counter:
        """How often each face uses the given b-edge"""
        return Counter(
            {
                fid: n
                for fid in self.faces
                if (n := self.face_edge_uses(fid)[edge_id])
            }
        )

    def iter_face_loops(self, face_id: int) -> Iterator[BLoop]:
        for loop_id in self.faces[face_id].loops:
            yield self.loops[loop_id]


@dataclass
class GeometryMap:
    """Maps entity ids to their embeddings"""

    vertex_points: Dict[int, np.ndarray] = field(default_factory=dict)
    edge_curves: Dict[int, ParametricCurve] = field(default_factory=dict)
    face_surfaces: Dict[int, ParametricSurface] = field(default_factory=dict)


class BRep:
    """A topology together with its geometry"""

    def __init__(
        self,
        topology: BRepTopology,
        geometry: GeometryMap,
        *,
        name: Optional[str] = None,
        units: str = "unitless",
    ):
        self.topology = topology
        self.geometry = geometry
        self.name = name
        self.units = units

    def __repr__(self) -> str:
        name = f" '{self.name}'" if self.name else ""
        counts = ", ".join(f"{n} {k}" for k, n in self.counts.items())
        return f"<BRep{name}: {counts}>"

    @property
    def counts(self) -> Dict[str, int]:
        return self.topology.counts

    def point(self, vertex_id: int) -> np.ndarray:
        return self.geometry.vertex_points[vertex_id]

    def curve(self, edge_id: int) -> ParametricCurve:
        return self.geometry.edge_curves[edge_id]

    def surface(self, face_id: int) -> ParametricSurface:
        return self.geometry.face_surfaces[face_id]

    @cached_property
    def diagonal(self) -> float:
        """Bounding box diagonal of b-vertex points and curve samples"""
        pts = [np.asarray(p) for p in self.geometry.vertex_points.values()]
        ts = np.linspace(0.0, 1.0, 33)
        for curve in self.geometry.edge_curves.values():
            pts.extend(curve.eval(ts))

        diag = bbox_diagonal(np.array(pts))
        if not diag > 0.0:
            raise GeometryError(
                f"The model {self.name or ''} has a degenerate bounding box"
            )
        return diag


# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    """One of ``loop_closure``, ``dangling_id``, ``missing_geometry``,
    ``empty_loop``, ``duplicate_id``"""

    entity: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.entity}: {self.message}"


@dataclass
class DiagnosticReport:
    """Issues found by :py:func:`validate_brep`; empty if the input is valid"""

    issues: List[Diagnostic] = field(default_factory=list)
    counts: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __len__(self) -> int:
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)

    def add(self, kind: str, entity: str, message: str):
        self.issues.append(Diagnostic(kind, entity, message))

    def of_kind(self, kind: str) -> List[Diagnostic]:
        return [d for d in self.issues if d.kind == kind]

    def to_dict(self) -> dict:
        return dict(
            counts=dict(self.counts),
            issues=[
                dict(kind=d.kind, entity=d.entity, message=d.message)
                for d in self.issues
            ],
        )

    def __str__(self) -> str:
        if self.ok:
            return "No issues."
        return "\n".join(str(d) for d in self.issues)


def validate_brep(
    topology: BRepTopology, geometry: GeometryMap
) -> DiagnosticReport:
    """Checks a B-Rep for closed loops, resolvable ids and complete geometry.

    Never raises; all findings are collected in the returned report.
    """
    report = DiagnosticReport(counts=topology.counts)
    vertices = set(topology.vertices)

    if len(vertices) != len(topology.vertices):
        dupes = [v for v, n in Counter(topology.vertices).items() if n > 1]
        report.add("duplicate_id", "vertices", f"repeated ids {dupes}")

    for e in topology.edges.values():
        for end in (e.start, e.end):
            if end not in vertices:
                report.add(
                    "dangling_id", f"edge {e.id}", f"unknown vertex {end}"
                )

    for lp in topology.loops.values():
        _check_loop(topology, lp, report)

    for f in topology.faces.values():
        for loop_id in f.loops:
            if loop_id not in topology.loops:
                report.add(
                    "dangling_id", f"face {f.id}", f"unknown loop {loop_id}"
                )

    for v in topology.vertices:
        if v not in geometry.vertex_points:
            report.add("missing_geometry", f"vertex {v}", "no point")
    for eid in topology.edges:
        if eid not in geometry.edge_curves:
            report.add("missing_geometry", f"edge {eid}", "no curve")
    for fid in topology.faces:
        if fid not in geometry.face_surfaces:
            report.add("missing_geometry", f"face {fid}", "no surface")

    if report.ok:
        log.debug("B-Rep validation passed: %s", report.counts)
    else:
        log.debug("B-Rep validation found %d issue(s).", len(report))
    return report


def _check_loop(topology: BRepTopology, lp: BLoop, report: DiagnosticReport):
    entity = f"loop {lp.id}"
    if not lp.edges:
        report.add("empty_loop", entity, "has no edges")
        return

    missing = [oe.edge for oe in lp.edges if oe.edge not in topology.edges]
    for eid in missing:
        report.add("dangling_id", entity, f"unknown edge {eid}")
    if missing:
        return

    n = len(lp.edges)
    for i, oe in enumerate(lp.edges):
        nxt = lp.edges[(i + 1) % n]
        _, end = topology.oriented_vertices(oe)
        start, _ = topology.oriented_vertices(nxt)
        if end != start:
            report.add(
                "loop_closure",
                entity,
                f"edge {oe.edge} ends at vertex {end} but the following "
                f"edge {nxt.edge} starts at vertex {start}",
            )

"""Loop preparation: endpoint snapping of sampled curves and duplication of
non-manifold loop entities"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..brep import BRepTopology
from ..sampling import SampledCurve

log = logging.getLogger(__name__)

VertexKey = Tuple[int, int]
"""A b-vertex id together with a copy index; copy 0 is the original"""


# -----------------------------------------------------------------------------


def snap_curve_endpoints(
    sampled: SampledCurve, start_point, end_point
) -> SampledCurve:
    """Moves the end points of a sampled curve onto the given points and
    distributes the displacement harmonically over the interior points.

    The solution of the 1D uniform Laplace equation with the two endpoint
    displacements as boundary values is linear in the point index.
    """
    pts = sampled.points.copy()
    d0 = np.asarray(start_point, dtype=float) - pts[0]
    d1 = np.asarray(end_point, dtype=float) - pts[-1]
    weights = np.linspace(0.0, 1.0, len(pts))[:, None]
    pts += (1.0 - weights) * d0 + weights * d1
    pts[0] = start_point
    pts[-1] = end_point
    return SampledCurve(bedge=sampled.bedge, t=sampled.t.copy(), points=pts)


@dataclass(frozen=True)
class LoopEdge:
    """One oriented b-edge of a manifold loop, with the keys of its effective
    start and end vertices"""

    edge: int
    forward: bool
    copy: int
    start: VertexKey
    end: VertexKey


@dataclass(frozen=True)
class ManifoldLoop:
    loop: int
    edges: Tuple[LoopEdge, ...]

    @property
    def vertex_keys(self) -> List[VertexKey]:
        return [le.start for le in self.edges]


@dataclass
class MergeMap:
    """Records which loop entities were duplicated, by original id"""

    duplicated_edges: Dict[int, List[int]] = field(default_factory=dict)
    duplicated_vertices: Dict[int, List[int]] = field(default_factory=dict)

    @property
    def num_duplicates(self) -> int:
        return sum(len(v) for v in self.duplicated_edges.values()) + sum(
            len(v) for v in self.duplicated_vertices.values()
        )

    def restored_counts(self, loops: Sequence[ManifoldLoop]) -> dict:
        """Distinct vertex and edge counts after undoing the duplication"""
        edges = {le.edge for lp in loops for le in lp.edges}
        verts = {k[0] for lp in loops for k in lp.vertex_keys}
        return dict(vertices=len(verts), edges=len(edges))

    def to_dict(self) -> dict:
        return dict(
            duplicated_edges={
                k: list(v) for k, v in sorted(self.duplicated_edges.items())
            },
            duplicated_vertices={
                k: list(v)
                for k, v in sorted(self.duplicated_vertices.items())
            },
        )


def preprocess_nonmanifold(
    loop_ids: Sequence[int], topology: BRepTopology
) -> Tuple[List[ManifoldLoop], MergeMap]:
    """Duplicates every b-edge and b-vertex that occurs more than once
    across the given loops of one face.

    Occurrences are numbered in loop order; the first occurrence keeps copy
    index 0. Labels still refer to the original ids, the copies are told
    apart by their keys only.
    """
    vertex_seen: Counter = Counter()
    edge_seen: Counter = Counter()
    merge = MergeMap()
    result = []

    for loop_id in loop_ids:
        oedges = topology.loops[loop_id].edges
        starts = [topology.oriented_vertices(oe)[0] for oe in oedges]

        keys = []
        for v in starts:
            copy = vertex_seen[v]
            vertex_seen[v] += 1
            if copy:
                merge.duplicated_vertices.setdefault(v, []).append(copy)
            keys.append((v, copy))

        items = []
        n = len(oedges)
        for i, oe in enumerate(oedges):
            copy = edge_seen[oe.edge]
            edge_seen[oe.edge] += 1
            if copy:
                merge.duplicated_edges.setdefault(oe.edge, []).append(copy)
            items.append(
                LoopEdge(
                    edge=oe.edge,
                    forward=oe.forward,
                    copy=copy,
                    start=keys[i],
                    end=keys[(i + 1) % n],
                )
            )
        result.append(ManifoldLoop(loop=loop_id, edges=tuple(items)))

    if merge.num_duplicates:
        log.debug(
            "Duplicated %d non-manifold loop entities: %s",
            merge.num_duplicates,
            merge.to_dict(),
        )
    return result, merge


def shared_loops(
    loop_ids: Sequence[int], topology: BRepTopology
) -> List[ManifoldLoop]:
    """The loops of one face without any duplication: repeated b-edges and
    b-vertices keep a single key. Used when repeated entities are traced
    only once."""
    result = []
    for loop_id in loop_ids:
        oedges = topology.loops[loop_id].edges
        starts = [topology.oriented_vertices(oe)[0] for oe in oedges]
        n = len(oedges)
        items = tuple(
            LoopEdge(
                edge=oe.edge,
                forward=oe.forward,
                copy=0,
                start=(starts[i], 0),
                end=(starts[(i + 1) % n], 0),
            )
            for i, oe in enumerate(oedges)
        )
        result.append(ManifoldLoop(loop=loop_id, edges=items))
    return result

"""Stage 5: topology- and feature-preserving isotropic remeshing.

Each pass runs edge splits, edge collapses, quality-improving flips and
tangential smoothing. Local operations obey the label rules of
:py:class:`~brepmesh.mesh.trimesh.LabeledTriMesh`; in addition, every
operation is tested on its candidate triangles before it is applied:

- no triangle area below ``min_area_factor * diag^2``,
- all vertices and quadrature nodes of the candidate triangles within the
  envelope of the surface of their b-face,
- no new pair of adjacent triangles of the same b-face whose normals
  enclose a dot product below the fold-over threshold.

Inadmissible operations are skipped. A pass whose result does not pass the
topology validator is reverted as a whole.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .brep import BRep
from .cfg import RemeshConfig
from .exceptions import MeshOperationError
from .geometry import ParametricCurve, Plane
from .mesh import LabeledTriMesh, triangle_quality
from .mesh.trimesh import ekey, rotate_to_edge
from .sampling import QUADRATURE_POINTS
from .validation import check_topology

log = logging.getLogger(__name__)

SPLIT_FACTOR = 4.0 / 3.0
COLLAPSE_FACTOR = 4.0 / 5.0

NEW_VERTEX = -1
"""Placeholder id of the vertex a candidate split would insert"""

Candidate = Tuple[Tuple[int, int, int], int]
"""A candidate triangle: its vertex ids and its b-face"""


# -----------------------------------------------------------------------------


def arc_midpoint(
    curve: ParametricCurve, t0: float, t1: float, *, iterations: int = 30
) -> float:
    """The parameter halfway between ``t0`` and ``t1`` by arc length"""
    half = 0.5 * curve.length(t0, t1, n=64)
    if half == 0.0:
        return 0.5 * (t0 + t1)
    a, b = t0, t1
    for _ in range(iterations):
        m = 0.5 * (a + b)
        if curve.length(t0, m, n=64) < half:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _normal(pts: np.ndarray) -> np.ndarray:
    n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
    norm = np.linalg.norm(n)
    return n / norm if norm > 0.0 else n


@dataclass
class RemeshStats:
    passes: int = 0
    splits: int = 0
    collapses: int = 0
    flips: int = 0
    smoothed: int = 0
    reverted_passes: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# -----------------------------------------------------------------------------


class Remesher:
    """Remeshes a stitched mesh in place; see :py:func:`remesh`"""

    def __init__(
        self,
        mesh: LabeledTriMesh,
        brep: BRep,
        config: RemeshConfig,
        *,
        validator: Optional[Callable[[LabeledTriMesh], bool]] = None,
    ):
        self.mesh = mesh
        self.brep = brep
        self.cfg = config
        self.validator = validator
        self.min_area = config.min_area_factor * mesh.scale**2
        self.slack = 1e-12 * mesh.scale
        self.stats = RemeshStats()
        self._hints: Dict[Tuple[int, int], Tuple[float, float]] = {}

        # Deviations of existing triangles, by id, and of the candidates of
        # the last admissible operation, by face and sorted corners
        self._dev: Dict[int, float] = {}
        self._accepted: Dict[Tuple[int, tuple], float] = {}

    # .. Geometric predicates .................................................

    def _pos(self, v: int, moved: Dict[int, np.ndarray]) -> np.ndarray:
        return moved[v] if v in moved else self.mesh.positions[v]

    def _hint(self, face: int, v: int) -> Optional[Tuple[float, float]]:
        return self._hints.get((face, v))

    def _surface_distance(self, face: int, p, near: int) -> float:
        u, v, d = self.brep.surface(face).closest_point(
            p, hint=self._hint(face, near)
        )
        if near != NEW_VERTEX:
            self._hints.setdefault((face, near), (u, v))
        return d

    def _deviation(self, tri, face: int, moved) -> float:
        """Maximum distance of the corners and the quadrature nodes of a
        triangle from the surface of its b-face"""
        pts = np.array([self._pos(v, moved) for v in tri])
        dev = max(
            self._surface_distance(face, p, v) for p, v in zip(pts, tri)
        )
        if isinstance(self.brep.surface(face), Plane):
            return dev

        for bary, p in zip(QUADRATURE_POINTS, QUADRATURE_POINTS @ pts):
            near = tri[int(np.argmax(bary))]
            dev = max(dev, self._surface_distance(face, p, near))
        return dev

    def _admissible(
        self,
        candidates: Sequence[Candidate],
        removed: Set[int],
        moved: Dict[int, np.ndarray],
    ) -> bool:
        mesh = self.mesh

        normals = []
        for tri, face in candidates:
            pts = np.array([self._pos(v, moved) for v in tri])
            n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
            if 0.5 * np.linalg.norm(n) < self.min_area:
                return False
            normals.append(_normal(pts))

        # Envelope: candidates may not deviate more than the triangles they
        # replace did, or the envelope radius if that is larger
        old = max(
            (self._current_deviation(t) for t in sorted(removed)),
            default=0.0,
        )
        limit = max(self.cfg.envelope_eps, old) + self.slack
        accepted = {}
        for tri, face in candidates:
            dev = self._deviation(tri, face, moved)
            if dev > limit:
                return False
            accepted[face, tuple(sorted(tri))] = dev

        # Fold-over across all edges of the candidates
        threshold = self.cfg.foldover_normal_dot
        by_edge: Dict[Tuple[int, int], List[Tuple[np.ndarray, int]]] = {}
        for (tri, face), n in zip(candidates, normals):
            for i in range(3):
                e = ekey(tri[i], tri[(i + 1) % 3])
                by_edge.setdefault(e, []).append((n, face))

        for (a, b), sides in by_edge.items():
            if a in mesh.vtris and b in mesh.vtris:
                for tid in mesh.edge_tris(a, b):
                    if tid not in removed:
                        pts = np.array(
                            [self._pos(v, moved) for v in mesh.tris[tid]]
                        )
                        sides.append((_normal(pts), mesh.tri_face[tid]))
            for i, (n1, f1) in enumerate(sides):
                for n2, f2 in sides[i + 1 :]:
                    if f1 == f2 and np.dot(n1, n2) < threshold:
                        return False
        self._accepted = accepted
        return True

    def _current_deviation(self, tid: int) -> float:
        if tid not in self._dev:
            self._dev[tid] = self._deviation(
                self.mesh.tris[tid], self.mesh.tri_face[tid], {}
            )
        return self._dev[tid]

    def _adopt(self, first_tid: int, new_vertex: Optional[int] = None):
        """Takes over the deviations computed for the candidates of an
        applied operation for the triangles it created"""
        mesh = self.mesh
        for tid in range(first_tid, mesh._next_tid):
            if tid not in mesh.tris:
                continue
            tri = tuple(
                NEW_VERTEX if v == new_vertex else v for v in mesh.tris[tid]
            )
            key = (mesh.tri_face[tid], tuple(sorted(tri)))
            dev = self._accepted.get(key)
            if dev is not None:
                self._dev[tid] = dev

    def _min_quality(self, candidates: Sequence[Candidate], moved) -> float:
        return min(
            triangle_quality(*(self._pos(v, moved) for v in tri))
            for tri, _ in candidates
        )

    def _current(self, tids) -> List[Candidate]:
        return [(self.mesh.tris[t], self.mesh.tri_face[t]) for t in tids]

    # .. Operations ...........................................................

    def _split_position(self, a: int, b: int):
        """Position and curve parameter of the vertex splitting an edge"""
        mesh = self.mesh
        label = mesh.edge_label(a, b)
        if label is not None:
            curve = self.brep.curve(label)
            ta = mesh.param_on(a, label)
            tb = mesh.param_on(b, label, near=ta)
            ta = mesh.param_on(a, label, near=tb)
            t = arc_midpoint(curve, ta, tb)
            return curve.eval(t), t

        mid = 0.5 * (mesh.positions[a] + mesh.positions[b])
        faces = {mesh.tri_face[t] for t in mesh.edge_tris(a, b)}
        if len(faces) != 1:
            return mid, None
        face = faces.pop()
        surface = self.brep.surface(face)
        u, v, _ = surface.closest_point(mid, hint=self._hint(face, a))
        return surface.eval(u, v), None

    def try_split(self, a: int, b: int) -> bool:
        mesh = self.mesh
        pos, t = self._split_position(a, b)
        tids = mesh.edge_tris(a, b)

        candidates = []
        for tid in tids:
            p0, p1, p2 = rotate_to_edge(mesh.tris[tid], a, b)
            face = mesh.tri_face[tid]
            candidates.append(((p0, NEW_VERTEX, p2), face))
            candidates.append(((NEW_VERTEX, p1, p2), face))

        if not self._admissible(candidates, set(tids), {NEW_VERTEX: pos}):
            return False
        first = mesh._next_tid
        m = mesh.split_edge(a, b, pos, t=t)
        self._adopt(first, m)
        return True

    def _curve_deviation(self, label: int, p, t: float) -> float:
        return self.brep.curve(label).closest_point(p, hint=t)[1]

    def try_collapse(self, keep: int, remove: int) -> bool:
        mesh = self.mesh
        try:
            mesh.check_collapse(keep, remove)
        except MeshOperationError:
            return False

        others = sorted(mesh.neighbors(remove) - {keep})
        pk = mesh.positions[keep]
        max_len = SPLIT_FACTOR * self.cfg.target_edge_length
        if any(mesh.edge_length(w, keep) > max_len for w in others):
            return False

        removed = set(mesh.vtris[remove])
        candidates = [
            (
                tuple(keep if v == remove else v for v in mesh.tris[t]),
                mesh.tri_face[t],
            )
            for t in sorted(removed)
            if keep not in mesh.tris[t]
        ]
        if not self._admissible(candidates, removed, {}):
            return False

        # Merged chain edges stay within the envelope of their curve
        for w in others:
            label = mesh.edge_label(remove, w)
            if label is None:
                continue
            t = mesh.param_on(remove, label)
            old = max(
                self._curve_deviation(
                    label,
                    0.5 * (mesh.positions[remove] + mesh.positions[x]),
                    t,
                )
                for x in (keep, w)
            )
            new = self._curve_deviation(
                label, 0.5 * (pk + mesh.positions[w]), t
            )
            if new > max(self.cfg.envelope_eps, old) + self.slack:
                return False

        first = mesh._next_tid
        mesh.collapse_edge(keep, remove)
        self._adopt(first)
        return True

    def try_flip(self, a: int, b: int) -> bool:
        mesh = self.mesh
        if mesh.edge_label(a, b) is not None:
            return False
        tids = mesh.edge_tris(a, b)
        if len(tids) != 2:
            return False
        t1, t2 = tids
        face = mesh.tri_face[t1]
        if mesh.tri_face[t2] != face:
            return False

        p0, p1, c = rotate_to_edge(mesh.tris[t1], a, b)
        q0, q1, d = rotate_to_edge(mesh.tris[t2], a, b)
        if (q0, q1) != (p1, p0) or c == d or mesh.has_edge(c, d):
            return False

        candidates = [((p0, d, c), face), ((d, p1, c), face)]
        before = self._min_quality(self._current(tids), {})
        if self._min_quality(candidates, {}) <= before + 1e-12:
            return False
        if not self._admissible(candidates, set(tids), {}):
            return False
        first = mesh._next_tid
        mesh.flip_edge(a, b)
        self._adopt(first)
        return True

    def _smoothed_position(self, v: int):
        """Laplacian target projected onto the geometry of the vertex"""
        mesh = self.mesh
        if v in mesh.bedge:
            label, t = mesh.bedge[v]
            chain = [
                w for w in mesh.neighbors(v) if mesh.edge_label(v, w) == label
            ]
            if len(chain) != 2:
                return None
            ts = [mesh.param_on(w, label, near=t) for w in chain]
            target = np.mean([mesh.positions[w] for w in chain], axis=0)
            curve = self.brep.curve(label)
            t_new, _ = curve.closest_point(target, hint=t)
            if not min(ts) < t_new < max(ts):
                return None
            return curve.eval(t_new), (label, t_new)

        if mesh.is_boundary_vertex(v):
            return None
        faces = {mesh.tri_face[t] for t in mesh.vtris[v]}
        if len(faces) != 1:
            return None
        face = faces.pop()
        nbrs = sorted(mesh.neighbors(v))
        target = np.mean([mesh.positions[w] for w in nbrs], axis=0)
        surface = self.brep.surface(face)
        uu, vv, _ = surface.closest_point(target, hint=self._hint(face, v))
        return surface.eval(uu, vv), None

    def try_smooth(self, v: int) -> bool:
        mesh = self.mesh
        if mesh.is_frozen(v):
            return False
        result = self._smoothed_position(v)
        if result is None:
            return False
        pos, label = result

        tids = set(mesh.vtris[v])
        candidates = self._current(sorted(tids))
        moved = {v: pos}
        if self._min_quality(candidates, moved) < self._min_quality(
            candidates, {}
        ):
            return False
        if not self._admissible(candidates, tids, moved):
            return False

        mesh.positions[v] = np.asarray(pos, dtype=float)
        if label is not None:
            mesh.bedge[v] = label
        for tid in tids:
            face = mesh.tri_face[tid]
            self._hints.pop((face, v), None)
            key = (face, tuple(sorted(mesh.tris[tid])))
            self._dev[tid] = self._accepted[key]
        return True

    # .. Passes ...............................................................

    def split_pass(self) -> int:
        mesh = self.mesh
        hi = SPLIT_FACTOR * self.cfg.target_edge_length
        edges = sorted(
            mesh.edges(), key=lambda e: (-mesh.edge_length(*e), e)
        )
        n = 0
        for a, b in edges:
            if mesh.has_edge(a, b) and mesh.edge_length(a, b) > hi:
                n += self.try_split(a, b)
        return n

    def collapse_pass(self) -> int:
        mesh = self.mesh
        lo = COLLAPSE_FACTOR * self.cfg.target_edge_length
        edges = sorted(mesh.edges(), key=lambda e: (mesh.edge_length(*e), e))
        n = 0
        for a, b in edges:
            if not (
                a in mesh.vtris
                and b in mesh.vtris
                and mesh.has_edge(a, b)
                and mesh.edge_length(a, b) < lo
            ):
                continue
            # The stronger label survives
            order = sorted(
                [(a, b), (b, a)],
                key=lambda kr: (-mesh.label_strength(kr[0]), kr[0]),
            )
            for keep, remove in order:
                if self.try_collapse(keep, remove):
                    n += 1
                    break
        return n

    def flip_pass(self) -> int:
        mesh = self.mesh
        n = 0
        for a, b in sorted(mesh.edges()):
            if mesh.has_edge(a, b):
                n += self.try_flip(a, b)
        return n

    def smooth_pass(self) -> int:
        mesh = self.mesh
        return sum(
            self.try_smooth(v) for v in mesh.vertices() if v in mesh.vtris
        )

    def _valid(self) -> bool:
        return self.validator is None or self.validator(self.mesh)

    def run(self) -> RemeshStats:
        mesh, stats = self.mesh, self.stats
        if not self._valid():
            log.caution(
                "Input of the remeshing stage fails the topology check; "
                "leaving the mesh as it is."
            )
            return stats

        for i in range(self.cfg.max_passes):
            snapshot = mesh.snapshot_state()
            counts = dict(
                splits=self.split_pass(),
                collapses=self.collapse_pass(),
                flips=self.flip_pass(),
                smoothed=(
                    self.smooth_pass() if self.cfg.enable_smoothing else 0
                ),
            )
            stats.passes += 1

            if not self._valid():
                mesh.restore_state(snapshot)
                self._hints.clear()
                self._dev.clear()
                stats.reverted_passes += 1
                log.caution(
                    "Remeshing pass %d broke the topology and was reverted.", i
                )
                break

            for k, v in counts.items():
                setattr(stats, k, getattr(stats, k) + v)
            log.debug("Remeshing pass %d: %s", i, counts)
            if not any(counts.values()):
                break

        mesh.remove_unreferenced_vertices()
        log.progress(
            "Remeshed to %d triangles in %d pass(es).",
            mesh.num_triangles,
            stats.passes,
        )
        return stats


def remesh(
    mesh: LabeledTriMesh,
    brep: BRep,
    config: RemeshConfig,
    *,
    validator: Optional[Callable[[LabeledTriMesh], bool]] = None,
    stats: Optional[RemeshStats] = None,
) -> LabeledTriMesh:
    """Remeshes the stitched mesh toward the target edge length in place.

    Args:
        mesh (LabeledTriMesh): The stitched, labeled mesh
        brep (BRep): The B-Rep providing surfaces and curves
        config (RemeshConfig): Target edge length, envelope radius and the
            pass schedule
        validator (Callable, optional): Topology check run before the stage
            and after every pass. Defaults to
            :py:func:`~brepmesh.validation.check_topology`.
        stats (RemeshStats, optional): If given, updated with the counts of
            accepted operations

    Returns:
        LabeledTriMesh: The same mesh object
    """
    if validator is None:

        def validator(m):
            return check_topology(m, brep).ok

    remesher = Remesher(mesh, brep, config, validator=validator)
    result = remesher.run()
    if stats is not None:
        for k, v in result.to_dict().items():
            setattr(stats, k, getattr(stats, k) + v)
    return mesh

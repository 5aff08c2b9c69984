"""Heuristics that improve the geometry of embedded loops.

None of them is needed for a correct topology. Each is validated with a
purely combinatorial check; the caller reverts to the base algorithm when
the check fails (see :py:exc:`~brepmesh.exceptions.HeuristicRejected`).
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

from ..cfg import HEURISTIC_NAMES, SamplingBudget
from ..exceptions import HeuristicRejected
from ..geometry import ParametricCurve, ParametricSurface
from ..mesh import TriangleLocator, is_disk, weld
from ..mesh.trimesh import LabeledTriMesh
from ..sampling import bisect_longest, sample_curve

log = logging.getLogger(__name__)

SIDE_TOL = 1e-9
"""Parametric tolerance for vertices on a side of the unit square"""

MAX_REFINEMENT_ROUNDS = 16

_SIDES = {"u0": (0, 0.0), "u1": (0, 1.0), "v0": (1, 0.0), "v1": (1, 1.0)}


# -----------------------------------------------------------------------------


@dataclass
class HeuristicStats:
    """Counts how often each heuristic was attempted, accepted and
    rejected, plus the number of disk restorations"""

    counts: Dict[str, Counter] = field(
        default_factory=lambda: {n: Counter() for n in HEURISTIC_NAMES}
    )
    restore_disk_calls: int = 0

    def attempt(self, name: str):
        self.counts[name]["attempted"] += 1

    def accept(self, name: str):
        self.counts[name]["accepted"] += 1

    def reject(self, name: str):
        self.counts[name]["rejected"] += 1

    def merge(self, other: "HeuristicStats"):
        for name, c in other.counts.items():
            self.counts.setdefault(name, Counter()).update(c)
        self.restore_disk_calls += other.restore_disk_calls

    def to_dict(self) -> dict:
        d = {
            name: {
                k: int(c[k]) for k in ("attempted", "accepted", "rejected")
            }
            for name, c in self.counts.items()
        }
        d["restore_disk_calls"] = self.restore_disk_calls
        return d


# -----------------------------------------------------------------------------


def initial_refinement(
    mesh: LabeledTriMesh,
    surface: ParametricSurface,
    curves: Iterable[ParametricCurve],
    budget: SamplingBudget,
    *,
    factor: float = 0.01,
    min_samples: int = 10,
) -> int:
    """Refines the patch mesh until no triangle is closest to more than one
    point of the densely upsampled loop curves.

    The curves are sampled with ``factor`` times the budget tolerance and at
    least ``min_samples`` points each. Refinement stops early at the
    triangle cap.

    Returns:
        int: The number of bisections
    """
    points = []
    for curve in curves:
        sc = sample_curve(
            curve,
            budget,
            epsilon=factor * budget.epsilon,
            min_points=min_samples,
        )
        points.extend(sc.points)

    num_splits = 0
    for _ in range(MAX_REFINEMENT_ROUNDS):
        locator = TriangleLocator(mesh)
        hits = Counter(locator.closest_triangle(p)[0] for p in points)
        crowded = sorted(t for t, n in hits.items() if n > 1)
        if not crowded:
            break
        for tid in crowded:
            if tid in mesh.tris:
                bisect_longest(mesh, surface, tid)
                num_splits += 1
        if len(mesh.tris) > budget.max_triangles:
            log.debug("Initial refinement stopped at the triangle cap.")
            break

    if not is_disk(mesh):
        raise HeuristicRejected("Initial refinement broke the disk property")
    log.debug(
        "Initial refinement: %d curve points, %d bisections.",
        len(points),
        num_splits,
    )
    return num_splits


def _side_vertices(mesh: LabeledTriMesh, dim: int, value: float) -> List[int]:
    """Boundary vertices whose parameter ``dim`` equals ``value``, sorted by
    the other parameter"""
    verts = [
        v
        for v in sorted(mesh.boundary_vertices())
        if v in mesh.uv and abs(mesh.uv[v][dim] - value) <= SIDE_TOL
    ]
    return sorted(verts, key=lambda v: (mesh.uv[v][1 - dim], v))


def _check_edge_manifold(mesh: LabeledTriMesh, what: str):
    if any(len(ts) > 2 for ts in mesh.edge_map().values()):
        raise HeuristicRejected(f"{what} produced non-manifold edges")


def collapse_singular_sides(
    mesh: LabeledTriMesh, surface: ParametricSurface
) -> int:
    """Welds all vertices of every singular side of the parameter domain
    into one vertex; triangles that degenerate are removed.

    Returns:
        int: The number of collapsed sides

    Raises:
        HeuristicRejected: If the result is not a disk
    """
    collapsed = 0
    for side in sorted(surface.singular_sides):
        dim, value = _SIDES[side]
        verts = _side_vertices(mesh, dim, value)
        if len(verts) < 2:
            continue
        target = min(verts)
        weld(mesh, [(target, v) for v in verts if v != target])
        collapsed += 1

    _check_edge_manifold(mesh, "Singular collapse")
    if not is_disk(mesh):
        raise HeuristicRejected("Singular collapse broke the disk property")
    log.debug("Collapsed %d singular side(s) of %s.", collapsed, surface)
    return collapsed


def _conform_side(mesh, surface, dim, value, targets: List[float]) -> int:
    """Splits boundary edges of one side so that it has vertices at the
    given values of the other parameter"""
    num = 0
    for x in targets:
        side = _side_vertices(mesh, dim, value)
        coords = [mesh.uv[v][1 - dim] for v in side]
        if any(abs(c - x) <= SIDE_TOL for c in coords):
            continue
        for a, b, ca, cb in zip(side, side[1:], coords, coords[1:]):
            if ca < x < cb and mesh.is_boundary_edge(a, b):
                uv = [0.0, 0.0]
                uv[dim], uv[1 - dim] = value, x
                mesh.split_edge(a, b, surface.eval(*uv), uv=tuple(uv))
                num += 1
                break
    return num


def periodic_rewire(mesh: LabeledTriMesh, surface: ParametricSurface) -> int:
    """Glues opposite sides of the parameter domain in every periodic
    direction, after making their vertices match.

    Parametric coordinates are discarded afterwards, since they are no
    longer continuous across the glued sides.

    Returns:
        int: The number of welded vertex pairs

    Raises:
        HeuristicRejected: If the surface is not periodic or the result is
            not edge-manifold
    """
    if not any(surface.periodic):
        raise HeuristicRejected(f"{surface} is not periodic")

    num_pairs = 0
    for dim, periodic in enumerate(surface.periodic):
        if not periodic:
            continue
        lo, hi = _side_vertices(mesh, dim, 0.0), _side_vertices(mesh, dim, 1)
        if not lo or not hi:
            raise HeuristicRejected("Periodic sides are not on the boundary")

        lo_c = [mesh.uv[v][1 - dim] for v in lo]
        hi_c = [mesh.uv[v][1 - dim] for v in hi]
        _conform_side(mesh, surface, dim, 1.0, lo_c)
        _conform_side(mesh, surface, dim, 0.0, hi_c)

        hi = _side_vertices(mesh, dim, 1.0)
        by_coord = {round(mesh.uv[v][1 - dim] / SIDE_TOL): v for v in hi}
        pairs = []
        for v in _side_vertices(mesh, dim, 0.0):
            w = by_coord.get(round(mesh.uv[v][1 - dim] / SIDE_TOL))
            if w is not None and w != v:
                pairs.append((v, w))
        weld(mesh, pairs)
        num_pairs += len(pairs)

    _check_edge_manifold(mesh, "Periodic rewiring")
    mesh.uv.clear()
    log.debug("Rewired %s: welded %d vertex pairs.", surface, num_pairs)
    return num_pairs

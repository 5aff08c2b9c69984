"""Exact closest-triangle queries backed by a k-d tree over the vertices"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .trimesh import LabeledTriMesh

log = logging.getLogger(__name__)

REBUILD_FRACTION = 0.1
"""The tree is rebuilt once this fraction of vertices is pending"""


def closest_point_on_triangle(p, a, b, c) -> Tuple[np.ndarray, np.ndarray]:
    """Closest point of a triangle to ``p`` by Voronoi region classification.

    Returns:
        Tuple[np.ndarray, np.ndarray]: The point and its barycentric
            coordinates
    """
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = np.dot(ab, ap), np.dot(ac, ap)
    if d1 <= 0.0 and d2 <= 0.0:
        return a, np.array([1.0, 0.0, 0.0])

    bp = p - b
    d3, d4 = np.dot(ab, bp), np.dot(ac, bp)
    if d3 >= 0.0 and d4 <= d3:
        return b, np.array([0.0, 1.0, 0.0])

    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        return a + v * ab, np.array([1.0 - v, v, 0.0])

    cp = p - c
    d5, d6 = np.dot(ab, cp), np.dot(ac, cp)
    if d6 >= 0.0 and d5 <= d6:
        return c, np.array([0.0, 0.0, 1.0])

    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        return a + w * ac, np.array([1.0 - w, 0.0, w])

    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return b + w * (c - b), np.array([0.0, 1.0 - w, w])

    denom = va + vb + vc
    if denom == 0.0:
        # Degenerate triangle; fall back to the closest corner
        pts = np.array([a, b, c])
        i = int(np.argmin(np.linalg.norm(pts - p, axis=1)))
        bary = np.zeros(3)
        bary[i] = 1.0
        return pts[i], bary

    v, w = vb / denom, vc / denom
    return a + ab * v + ac * w, np.array([1.0 - v - w, v, w])


class TriangleLocator:
    """Finds the triangle of a mesh closest to a query point.

    The locator stays valid while the mesh is refined by splits, since new
    vertices are tracked as pending and edges only get shorter. After other
    modifications, call :py:meth:`rebuild`.

    Triangles of (near) zero area, as found at the collapsed sides of
    singular parametrizations, are only returned if no proper triangle is
    equally close. Every point of such a triangle lies on an edge it shares
    with a proper one.
    """

    def __init__(self, mesh: LabeledTriMesh):
        self.mesh = mesh
        self._tree = None
        self._ids = None
        self._max_edge = 0.0
        self._built_upto = 0
        self.rebuild()

    def rebuild(self):
        mesh = self.mesh
        self._ids = np.array(mesh.vertices(), dtype=int)
        pts = np.array([mesh.positions[v] for v in self._ids]).reshape(-1, 3)
        self._tree = cKDTree(pts) if len(pts) else None

        self._max_edge = 0.0
        if mesh.tris:
            index = {v: i for i, v in enumerate(self._ids)}
            corners = np.array(
                [[index[v] for v in tri] for tri in mesh.tris.values()]
            )
            tri_pts = pts[corners]
            sides = tri_pts - np.roll(tri_pts, -1, axis=1)
            self._max_edge = float(np.linalg.norm(sides, axis=-1).max())
        self._built_upto = mesh._next_vid

    def _pending(self):
        mesh = self.mesh
        return [
            v
            for v in range(self._built_upto, mesh._next_vid)
            if mesh.vtris.get(v)
        ]

    def closest_triangles(
        self, p
    ) -> List[Tuple[int, np.ndarray, float]]:
        """All triangles at the smallest distance from ``p``, up to the
        coincidence tolerance, as ``(tid, closest point, distance)`` in
        triangle id order; empty for an empty mesh"""
        mesh = self.mesh
        p = np.asarray(p, dtype=float)
        tol = 1e-12 * mesh.scale
        pending = self._pending()
        if len(pending) > REBUILD_FRACTION * max(len(self._ids), 1) + 32:
            self.rebuild()
            pending = []

        # Distance to the nearest vertex bounds the triangle distance
        candidates_v = list(pending)
        d0 = np.inf
        if self._tree is not None:
            d, i = self._tree.query(p)
            if mesh.vtris.get(int(self._ids[i])):
                d0 = d
        for v in pending:
            d0 = min(d0, float(np.linalg.norm(mesh.positions[v] - p)))
        if not np.isfinite(d0):
            self.rebuild()
            if self._tree is None:
                return []
            d0, _ = self._tree.query(p)

        radius = d0 + self._max_edge + tol
        if self._tree is not None:
            idx = self._tree.query_ball_point(p, radius)
            candidates_v.extend(int(self._ids[i]) for i in idx)

        tids = sorted(
            {t for v in candidates_v for t in mesh.vtris.get(v, ())}
        )
        found = []
        for tid in tids:
            q, _ = closest_point_on_triangle(p, *mesh.tri_points(tid))
            d = float(np.linalg.norm(q - p))
            found.append((tid, q, d, mesh.is_degenerate(tid)))

        proper = [f for f in found if not f[3]] or found
        if not proper:
            return []
        best = min(f[2] for f in proper)
        return [(t, q, d) for t, q, d, _ in proper if d <= best + tol]

    def closest_triangle(
        self, p
    ) -> Tuple[Optional[int], Optional[np.ndarray], float]:
        """Returns ``(tid, closest point, distance)``; ties go to the lowest
        triangle id"""
        ties = self.closest_triangles(p)
        if not ties:
            return None, None, np.inf
        return ties[0]

    def distance(self, p) -> float:
        return self.closest_triangle(p)[2]

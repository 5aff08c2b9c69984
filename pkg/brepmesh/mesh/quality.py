"""Shape regularity of triangles and summary statistics of a mesh"""

import math
from collections import Counter

import numpy as np

from .trimesh import LabeledTriMesh

QUALITY_NORMALIZATION = 4.0 * math.sqrt(3.0)

EDGE_LENGTH_BINS = 10


def triangle_quality(a, b, c) -> float:
    """``q = 4 sqrt(3) A / (l1^2 + l2^2 + l3^2)``; 1 for equilateral
    triangles, 0 for degenerate ones"""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a))
    denom = np.sum((b - a) ** 2) + np.sum((c - b) ** 2) + np.sum((a - c) ** 2)
    if denom == 0.0:
        return 0.0
    return float(QUALITY_NORMALIZATION * area / denom)


def mesh_quality(mesh: LabeledTriMesh, tid: int) -> float:
    return triangle_quality(*mesh.tri_points(tid))


def quality_report(mesh: LabeledTriMesh) -> dict:
    """Deterministic statistics: shape quality, edge lengths and valences.

    Returns:
        dict: With keys ``num_triangles``, ``min_quality``,
            ``mean_quality``, ``edge_length`` (min, max, mean and a
            histogram) and ``valence`` (histogram as a sorted mapping)
    """
    tids = sorted(mesh.tris)
    qualities = np.array([mesh_quality(mesh, t) for t in tids])
    edges = sorted(mesh.edges())
    lengths = np.array([mesh.edge_length(a, b) for a, b in edges])

    valence = Counter()
    for a, b in edges:
        valence[a] += 1
        valence[b] += 1
    valence_hist = Counter(valence.values())

    if len(lengths):
        counts, bin_edges = np.histogram(lengths, bins=EDGE_LENGTH_BINS)
        length_stats = dict(
            min=float(lengths.min()),
            max=float(lengths.max()),
            mean=float(lengths.mean()),
            histogram=dict(
                counts=[int(c) for c in counts],
                bin_edges=[float(e) for e in bin_edges],
            ),
        )
    else:
        length_stats = dict(min=0.0, max=0.0, mean=0.0, histogram=None)

    return dict(
        num_triangles=len(tids),
        min_quality=float(qualities.min()) if len(tids) else 0.0,
        mean_quality=float(qualities.mean()) if len(tids) else 0.0,
        edge_length=length_stats,
        valence={int(k): int(valence_hist[k]) for k in sorted(valence_hist)},
    )

"""Stage 1: tolerance-bounded polylines for curves and triangle meshes for
surfaces.

Curves are sampled by recursive parameter bisection. Surfaces are meshed
over their full unit parameter square: a uniform grid sized from sampled
surface derivatives is refined by conforming longest-edge bisection until
every triangle deviates from the surface by at most the tolerance (measured
at the nodes of a 7-point quadrature rule of order 5) and no edge exceeds
the maximum edge length.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .cfg import SamplingBudget
from .exceptions import ResourceLimitError
from .geometry import ParametricCurve, ParametricSurface
from .mesh import LabeledTriMesh

log = logging.getLogger(__name__)

MAX_INITIAL_CELLS = 256
"""Upper bound on the cells per direction of the initial grid"""

MIN_PARAM_EDGE = 1e-9
"""Triangles whose longest parameter edge is shorter are never refined"""

MAX_BISECTION_DEPTH = 40

CHORD_SAMPLES = np.arange(1, 6) / 6.0
"""Relative interior positions at which curve-to-chord distance is measured"""

_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
_W0, _W1, _W2 = 0.225, 0.132394152788506, 0.125939180544827

QUADRATURE_POINTS = np.array(
    [
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [_A1, _B1, _B1],
        [_B1, _A1, _B1],
        [_B1, _B1, _A1],
        [_A2, _B2, _B2],
        [_B2, _A2, _B2],
        [_B2, _B2, _A2],
    ]
)
"""Barycentric nodes of the symmetric 7-point triangle rule (order 5)"""

QUADRATURE_WEIGHTS = np.array([_W0, _W1, _W1, _W1, _W2, _W2, _W2])
"""Weights of :py:data:`QUADRATURE_POINTS`; they sum to one"""


# -----------------------------------------------------------------------------


@dataclass
class SampledCurve:
    """A polyline approximating a b-edge curve, with the curve parameter of
    every point; parameters increase strictly from 0 to 1"""

    bedge: Optional[int]
    t: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if len(self.t) < 2 or len(self.t) != len(self.points):
            raise ValueError("A sampled curve needs at least two points")
        if self.t[0] != 0.0 or self.t[-1] != 1.0:
            raise ValueError("Sampled curve parameters must span [0, 1]")
        if np.any(np.diff(self.t) <= 0.0):
            raise ValueError("Sampled curve parameters must increase")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def num_segments(self) -> int:
        return len(self.t) - 1

    @property
    def length(self) -> float:
        return float(
            np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1))
        )


def chord_deviation(curve: ParametricCurve, t0: float, t1: float) -> float:
    """Maximum distance of five interior curve samples from the chord"""
    a, b = curve._eval(t0), curve._eval(t1)
    pts = curve._eval(t0 + CHORD_SAMPLES * (t1 - t0))
    d = b - a
    dd = float(np.dot(d, d))
    if dd == 0.0:
        return float(np.max(np.linalg.norm(pts - a, axis=1)))
    s = np.clip((pts - a) @ d / dd, 0.0, 1.0)
    foot = a + s[:, None] * d
    return float(np.max(np.linalg.norm(pts - foot, axis=1)))


def sample_curve(
    curve: ParametricCurve,
    budget: SamplingBudget,
    *,
    bedge: Optional[int] = None,
    epsilon: Optional[float] = None,
    min_points: int = 2,
) -> SampledCurve:
    """Samples a curve by recursive midpoint bisection until every segment's
    chord deviation is at most the tolerance.

    Args:
        curve (ParametricCurve): The curve to sample
        budget (SamplingBudget): Provides the tolerance
        bedge (int, optional): The b-edge id to attach
        epsilon (float, optional): Overrides the budget's tolerance
        min_points (int, optional): Minimum number of points; segments are
            bisected uniformly until reached. Closed curves always get at
            least four segments.
    """
    eps = budget.epsilon if epsilon is None else epsilon

    num_initial = 4 if curve.closed else 1
    while num_initial + 1 < min_points:
        num_initial *= 2
    stack = [
        (k / num_initial, (k + 1) / num_initial, 0)
        for k in reversed(range(num_initial))
    ]

    ts = [0.0]
    while stack:
        t0, t1, depth = stack.pop()
        too_far = chord_deviation(curve, t0, t1) > eps
        if depth < MAX_BISECTION_DEPTH and too_far:
            tm = 0.5 * (t0 + t1)
            stack.append((tm, t1, depth + 1))
            stack.append((t0, tm, depth + 1))
        else:
            ts.append(t1)

    ts = np.array(ts)
    ts[-1] = 1.0
    return SampledCurve(bedge=bedge, t=ts, points=curve.eval(ts))


# -----------------------------------------------------------------------------


def _batch_deviation(
    surface: ParametricSurface, uv_tris: np.ndarray, xyz_tris: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized quadrature deviation of many triangles.

    Args:
        uv_tris: Parameter triangles, shape (m, 3, 2)
        xyz_tris: The corresponding space triangles, shape (m, 3, 3)

    Returns:
        Tuple[np.ndarray, np.ndarray]: Weighted mean and maximum per triangle
    """
    uv_q = np.einsum("qk,mkd->mqd", QUADRATURE_POINTS, uv_tris)
    lin_q = np.einsum("qk,mkd->mqd", QUADRATURE_POINTS, xyz_tris)
    uv_q = np.clip(uv_q, 0.0, 1.0)
    surf_q = surface._eval(uv_q[..., 0], uv_q[..., 1])
    dist = np.linalg.norm(surf_q - lin_q, axis=-1)

    e1 = uv_tris[:, 1] - uv_tris[:, 0]
    e2 = uv_tris[:, 2] - uv_tris[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    mean = np.where(area > 0.0, dist @ QUADRATURE_WEIGHTS, 0.0)
    return mean, dist.max(axis=1)


def triangle_deviation(
    surface: ParametricSurface,
    param_triangle,
    space_triangle,
    order: int = 5,
) -> Tuple[float, float]:
    """Deviation of a space triangle from the surface over a parameter
    triangle, estimated at the nodes of the order 5 quadrature rule.

    Returns:
        Tuple[float, float]: The quadrature-weighted mean (0 for parameter
            triangles of zero area) and the maximum over the nodes
    """
    if order != 5:
        raise ValueError(f"Only quadrature order 5 is available, not {order}")
    mean, mx = _batch_deviation(
        surface,
        np.asarray(param_triangle, dtype=float)[None],
        np.asarray(space_triangle, dtype=float)[None],
    )
    return float(mean[0]), float(mx[0])


def initial_grid_size(
    surface: ParametricSurface, budget: SamplingBudget
) -> int:
    """Cells per direction of the initial grid, chosen such that the
    interpolation error bound ``M h^2 / 8`` stays below the tolerance and
    cell diagonals stay below the maximum edge length"""
    curvature = max(surface.second_derivative_bounds)
    n_curv = 1
    if curvature > 0.0:
        n_curv = math.ceil(1.0 / math.sqrt(8.0 * budget.epsilon / curvature))

    s = np.linspace(0.0, 1.0, 9)
    speed = 0.0
    for u in s:
        for v in s:
            _, su, sv, *_ = surface._partials(float(u), float(v))
            local = math.hypot(np.linalg.norm(su), np.linalg.norm(sv))
            speed = max(speed, local)
    n_edge = math.ceil(speed / budget.max_edge_length)

    n = max(4, n_curv, n_edge)
    n = min(n, MAX_INITIAL_CELLS)
    while n > 4 and 2 * n * n > budget.max_triangles:
        n = max(n // 2, 4)
    return n


def grid_mesh(
    surface: ParametricSurface,
    n: int,
    *,
    face: int = 0,
    scale: float = 1.0,
) -> LabeledTriMesh:
    """An ``n x n`` grid over the unit square, lifted onto the surface; each
    cell is split along its diagonal from ``(i, j)`` to ``(i+1, j+1)``"""
    s = np.linspace(0.0, 1.0, n + 1)
    uu, vv = np.meshgrid(s, s, indexing="ij")
    pts = surface._eval(uu, vv).reshape(-1, 3)
    uv = np.stack([uu.ravel(), vv.ravel()], axis=1)

    def idx(i, j):
        return i * (n + 1) + j

    tris = []
    for i in range(n):
        for j in range(n):
            v00, v10 = idx(i, j), idx(i + 1, j)
            v01, v11 = idx(i, j + 1), idx(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))

    return LabeledTriMesh.from_arrays(
        pts, tris, face=face, uv=uv, scale=scale
    )


def mesh_patch(
    surface: ParametricSurface,
    budget: SamplingBudget,
    *,
    face: int = 0,
    epsilon: Optional[float] = None,
) -> LabeledTriMesh:
    """Meshes the full parameter domain of a surface.

    Nearly empty parameter ranges are first padded by the budget's
    ``domain_padding``, see
    :py:meth:`~brepmesh.geometry.ParametricSurface.padded`.

    Args:
        surface (ParametricSurface): The surface to mesh
        budget (SamplingBudget): Tolerance, maximum edge length and the
            triangle cap
        face (int, optional): The b-face label of all triangles
        epsilon (float, optional): Overrides the budget's tolerance

    Raises:
        ResourceLimitError: If refinement exceeds the triangle cap
    """
    surface = surface.padded(budget.domain_padding)
    eps = budget.epsilon if epsilon is None else epsilon
    max_edge = budget.max_edge_length
    n = initial_grid_size(surface, budget.model_copy(update=dict(epsilon=eps)))
    mesh = grid_mesh(surface, n, face=face, scale=budget.diagonal)

    marked = _mark(mesh, surface, sorted(mesh.tris), eps, max_edge)
    rounds = 0
    while marked:
        rounds += 1
        before = set(mesh.tris)
        for tid in marked:
            if tid in mesh.tris:
                bisect_longest(mesh, surface, tid)

        if len(mesh.tris) > budget.max_triangles:
            raise ResourceLimitError(
                f"Refinement exceeded the cap of {budget.max_triangles} "
                "triangles",
                face=face,
            )
        new = sorted(set(mesh.tris) - before)
        marked = _mark(mesh, surface, new, eps, max_edge)

    log.debug(
        "Meshed %s (face %d): %dx%d grid, %d refinement round(s), %d "
        "triangles.",
        surface,
        face,
        n,
        n,
        rounds,
        len(mesh.tris),
    )
    return mesh


def _mark(mesh, surface, tids, eps, max_edge) -> list:
    if not tids:
        return []
    uv = np.array([[mesh.uv[v] for v in mesh.tris[t]] for t in tids])
    xyz = np.array([mesh.tri_points(t) for t in tids])
    _, dev = _batch_deviation(surface, uv, xyz)

    edges3 = np.linalg.norm(xyz - np.roll(xyz, -1, axis=1), axis=-1).max(1)
    edges2 = np.linalg.norm(uv - np.roll(uv, -1, axis=1), axis=-1).max(1)
    refine = ((dev > eps) | (edges3 > max_edge)) & (edges2 > MIN_PARAM_EDGE)
    return [t for t, r in zip(tids, refine) if r]


def bisect_longest(mesh: LabeledTriMesh, surface, tid: int):
    """Splits the longest parameter edge of a triangle at its parameter
    midpoint; the neighbour sharing the edge is split with it"""
    tri = mesh.tris[tid]
    best = None
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        ua, ub = np.array(mesh.uv[a]), np.array(mesh.uv[b])
        length = float(np.linalg.norm(ua - ub))
        key = (length, -min(a, b), -max(a, b))
        if best is None or key > best[0]:
            best = (key, a, b, 0.5 * (ua + ub))
    _, a, b, mid = best
    pos = surface._eval(mid[0], mid[1])
    mesh.split_edge(a, b, pos, uv=(float(mid[0]), float(mid[1])))

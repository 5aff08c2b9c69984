"""A deterministic suite of small synthetic B-Reps.

The suite covers the structural cases the pipeline has to deal with: plain
polyhedral faces, periodic seams, polar and apex singularities, faces with
inner loops, a loop that touches itself in a vertex and edge geometry that
is inconsistent with the faces it bounds. The adversarial nested-hole plate
makes the optimistic tracing of inner loops fail on purpose.
"""

import logging
import math
import os
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .formats import BRepDocument, document_from_dict, write_brep

log = logging.getLogger(__name__)

FIXTURE_SUFFIX = ".brep.txt"

Z_AXIS = (0.0, 0.0, 1.0)


# -- Document assembly --------------------------------------------------------


def _document(
    name: str,
    points: Sequence[Tuple[float, float, float]],
    edges: Sequence[Tuple[int, int, dict]],
    loops: Sequence[Sequence[Tuple[int, int]]],
    faces: Sequence[Tuple[int, Sequence[int], dict]],
) -> BRepDocument:
    """Builds a document from positional entity lists; ids are indices"""
    return document_from_dict(
        dict(
            format="brepmesh-brep",
            format_version=1,
            name=name,
            units="unitless",
            vertices=[
                dict(id=i, point=[float(x) for x in p])
                for i, p in enumerate(points)
            ],
            edges=[
                dict(id=i, start=s, end=e, curve=curve)
                for i, (s, e, curve) in enumerate(edges)
            ],
            loops=[
                dict(id=i, edges=[[E, sign] for E, sign in lp])
                for i, lp in enumerate(loops)
            ],
            faces=[
                dict(id=i, outer=outer, inner=list(inner), surface=surface)
                for i, (outer, inner, surface) in enumerate(faces)
            ],
        )
    )


def _line(a, b) -> dict:
    return dict(type="line", start=list(a), end=list(b))


def _circle(center, radius: float, *, ref_direction=None) -> dict:
    d = dict(type="arc", center=list(center), axis=list(Z_AXIS), radius=radius)
    if ref_direction is not None:
        d["ref_direction"] = list(ref_direction)
    return d


def _plane(origin, u_vec, v_vec) -> dict:
    return dict(
        type="plane", origin=list(origin), u_vec=list(u_vec), v_vec=list(v_vec)
    )


def _sub(a, b) -> List[float]:
    return [x - y for x, y in zip(a, b)]


# -- Polyhedra ----------------------------------------------------------------

CUBE_CORNERS = [
    (float(i & 1), float((i >> 1) & 1), float((i >> 2) & 1)) for i in range(8)
]
"""Corners of the unit cube; bit ``k`` of the index is coordinate ``k``"""

CUBE_QUADS = (
    (0, 2, 3, 1),
    (4, 5, 7, 6),
    (0, 1, 5, 4),
    (2, 6, 7, 3),
    (0, 4, 6, 2),
    (1, 3, 7, 5),
)
"""Faces of the unit cube, counter-clockwise seen from outside"""


def _box(name: str, *, displace: Optional[Dict[int, tuple]] = None):
    """The unit cube; ``displace`` offsets the curves of some edges"""
    displace = displace or {}
    pairs = [
        (a, b) for a in range(8) for b in range(a + 1, 8) if a ^ b in (1, 2, 4)
    ]
    edge_ids = {pair: i for i, pair in enumerate(pairs)}

    edges = []
    for i, (a, b) in enumerate(pairs):
        d = displace.get(i, (0.0, 0.0, 0.0))
        edges.append(
            (
                a,
                b,
                _line(
                    [x + y for x, y in zip(CUBE_CORNERS[a], d)],
                    [x + y for x, y in zip(CUBE_CORNERS[b], d)],
                ),
            )
        )

    loops, faces = [], []
    for quad in CUBE_QUADS:
        loop = []
        for k in range(4):
            a, b = quad[k], quad[(k + 1) % 4]
            E = edge_ids[(min(a, b), max(a, b))]
            loop.append((E, 1 if a < b else -1))
        c0, c1, _, c3 = (CUBE_CORNERS[v] for v in quad)
        faces.append(
            (len(loops), (), _plane(c0, _sub(c1, c0), _sub(c3, c0)))
        )
        loops.append(loop)

    return _document(name, CUBE_CORNERS, edges, loops, faces)


def cube() -> BRepDocument:
    """The unit cube: 8 vertices, 12 edges, 6 faces"""
    return _box("cube")


def displaced_cube() -> BRepDocument:
    """The unit cube with the curve of edge 0 moved off its two faces by
    5% of the cube diagonal"""
    offset = 0.05 * math.sqrt(3.0) / math.sqrt(2.0)
    return _box("displaced_cube", displace={0: (0.0, -offset, -offset)})


# -- Surfaces of revolution ---------------------------------------------------


def cylinder(radius: float = 0.5, height: float = 1.0) -> BRepDocument:
    """A capped cylinder; the lateral face is closed by a seam edge"""
    bottom, top = (radius, 0.0, 0.0), (radius, 0.0, height)
    corner = (-radius, -radius)
    cap_u, cap_v = (2 * radius, 0.0, 0.0), (0.0, 2 * radius, 0.0)
    return _document(
        "cylinder",
        [bottom, top],
        [
            (0, 0, _circle((0.0, 0.0, 0.0), radius)),
            (1, 1, _circle((0.0, 0.0, height), radius)),
            (0, 1, _line(bottom, top)),
        ],
        [
            [(0, 1), (2, 1), (1, -1), (2, -1)],
            [(0, -1)],
            [(1, 1)],
        ],
        [
            (
                0,
                (),
                dict(
                    type="cylinder",
                    origin=[0.0, 0.0, 0.0],
                    axis=list(Z_AXIS),
                    radius=radius,
                    heights=[0.0, height],
                ),
            ),
            (
                1,
                (),
                _plane((*corner, 0.0), cap_u, cap_v),
            ),
            (
                2,
                (),
                _plane((*corner, height), cap_u, cap_v),
            ),
        ],
    )


def sphere(radius: float = 1.0) -> BRepDocument:
    """A sphere made of one face, bounded by a seam from pole to pole; the
    poles are singular sides of the parametrization"""
    north, south = (0.0, 0.0, radius), (0.0, 0.0, -radius)
    seam = dict(
        type="arc",
        center=[0.0, 0.0, 0.0],
        axis=[0.0, 1.0, 0.0],
        radius=radius,
        angles=[0.0, math.pi],
        ref_direction=list(Z_AXIS),
    )
    return _document(
        "sphere",
        [north, south],
        [(0, 1, seam)],
        [[(0, 1), (0, -1)]],
        [(0, (), dict(type="sphere", center=[0.0, 0.0, 0.0], radius=radius))],
    )


def cone(half_angle: float = math.pi / 6, height: float = 1.0):
    """A capped cone; the apex is a singular side of the lateral face"""
    r = height * math.tan(half_angle)
    apex, rim = (0.0, 0.0, 0.0), (r, 0.0, height)
    return _document(
        "cone",
        [apex, rim],
        [
            (0, 1, _line(apex, rim)),
            (1, 1, _circle((0.0, 0.0, height), r)),
        ],
        [
            [(0, 1), (1, 1), (0, -1)],
            [(1, -1)],
        ],
        [
            (
                0,
                (),
                dict(
                    type="cone",
                    apex=list(apex),
                    axis=list(Z_AXIS),
                    half_angle=half_angle,
                    heights=[0.0, height],
                ),
            ),
            (
                1,
                (),
                _plane((-r, -r, height), (2 * r, 0.0, 0.0), (0.0, 2 * r, 0.0)),
            ),
        ],
    )


# -- Plates -------------------------------------------------------------------

SQUARE = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, 0.0)]

UNIT_PLANE = _plane((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0))


def _plate(name: str, holes: Sequence[Tuple[tuple, float, float]]):
    """The unit square with circular holes, given as center, radius and the
    angle of the vertex on the hole"""
    points = list(SQUARE)
    edges = [
        (k, (k + 1) % 4, _line(SQUARE[k], SQUARE[(k + 1) % 4]))
        for k in range(4)
    ]
    loops = [[(k, 1) for k in range(4)]]

    for center, radius, angle in holes:
        ref = (math.cos(angle), math.sin(angle), 0.0)
        points.append(
            (center[0] + radius * ref[0], center[1] + radius * ref[1], 0.0)
        )
        v = len(points) - 1
        edges.append(
            (
                v,
                v,
                _circle((*center, 0.0), radius, ref_direction=ref),
            )
        )
        loops.append([(len(edges) - 1, -1)])

    inner = list(range(1, len(loops)))
    return _document(name, points, edges, loops, [(0, inner, UNIT_PLANE)])


def plate_hole() -> BRepDocument:
    """A square plate with one circular hole"""
    return _plate("plate_hole", [((0.5, 0.5), 0.2, 0.0)])


def plate_two_holes() -> BRepDocument:
    """A square plate with two circular holes"""
    return _plate(
        "plate_two_holes", [((0.3, 0.5), 0.12, 0.0), ((0.7, 0.5), 0.12, 0.0)]
    )


def nested_holes() -> BRepDocument:
    """A plate whose second hole encloses the first one.

    The geometry contradicts the topology, which only knows two disjoint
    holes. Tracing the second hole without first cutting the face back into
    a disk encloses the first hole, which the optimistic inner loop tracing
    detects and rejects.
    """
    return _plate(
        "nested_holes",
        [((0.5, 0.5), 0.1, 0.0), ((0.5, 0.5), 0.3, math.pi / 3)],
    )


def figure_eight() -> BRepDocument:
    """A square plate with a notch: its single loop runs around the square
    and then around a circle that touches the square in one vertex, so that
    vertex is visited twice"""
    points = [
        (0.5, 0.0, 0.0),
        (1.0, 0.0, 0.0),
        (1.0, 1.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 0.0),
    ]
    edges = [
        (k, (k + 1) % 5, _line(points[k], points[(k + 1) % 5]))
        for k in range(5)
    ]
    edges.append(
        (0, 0, _circle((0.5, 0.25, 0.0), 0.25, ref_direction=(0.0, -1.0, 0.0)))
    )
    loop = [(k, 1) for k in range(5)] + [(5, -1)]
    return _document(
        "figure_eight", points, edges, [loop], [(0, (), UNIT_PLANE)]
    )


# -----------------------------------------------------------------------------

FIXTURES: Dict[str, Callable[[], BRepDocument]] = {
    "cube": cube,
    "cylinder": cylinder,
    "sphere": sphere,
    "cone": cone,
    "plate_hole": plate_hole,
    "plate_two_holes": plate_two_holes,
    "figure_eight": figure_eight,
    "displaced_cube": displaced_cube,
    "nested_holes": nested_holes,
}
"""All fixtures by name, in a fixed order"""

ACCEPTANCE_FIXTURES: Tuple[str, ...] = tuple(FIXTURES)[:8]
"""The fixtures every preset has to mesh with a clean topology report"""


def build_fixture(name: str) -> BRepDocument:
    try:
        return FIXTURES[name]()
    except KeyError as err:
        raise ValueError(
            f"No fixture named '{name}'! Available: {', '.join(FIXTURES)}"
        ) from err


def write_fixtures(
    out_dir: str, *, names: Optional[Sequence[str]] = None
) -> List[str]:
    """Writes fixture documents to ``<out_dir>/<name>.brep.txt``.

    Returns:
        List[str]: The written paths, in the order of ``names``
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name in names or FIXTURES:
        path = os.path.join(out_dir, name + FIXTURE_SUFFIX)
        write_brep(build_fixture(name), path)
        paths.append(path)
        log.remark("Wrote fixture '%s' to %s.", name, path)
    return paths

"""The ``.brep.txt`` interchange format: a version-tagged YAML document
holding the B-Rep topology and the parameters of its geometric primitives.

See ``doc/format.md`` for the grammar. Documents are validated in three
steps: the format version, the document schema (with one pydantic model per
primitive variant), and finally :py:func:`~brepmesh.brep.validate_brep`.
Every error names the line and the field path of the offending entry.
"""

import io
import logging
import math
import os
from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple, Type, Union

import numpy as np
import pydantic
from ruamel.yaml.comments import CommentedMap, CommentedSeq
from ruamel.yaml.error import YAMLError

from .._yaml import yaml_rt
from ..brep import (
    BEdge,
    BFace,
    BLoop,
    BRep,
    BRepTopology,
    GeometryMap,
    OrientedEdge,
    validate_brep,
)
from ..exceptions import (
    GeometryError,
    ParseError,
    SchemaError,
    UnknownVariantError,
    VersionMismatchError,
)
from ..geometry import (
    BSplineCurve,
    BSplinePatch,
    CircularArc,
    Cone,
    Cylinder,
    LineSegment,
    Plane,
    Sphere,
    Torus,
)
from ..geometry._tools import TWO_PI

log = logging.getLogger(__name__)

FORMAT_NAME = "brepmesh-brep"
FORMAT_VERSION = 1

Point = Tuple[float, float, float]
Range = Tuple[float, float]


# -- Primitive schemas --------------------------------------------------------


class _Spec(pydantic.BaseModel):
    model_config = dict(extra="forbid", frozen=True)


class LineSpec(_Spec):
    type: Literal["line"] = "line"
    start: Point
    end: Point

    def build(self):
        return LineSegment(self.start, self.end)


class ArcSpec(_Spec):
    type: Literal["arc"] = "arc"
    center: Point
    axis: Point
    radius: float
    angles: Range = (0.0, TWO_PI)
    ref_direction: Optional[Point] = None

    def build(self):
        return CircularArc(
            self.center,
            self.axis,
            self.radius,
            self.angles,
            ref_direction=self.ref_direction,
        )


class BSplineCurveSpec(_Spec):
    type: Literal["bspline"] = "bspline"
    degree: int
    knots: Tuple[float, ...]
    control_points: Tuple[Point, ...]

    def build(self):
        return BSplineCurve(self.degree, self.knots, self.control_points)


class PlaneSpec(_Spec):
    type: Literal["plane"] = "plane"
    origin: Point
    u_vec: Point
    v_vec: Point

    def build(self):
        return Plane(self.origin, self.u_vec, self.v_vec)


class CylinderSpec(_Spec):
    type: Literal["cylinder"] = "cylinder"
    origin: Point
    axis: Point
    radius: float
    heights: Range = (0.0, 1.0)
    angles: Range = (0.0, TWO_PI)
    ref_direction: Optional[Point] = None

    def build(self):
        return Cylinder(
            self.origin,
            self.axis,
            self.radius,
            self.heights,
            self.angles,
            ref_direction=self.ref_direction,
        )


class ConeSpec(_Spec):
    type: Literal["cone"] = "cone"
    apex: Point
    axis: Point
    half_angle: float
    heights: Range = (0.0, 1.0)
    angles: Range = (0.0, TWO_PI)
    ref_direction: Optional[Point] = None

    def build(self):
        return Cone(
            self.apex,
            self.axis,
            self.half_angle,
            self.heights,
            self.angles,
            ref_direction=self.ref_direction,
        )


class SphereSpec(_Spec):
    type: Literal["sphere"] = "sphere"
    center: Point
    radius: float
    axis: Point = (0.0, 0.0, 1.0)
    ref_direction: Optional[Point] = None
    angles: Range = (0.0, TWO_PI)
    colatitudes: Range = (0.0, math.pi)

    def build(self):
        return Sphere(
            self.center,
            self.radius,
            axis=self.axis,
            ref_direction=self.ref_direction,
            angles=self.angles,
            colatitudes=self.colatitudes,
        )


class TorusSpec(_Spec):
    type: Literal["torus"] = "torus"
    center: Point
    axis: Point
    major_radius: float
    minor_radius: float
    ref_direction: Optional[Point] = None
    angles: Range = (0.0, TWO_PI)
    tube_angles: Range = (0.0, TWO_PI)

    def build(self):
        return Torus(
            self.center,
            self.axis,
            self.major_radius,
            self.minor_radius,
            ref_direction=self.ref_direction,
            angles=self.angles,
            tube_angles=self.tube_angles,
        )


class BSplinePatchSpec(_Spec):
    type: Literal["bspline"] = "bspline"
    degrees: Tuple[int, int]
    knots_u: Tuple[float, ...]
    knots_v: Tuple[float, ...]
    control_points: Tuple[Tuple[Point, ...], ...]

    def build(self):
        return BSplinePatch(
            self.degrees, self.knots_u, self.knots_v, self.control_points
        )


CurveSpec = Union[LineSpec, ArcSpec, BSplineCurveSpec]
SurfaceSpec = Union[
    PlaneSpec, CylinderSpec, ConeSpec, SphereSpec, TorusSpec, BSplinePatchSpec
]

CURVE_VARIANTS: Dict[str, Type[_Spec]] = {
    "line": LineSpec,
    "arc": ArcSpec,
    "bspline": BSplineCurveSpec,
}
SURFACE_VARIANTS: Dict[str, Type[_Spec]] = {
    "plane": PlaneSpec,
    "cylinder": CylinderSpec,
    "cone": ConeSpec,
    "sphere": SphereSpec,
    "torus": TorusSpec,
    "bspline": BSplinePatchSpec,
}


# -- Document schema ----------------------------------------------------------


class _Entry(pydantic.BaseModel):
    model_config = dict(extra="forbid")


class VertexEntry(_Entry):
    id: int
    point: Point


class EdgeEntry(_Entry):
    id: int
    start: int
    end: int
    curve: dict


class LoopEntry(_Entry):
    id: int
    edges: List[Tuple[int, Literal[1, -1]]] = pydantic.Field(min_length=1)


class FaceEntry(_Entry):
    id: int
    outer: int
    inner: List[int] = []
    surface: dict


class DocumentSchema(_Entry):
    format: Literal["brepmesh-brep"]
    format_version: int
    name: Optional[str] = None
    units: str = "unitless"
    vertices: List[VertexEntry]
    edges: List[EdgeEntry]
    loops: List[LoopEntry]
    faces: List[FaceEntry]

    @pydantic.field_validator("faces")
    @classmethod
    def _at_least_one_face(cls, faces):
        if not faces:
            raise ValueError("the document needs at least one face")
        return faces


# -----------------------------------------------------------------------------


@dataclass
class BRepDocument:
    """A B-Rep together with the primitive parameters it was built from"""

    brep: BRep
    curve_specs: Dict[int, CurveSpec]
    surface_specs: Dict[int, SurfaceSpec]
    format_version: int = FORMAT_VERSION
    units: str = "unitless"
    name: Optional[str] = None

    @property
    def topology(self) -> BRepTopology:
        return self.brep.topology

    @property
    def geometry(self) -> GeometryMap:
        return self.brep.geometry

    def to_dict(self) -> dict:
        """The document as plain data, in the layout of the file format"""
        topo, geo = self.topology, self.geometry
        d = dict(format=FORMAT_NAME, format_version=self.format_version)
        if self.name is not None:
            d["name"] = self.name
        d["units"] = self.units
        d["vertices"] = [
            dict(id=v, point=[float(x) for x in geo.vertex_points[v]])
            for v in topo.vertices
        ]
        d["edges"] = [
            dict(
                id=e.id,
                start=e.start,
                end=e.end,
                curve=_spec_dict(self.curve_specs[e.id]),
            )
            for e in topo.edges.values()
        ]
        d["loops"] = [
            dict(
                id=lp.id,
                edges=[[oe.edge, 1 if oe.forward else -1] for oe in lp.edges],
            )
            for lp in topo.loops.values()
        ]
        d["faces"] = [
            dict(
                id=f.id,
                outer=f.outer,
                inner=list(f.inner),
                surface=_spec_dict(self.surface_specs[f.id]),
            )
            for f in topo.faces.values()
        ]
        return d


def _spec_dict(spec: _Spec) -> dict:
    return _plain(spec.model_dump(exclude_none=True))


def _plain(obj):
    """Turns tuples into lists, recursively"""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


# -- Reading ------------------------------------------------------------------


def _line_of(data, loc) -> Optional[int]:
    """The 1-based line of the innermost entry along ``loc`` that carries
    line information"""
    line, node = None, data
    for key in loc:
        lc = getattr(node, "lc", None)
        try:
            if isinstance(node, CommentedMap) and key in node:
                line = lc.key(key)[0] + 1
            elif isinstance(node, CommentedSeq) and isinstance(key, int):
                line = lc.item(key)[0] + 1
            node = node[key]
        except (KeyError, IndexError, TypeError, AttributeError):
            break
    return line


def _field_path(loc) -> str:
    return ".".join(str(k) for k in loc)


def _validate(model: Type[pydantic.BaseModel], data, *, root, prefix=()):
    try:
        return model.model_validate(data)

    except pydantic.ValidationError as err:
        first = err.errors()[0]
        loc = tuple(prefix) + tuple(first["loc"])
        raise SchemaError(
            first["msg"], line=_line_of(root, loc), field=_field_path(loc)
        ) from err


def _primitive(
    variants: Dict[str, Type[_Spec]], data, *, kind: str, root, loc
):
    tag = data.get("type") if isinstance(data, dict) else None
    if tag not in variants:
        raise UnknownVariantError(
            f"Unknown {kind} type '{tag}'; available: "
            f"{', '.join(sorted(variants))}",
            line=_line_of(root, loc),
            field=_field_path(loc + ("type",)),
        )
    spec = _validate(variants[tag], data, root=root, prefix=loc)
    try:
        return spec, spec.build()

    except GeometryError as err:
        raise SchemaError(
            str(err), line=_line_of(root, loc), field=_field_path(loc)
        ) from err


def document_from_dict(data) -> BRepDocument:
    """Validates document data (as loaded from YAML) and builds the B-Rep.

    Raises:
        VersionMismatchError: For unsupported format versions
        SchemaError: For schema violations and invalid B-Reps
        UnknownVariantError: For unknown primitive type tags
    """
    if not isinstance(data, dict):
        raise SchemaError("The document must be a mapping")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"Unsupported format version {version!r}; expected "
            f"{FORMAT_VERSION}",
            line=_line_of(data, ("format_version",)),
            field="format_version",
        )
    doc = _validate(DocumentSchema, data, root=data)
    for key in ("edges", "loops", "faces"):
        ids = [x.id for x in getattr(doc, key)]
        if len(set(ids)) != len(ids):
            raise SchemaError(
                f"Repeated {key[:-1]} ids",
                line=_line_of(data, (key,)),
                field=key,
            )

    curve_specs, curves = {}, {}
    for i, e in enumerate(doc.edges):
        curve_specs[e.id], curves[e.id] = _primitive(
            CURVE_VARIANTS,
            e.curve,
            kind="curve",
            root=data,
            loc=("edges", i, "curve"),
        )
    surface_specs, surfaces = {}, {}
    for i, f in enumerate(doc.faces):
        surface_specs[f.id], surfaces[f.id] = _primitive(
            SURFACE_VARIANTS,
            f.surface,
            kind="surface",
            root=data,
            loc=("faces", i, "surface"),
        )

    topology = BRepTopology(
        vertices=[v.id for v in doc.vertices],
        edges=[BEdge(e.id, e.start, e.end) for e in doc.edges],
        loops=[
            BLoop(
                lp.id,
                tuple(OrientedEdge(eid, d == 1) for eid, d in lp.edges),
            )
            for lp in doc.loops
        ],
        faces=[BFace(f.id, f.outer, tuple(f.inner)) for f in doc.faces],
    )
    geometry = GeometryMap(
        vertex_points={
            v.id: np.asarray(v.point, dtype=float) for v in doc.vertices
        },
        edge_curves=curves,
        face_surfaces=surfaces,
    )
    report = validate_brep(topology, geometry)
    if not report.ok:
        raise SchemaError(f"Invalid B-Rep:\n{report}")

    return BRepDocument(
        brep=BRep(topology, geometry, name=doc.name, units=doc.units),
        curve_specs=curve_specs,
        surface_specs=surface_specs,
        format_version=doc.format_version,
        units=doc.units,
        name=doc.name,
    )


def read_brep(source) -> BRepDocument:
    """Reads a ``.brep.txt`` document from a path, a text or byte stream, or
    a string holding the document.

    Raises:
        ParseError: For YAML syntax errors, with the line of the problem;
            see :py:func:`document_from_dict` for the other errors
    """
    if isinstance(source, os.PathLike) or (
        isinstance(source, str) and "\n" not in source
    ):
        with open(source, "rb") as f:
            content = f.read()
    elif isinstance(source, (str, bytes)):
        content = source
    else:
        content = source.read()
    if isinstance(content, bytes):
        content = content.decode("utf-8")

    try:
        data = yaml_rt.load(content)

    except YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise ParseError(
            f"Syntax error: {getattr(err, 'problem', None) or err}",
            line=None if mark is None else mark.line + 1,
        ) from err

    doc = document_from_dict(data)
    log.debug("Read B-Rep %s.", doc.brep)
    return doc


# -- Writing ------------------------------------------------------------------


def _flow(seq) -> CommentedSeq:
    s = CommentedSeq(seq)
    s.fa.set_flow_style()
    return s


def _styled(obj):
    """Converts plain data into ruamel containers; lists of scalars are
    written in flow style"""
    if isinstance(obj, dict):
        m = CommentedMap()
        for k, v in obj.items():
            m[k] = _styled(v)
        return m
    if isinstance(obj, list):
        if all(not isinstance(x, (dict, list)) for x in obj):
            return _flow(obj)
        return CommentedSeq([_styled(x) for x in obj])
    return obj


def write_brep(doc: BRepDocument, target):
    """Writes a document to a path or a text stream; floats use their
    shortest round-trip representation"""
    data = _styled(doc.to_dict())
    data.yaml_set_start_comment("brepmesh B-Rep interchange document")

    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8") as f:
            yaml_rt.dump(data, f)
    else:
        yaml_rt.dump(data, target)


def dumps_brep(doc: BRepDocument) -> str:
    buf = io.StringIO()
    write_brep(doc, buf)
    return buf.getvalue()

"""Labeled mesh output: an ``.obj`` file with one group per b-face and a
tab-separated ``.labels.tsv`` sidecar with the vertex and edge labels.

Vertices are written in the order of their ids; indices in the sidecar are
0-based positions in that order (the ``.obj`` file itself is 1-based as
usual). All floats use their shortest round-trip representation, so that
reading back reproduces positions and labels exactly.
"""

import logging
import os
from typing import Dict, Optional, Tuple

import numpy as np

from ..brep import BRep
from ..exceptions import LabelResolutionError, ParseError
from ..mesh import LabeledTriMesh
from ..validation import resolve_labels

log = logging.getLogger(__name__)

LABELS_SUFFIX = ".labels.tsv"
LABELS_HEADER = "kind\tindex\tentity\tparam"

GROUP_PREFIX = "bface_"


def sidecar_path(obj_path) -> str:
    """The path of the label table belonging to an ``.obj`` file"""
    root, ext = os.path.splitext(os.fspath(obj_path))
    return (root if ext.lower() == ".obj" else os.fspath(obj_path)) + (
        LABELS_SUFFIX
    )


def _fmt(x: float) -> str:
    return repr(float(x))


# -----------------------------------------------------------------------------


def write_labeled_mesh(mesh: LabeledTriMesh, path) -> Tuple[str, str]:
    """Writes the mesh geometry and its label table.

    Args:
        mesh (LabeledTriMesh): The mesh to write
        path: Path of the ``.obj`` file; the sidecar is placed next to it

    Returns:
        Tuple[str, str]: The paths of both written files
    """
    path = os.fspath(path)
    labels_path = sidecar_path(path)
    verts = mesh.vertices()
    index = {v: i for i, v in enumerate(verts)}

    lines = [
        "# brepmesh labeled mesh",
        f"# labels: {os.path.basename(labels_path)}",
    ]
    lines += [
        "v " + " ".join(_fmt(x) for x in mesh.positions[v]) for v in verts
    ]
    for face in mesh.faces():
        lines.append(f"g {GROUP_PREFIX}{face}")
        for tid in mesh.triangles_of_face(face):
            lines.append(
                "f " + " ".join(str(index[v] + 1) for v in mesh.tris[tid])
            )

    rows = [LABELS_HEADER]
    for v in verts:
        if v in mesh.bvertex:
            rows.append(f"bvertex\t{index[v]}\t{mesh.bvertex[v]}\t")
    for v in verts:
        if v in mesh.bedge:
            bedge, t = mesh.bedge[v]
            rows.append(f"bedge_vertex\t{index[v]}\t{bedge}\t{_fmt(t)}")
    edge_rows = sorted(
        (tuple(sorted((index[a], index[b]))), lbl)
        for (a, b), lbl in mesh.edge_labels.items()
        if mesh.has_edge(a, b)
    )
    for (i, j), lbl in edge_rows:
        rows.append(f"edge\t{i},{j}\t{lbl}\t")

    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    with open(labels_path, "w", encoding="utf-8") as f:
        f.write("\n".join(rows) + "\n")

    log.debug(
        "Wrote %d vertices, %d triangles and %d label rows to %s.",
        len(verts),
        mesh.num_triangles,
        len(rows) - 1,
        path,
    )
    return path, labels_path


# -----------------------------------------------------------------------------


def _read_obj(path: str):
    points, tris, faces = [], [], []
    face = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "v":
                    points.append([float(x) for x in parts[1:4]])
                elif parts[0] == "g":
                    name = parts[1] if len(parts) > 1 else ""
                    if not name.startswith(GROUP_PREFIX):
                        raise ValueError(f"group '{name}' is not a b-face")
                    face = int(name[len(GROUP_PREFIX) :])
                elif parts[0] == "f":
                    idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                    if len(set(idx)) != 3 or min(idx) < 0:
                        raise ValueError("expected a triangle of 3 indices")
                    if face is None:
                        raise ValueError("triangle outside of a b-face group")
                    tris.append(idx)
                    faces.append(face)
            except (ValueError, IndexError) as err:
                raise ParseError(
                    str(err), line=lineno, field=parts[0]
                ) from err

    if any(i >= len(points) for tri in tris for i in tri):
        raise ParseError(f"{path} references a vertex that does not exist")
    return np.array(points, dtype=float).reshape(-1, 3), tris, faces


def _read_labels(path: str, num_vertices: int):
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if lineno == 1:
                if line != LABELS_HEADER:
                    raise ParseError(
                        "Missing label table header", line=1, field="header"
                    )
                continue
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ParseError(
                    f"Expected 4 tab-separated columns, got {len(cols)}",
                    line=lineno,
                )
            kind, index, entity, param = cols
            try:
                if kind == "edge":
                    idx = tuple(int(i) for i in index.split(","))
                    if len(idx) != 2:
                        raise ValueError("expected an index pair")
                elif kind in ("bvertex", "bedge_vertex"):
                    idx = (int(index),)
                else:
                    raise ValueError(f"unknown kind '{kind}'")
                value = (int(entity), float(param) if param else None)
            except ValueError as err:
                raise ParseError(str(err), line=lineno, field=kind) from err

            if any(not 0 <= i < num_vertices for i in idx):
                raise LabelResolutionError(
                    f"Label table line {lineno} references mesh vertex "
                    f"{index}, but the mesh has {num_vertices} vertices"
                )
            if kind == "bedge_vertex" and value[1] is None:
                raise ParseError(
                    "Curve parameter missing", line=lineno, field="param"
                )
            rows.append((lineno, kind, idx, value))
    return rows


def read_labeled_mesh(path, *, brep: Optional[BRep] = None) -> LabeledTriMesh:
    """Reads a mesh written by :py:func:`write_labeled_mesh`.

    Args:
        path: Path of the ``.obj`` file
        brep (BRep, optional): If given, the labels are resolved against it
            and the b-edge end points are taken from its topology

    Raises:
        ParseError: For malformed files
        LabelResolutionError: For labels that reference missing mesh
            entities or, with ``brep`` given, missing B-Rep entities
    """
    path = os.fspath(path)
    points, tris, faces = _read_obj(path)
    if brep is not None:
        scale = brep.diagonal
    elif len(points):
        scale = float(np.linalg.norm(np.ptp(points, axis=0))) or 1.0
    else:
        scale = 1.0
    mesh = LabeledTriMesh(scale=scale)
    ids = [mesh.add_vertex(p) for p in points]
    for tri, face in zip(tris, faces):
        mesh.add_triangle(*(ids[i] for i in tri), face=face)

    for lineno, kind, idx, (entity, param) in _read_labels(
        sidecar_path(path), len(ids)
    ):
        if kind == "bvertex":
            mesh.bvertex[ids[idx[0]]] = entity
        elif kind == "bedge_vertex":
            mesh.bedge[ids[idx[0]]] = (entity, param)
        else:
            a, b = ids[idx[0]], ids[idx[1]]
            if not mesh.has_edge(a, b):
                raise LabelResolutionError(
                    f"Label table line {lineno} labels the edge {idx}, which "
                    "is not an edge of the mesh"
                )
            mesh.label_edge(a, b, entity)

    if brep is not None:
        resolve_labels(mesh, brep)
        mesh.bedge_ends = {
            e.id: (e.start, e.end) for e in brep.topology.edges.values()
        }
    return mesh


def label_counts(mesh: LabeledTriMesh) -> Dict[str, int]:
    """Number of b-face groups, labeled b-edge chains and b-vertices"""
    return dict(
        faces=len(mesh.faces()),
        edges=len(set(mesh.edge_labels.values())),
        vertices=len(set(mesh.bvertex.values())),
    )

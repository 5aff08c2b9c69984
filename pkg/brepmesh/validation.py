"""Verification of the output: topology preservation, geometric deviation and
mesh statistics.

The topology check compares the labeled mesh against the B-Rep it was
generated from:

(a) the triangles of each b-face form one component that, cut along its
    labeled chains, is a genus-0 surface with one boundary per b-loop,
(b) the edges of each b-edge form one simple chain (or cycle) ending in
    the right b-vertices,
(c) face adjacency via labeled edges equals the B-Rep's, including the
    number of uses of a b-edge by a face (seams appear as self-loops),
(d) the boundary of each cut b-face, read as a cyclic sequence of b-edge
    labels, matches the b-edge sequences of the face's loops up to rotation
    and orientation.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .brep import BRep
from .exceptions import LabelResolutionError
from .mesh import (
    LabeledTriMesh,
    TriangleLocator,
    cut_along_edges,
    label_chains,
    quality_report,
)
from .mesh.cutting import (
    analyze_triangles,
    boundary_loop_count,
    component_analysis,
)
from .mesh.trimesh import ekey

log = logging.getLogger(__name__)

MIN_DEVIATION_SAMPLES = 1000


# -----------------------------------------------------------------------------


@dataclass
class FaceReport:
    num_triangles: int = 0
    connected: bool = False
    disk_after_cut: bool = False
    euler: int = 0
    boundary_loops: int = 0
    chains: List[List[int]] = field(default_factory=list)
    """The b-edge label sequences of the boundary cycles of the cut face"""


@dataclass
class EdgeReport:
    num_edges: int = 0
    simple: bool = False
    closed: bool = False
    endpoints: Tuple[Optional[int], Optional[int]] = (None, None)


@dataclass
class TopologyReport:
    """The outcome of :py:func:`check_topology`"""

    faces: Dict[int, FaceReport] = field(default_factory=dict)
    edges: Dict[int, EdgeReport] = field(default_factory=dict)
    discrepancies: List[str] = field(default_factory=list)

    @property
    def adjacency_match(self) -> bool:
        return not self.discrepancies

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def add(self, msg: str):
        self.discrepancies.append(msg)

    def __str__(self) -> str:
        if self.ok:
            return (
                f"Topology preserved: {len(self.faces)} b-faces, "
                f"{len(self.edges)} b-edges."
            )
        lines = [f"{len(self.discrepancies)} topology discrepancies:"]
        lines += [f"  - {msg}" for msg in self.discrepancies]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return dict(
            ok=self.ok,
            adjacency_match=self.adjacency_match,
            faces={
                fid: dict(fr.__dict__)
                for fid, fr in sorted(self.faces.items())
            },
            edges={
                eid: dict(er.__dict__, endpoints=list(er.endpoints))
                for eid, er in sorted(self.edges.items())
            },
            discrepancies=list(self.discrepancies),
        )

    def signature(self) -> dict:
        """The report without entity counts of the mesh; equal for any two
        meshes of the same B-Rep with the same topological outcome"""
        d = self.to_dict()
        for fr in d["faces"].values():
            fr.pop("num_triangles")
        for er in d["edges"].values():
            er.pop("num_edges")
        return d


# -----------------------------------------------------------------------------


def resolve_labels(mesh: LabeledTriMesh, brep: BRep):
    """Raises if any label of the mesh does not name a B-Rep entity"""
    topo = brep.topology
    faces = set(mesh.tri_face.values()) - set(topo.faces)
    edges = (
        set(mesh.edge_labels.values()) | {e for e, _ in mesh.bedge.values()}
    ) - set(topo.edges)
    verts = set(mesh.bvertex.values()) - set(topo.vertices)

    unresolved = [
        f"{kind} {sorted(ids)}"
        for kind, ids in (
            ("b-faces", faces),
            ("b-edges", edges),
            ("b-vertices", verts),
        )
        if ids
    ]
    if unresolved:
        raise LabelResolutionError(
            "Mesh labels do not resolve against the B-Rep: unknown "
            + ", ".join(unresolved)
        )


def _canonical_cycle(seq: List[int]) -> Tuple[int, ...]:
    """Compresses cyclic repetitions and picks the lexicographically minimal
    rotation of the sequence or its reverse"""
    comp = [x for i, x in enumerate(seq) if i == 0 or x != seq[i - 1]]
    while len(comp) > 1 and comp[0] == comp[-1]:
        comp.pop()
    variants = []
    for s in (comp, comp[::-1]):
        variants.extend(tuple(s[i:] + s[:i]) for i in range(len(s)))
    return min(variants) if variants else ()


def _boundary_cycles(mesh: LabeledTriMesh) -> List[List[int]]:
    """Oriented boundary cycles as vertex sequences"""
    counts = Counter(
        ekey(a, b)
        for tri in mesh.tris.values()
        for a, b in zip(tri, tri[1:] + tri[:1])
    )
    nxt: Dict[int, List[int]] = {}
    for tri in mesh.tris.values():
        for a, b in zip(tri, tri[1:] + tri[:1]):
            if counts[ekey(a, b)] == 1:
                nxt.setdefault(a, []).append(b)
    for targets in nxt.values():
        targets.sort()

    cycles = []
    for start in sorted(nxt):
        while nxt[start]:
            cycle, cur = [start], nxt[start].pop(0)
            while cur != start and nxt.get(cur):
                cycle.append(cur)
                cur = nxt[cur].pop(0)
            cycles.append(cycle)
    return cycles


def _check_face(report: TopologyReport, mesh: LabeledTriMesh, brep, fid):
    topo = brep.topology
    tids = mesh.triangles_of_face(fid)
    fr = FaceReport(num_triangles=len(tids))
    report.faces[fid] = fr
    if not tids:
        report.add(f"b-face {fid} has no triangles")
        return

    sub = mesh.submesh(tids)
    fr.connected = len(component_analysis(sub)) == 1

    cut = cut_along_edges(sub, sub.labeled_edges())
    info = analyze_triangles(sub, sub.tris)
    num_loops = len(topo.faces[fid].loops)
    fr.euler = info.euler
    fr.boundary_loops = info.boundary_loops
    fr.disk_after_cut = (
        len(cut) == 1
        and info.euler == 2 - num_loops
        and info.boundary_loops == num_loops
    )
    if not fr.connected:
        report.add(f"b-face {fid} is not connected")
    elif not fr.disk_after_cut:
        report.add(
            f"b-face {fid} cut along its labels has {len(cut)} "
            f"component(s), Euler characteristic {info.euler} and "
            f"{info.boundary_loops} boundary loop(s); expected 1, "
            f"{2 - num_loops} and {num_loops}"
        )

    # Boundary chain order
    unlabeled = 0
    for cycle in _boundary_cycles(sub):
        labels = [
            sub.edge_label(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1])
        ]
        unlabeled += sum(lbl is None for lbl in labels)
        fr.chains.append(list(_canonical_cycle(labels)))
    if unlabeled:
        report.add(f"b-face {fid} has {unlabeled} unlabeled boundary edges")
        return

    expected = sorted(
        _canonical_cycle([oe.edge for oe in lp.edges])
        for lp in topo.iter_face_loops(fid)
    )
    found = sorted(tuple(c) for c in fr.chains)
    if found != expected:
        report.add(
            f"Boundary chains of b-face {fid} are {found}, expected the "
            f"b-edge sequences {expected}"
        )


def _check_edge(report: TopologyReport, mesh: LabeledTriMesh, brep, eid):
    topo = brep.topology
    bedge = topo.edges[eid]
    edges = mesh.labeled_edges(eid)
    er = EdgeReport(num_edges=len(edges))
    report.edges[eid] = er
    if not edges:
        report.add(f"b-edge {eid} has no labeled mesh edges")
        return

    chains = label_chains(mesh, eid)
    if len(chains) != 1:
        report.add(f"b-edge {eid} is split into {len(chains)} chains")
        return

    chain = chains[0]
    er.closed = len(chain) > 2 and chain[0] == chain[-1]
    body = chain[:-1] if er.closed else chain
    inner = chain[1:-1]
    er.endpoints = (mesh.bvertex.get(chain[0]), mesh.bvertex.get(chain[-1]))
    er.simple = len(set(body)) == len(body) and all(
        v not in mesh.bvertex and mesh.bedge.get(v, (None,))[0] == eid
        for v in inner
    )
    if not er.simple:
        report.add(f"b-edge {eid} is not a simple chain")
    if sorted(er.endpoints, key=str) != sorted(
        (bedge.start, bedge.end), key=str
    ):
        report.add(
            f"b-edge {eid} ends in b-vertices {er.endpoints}, expected "
            f"{(bedge.start, bedge.end)}"
        )

    # Face adjacency, including the multiplicity of uses
    expected = topo.edge_faces(eid)
    for a, b in edges:
        found = Counter(mesh.tri_face[t] for t in mesh.edge_tris(a, b))
        if found != expected:
            report.add(
                f"Mesh edge {(a, b)} of b-edge {eid} is incident to b-faces "
                f"{dict(sorted(found.items()))}, expected "
                f"{dict(sorted(expected.items()))}"
            )
            break


def check_topology(mesh: LabeledTriMesh, brep: BRep) -> TopologyReport:
    """Verifies that the labeled mesh reproduces the topology of the B-Rep.

    Raises:
        LabelResolutionError: If labels do not name entities of the B-Rep
    """
    resolve_labels(mesh, brep)
    topo = brep.topology
    report = TopologyReport()

    for fid in topo.faces:
        _check_face(report, mesh, brep, fid)
    for eid in topo.edges:
        _check_edge(report, mesh, brep, eid)

    located = Counter(mesh.bvertex.values())
    for vid in topo.vertices:
        if located[vid] != 1:
            report.add(
                f"b-vertex {vid} is carried by {located[vid]} mesh vertices"
            )

    crossing = sorted(
        e
        for e, tids in mesh.edge_map().items()
        if mesh.edge_label(*e) is None
        and len({mesh.tri_face[t] for t in tids}) > 1
    )
    if crossing:
        report.add(
            f"{len(crossing)} unlabeled edges join different b-faces, e.g. "
            f"{crossing[0]}"
        )

    if report.ok:
        log.debug("%s", report)
    else:
        log.caution("%s", report)
    return report


# -----------------------------------------------------------------------------


def _sample_triangles(pts: np.ndarray, weights: np.ndarray, n: int, rng):
    """Area-weighted uniform samples; returns triangle indices and
    barycentric coordinates"""
    idx = rng.choice(len(pts), size=n, p=weights / weights.sum())
    r1, r2 = rng.random(n), rng.random(n)
    s = np.sqrt(r1)
    bary = np.stack([1.0 - s, s * (1.0 - r2), s * r2], axis=1)
    return idx, bary


def _unwrap(uv: np.ndarray, periodic) -> np.ndarray:
    uv = uv.copy()
    for d, p in enumerate(periodic):
        if p:
            uv[1:, d] -= np.round(uv[1:, d] - uv[0, d])
    return uv


def measure_deviation(
    mesh: LabeledTriMesh,
    brep: BRep,
    sample_count: int = 4096,
    *,
    seed: int = 0,
) -> Tuple[float, float]:
    """Two-sided sampled deviation between the mesh and the b-face
    surfaces.

    Mesh samples are projected onto the surface of their b-face. Surface
    samples are drawn from the parametric footprint of the mesh, i.e. the
    parameter triangles spanned by the projections of the mesh vertices,
    and measured against the whole mesh.

    Args:
        mesh (LabeledTriMesh): The labeled mesh
        brep (BRep): The B-Rep with the reference surfaces
        sample_count (int): Number of samples per direction; at least 1000
        seed (int): Seed of the sampling

    Returns:
        Tuple[float, float]: The maximum deviation and the same normalized
            by the model diagonal
    """
    if sample_count < MIN_DEVIATION_SAMPLES:
        raise ValueError(
            f"Need at least {MIN_DEVIATION_SAMPLES} deviation samples, got "
            f"{sample_count}"
        )
    rng = np.random.default_rng(seed)
    tids = sorted(mesh.tris)
    if not tids:
        return 0.0, 0.0

    tri_pts = np.array([mesh.tri_points(t) for t in tids])
    areas = 0.5 * np.linalg.norm(
        np.cross(tri_pts[:, 1] - tri_pts[:, 0], tri_pts[:, 2] - tri_pts[:, 0]),
        axis=1,
    )
    if not areas.sum() > 0.0:
        areas = np.ones(len(tids))

    # Mesh to surface, remembering parameters of the corners
    corner_uv: Dict[Tuple[int, int], Tuple[float, float]] = {}

    def project(face: int, v: int):
        if (face, v) not in corner_uv:
            u, w, _ = brep.surface(face).closest_point(mesh.positions[v])
            corner_uv[(face, v)] = (u, w)
        return corner_uv[(face, v)]

    max_dev = 0.0
    idx, bary = _sample_triangles(tri_pts, areas, sample_count, rng)
    for i, b in zip(idx, bary):
        tid = tids[i]
        face = mesh.tri_face[tid]
        tri = mesh.tris[tid]
        near = tri[int(np.argmax(b))]
        p = b @ tri_pts[i]
        _, _, d = brep.surface(face).closest_point(
            p, hint=project(face, near)
        )
        max_dev = max(max_dev, d)

    # Surface footprint to mesh
    locator = TriangleLocator(mesh)
    idx, bary = _sample_triangles(tri_pts, areas, sample_count, rng)
    for i, b in zip(idx, bary):
        tid = tids[i]
        face = mesh.tri_face[tid]
        surface = brep.surface(face)
        uv = _unwrap(
            np.array([project(face, v) for v in mesh.tris[tid]]),
            surface.periodic,
        )
        u, w = b @ uv
        if surface.periodic[0]:
            u %= 1.0
        if surface.periodic[1]:
            w %= 1.0
        max_dev = max(max_dev, locator.distance(surface.eval(u, w)))

    max_dev = float(max_dev)
    normalized = max_dev / brep.diagonal
    log.debug(
        "Sampled deviation: %.3g (%.3g of the diagonal).", max_dev, normalized
    )
    return max_dev, normalized


def mesh_statistics(mesh: LabeledTriMesh) -> dict:
    """Entity counts, Euler characteristic, boundary loops and the shape
    quality report of a mesh"""
    boundary = sorted(mesh.boundary_edges())
    return dict(
        vertices=mesh.num_vertices,
        edges=mesh.num_edges,
        triangles=mesh.num_triangles,
        euler_characteristic=mesh.euler_characteristic,
        boundary_loops=boundary_loop_count(boundary),
        components=len(component_analysis(mesh)),
        quality=quality_report(mesh),
    )

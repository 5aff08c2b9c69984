"""Embedding all loops of one b-face onto the mesh of its surface patch"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..brep import BRep
from ..cfg import GuardsConfig, HeuristicsConfig, SamplingBudget
from ..exceptions import (
    EmbeddingError,
    HeuristicRejected,
    LongTraceError,
    MeshOperationError,
    ResourceLimitError,
)
from ..mesh import cut_along_edges, enforce_simplicial_embedding, is_disk
from ..mesh.cutting import UnionFind, weld
from ..mesh.trimesh import LabeledTriMesh
from ..sampling import SampledCurve, mesh_patch
from .heuristics import (
    HeuristicStats,
    collapse_singular_sides,
    initial_refinement,
    periodic_rewire,
)
from .loops import (
    ManifoldLoop,
    MergeMap,
    preprocess_nonmanifold,
    shared_loops,
)
from .trace import (
    KEEP_COMPLEMENT,
    KEEP_DISK,
    TraceState,
    embed_loop,
    embed_loop_graph,
    trace_segment,
)

log = logging.getLogger(__name__)


# -----------------------------------------------------------------------------


@dataclass
class FaceEmbedding:
    """The mesh of one b-face with all of its loops embedded"""

    face: int
    mesh: LabeledTriMesh
    merge_map: MergeMap
    stats: HeuristicStats = field(default_factory=HeuristicStats)
    periodic: bool = False
    long_trace_retries: int = 0


def restore_disk(mesh: LabeledTriMesh) -> List[Tuple[int, int]]:
    """Cuts the mesh open along paths between its boundary components until
    it is a disk again.

    Each path connects the lowest-id vertices of the two boundary components
    with the lowest minimal vertex id, and is traced like a loop segment with
    the boundary forbidden.

    Returns:
        List[Tuple[int, int]]: ``(original, copy)`` pairs of the slit
            vertices, to be welded back once all loops are embedded

    Raises:
        EmbeddingError: If the result is not a disk
    """
    pairs = []
    while True:
        comps = _boundary_components(mesh)
        if len(comps) < 2:
            break
        s, e = min(comps[0]), min(comps[1])

        state = TraceState.start(mesh, tol=1e-12 * mesh.scale)
        state.s, state.e = s, e
        path = trace_segment(mesh, state).vertices
        cut = cut_along_edges(mesh, list(zip(path, path[1:])))
        pairs.extend((o, c) for c, o in sorted(cut.originals.items()))
        log.debug(
            "Restored disk via a path of %d edges from %d to %d.",
            len(path) - 1,
            s,
            e,
        )

    if not is_disk(mesh):
        raise EmbeddingError("Restoring the disk property failed")
    return pairs


def _boundary_components(mesh: LabeledTriMesh) -> List[List[int]]:
    boundary = mesh.boundary_edges()
    uf = UnionFind({v for e in boundary for v in e})
    for a, b in boundary:
        uf.union(a, b)
    return uf.groups()


def _check_vertex_copies(
    mesh: LabeledTriMesh, loops: Sequence[ManifoldLoop], merge_map: MergeMap
):
    """Every copy of a duplicated b-vertex ended up as a mesh vertex of its
    own, and no b-vertex was lost; the copies are merged again by label when
    the face meshes are stitched"""
    placed = Counter(mesh.bvertex.values())
    expected = merge_map.restored_counts(loops)["vertices"]
    if len(placed) != expected:
        raise EmbeddingError(
            f"Embedding placed {len(placed)} distinct b-vertices, expected "
            f"{expected}"
        )
    for b, count in sorted(placed.items()):
        copies = 1 + len(merge_map.duplicated_vertices.get(b, ()))
        if count != copies:
            raise EmbeddingError(
                f"B-vertex {b} has {count} mesh vertices but {copies} "
                "loop occurrence(s)"
            )


# -----------------------------------------------------------------------------


class _FaceEmbedder:
    """Runs the embedding of one face with a given set of heuristics"""

    def __init__(
        self,
        mesh: LabeledTriMesh,
        face_id: int,
        brep: BRep,
        curves: Dict[int, SampledCurve],
        *,
        heuristics: HeuristicsConfig,
        guards: GuardsConfig,
        budget: Optional[SamplingBudget],
        stats: HeuristicStats,
        long_trace_factor: Optional[float],
    ):
        self.mesh = mesh
        self.face = brep.topology.faces[face_id]
        self.brep = brep
        self.surface = brep.surface(face_id)
        self.curves = curves
        self.h = heuristics
        self.guards = guards
        self.budget = budget
        self.stats = stats
        self.long_trace_factor = long_trace_factor
        self.tol = guards.coincidence_tol * mesh.scale

    def attempt(self, name: str, func: Callable) -> bool:
        """Runs a heuristic; if it is rejected or fails, the mesh is reverted
        and the base algorithm takes over"""
        snapshot = self.mesh.snapshot_state()
        self.stats.attempt(name)
        try:
            func()
        except LongTraceError:
            raise
        except (HeuristicRejected, EmbeddingError, MeshOperationError) as err:
            self.mesh.restore_state(snapshot)
            self.stats.reject(name)
            log.caution(
                "Heuristic %s rejected on face %d: %s", name, self.face.id, err
            )
            return False
        self.stats.accept(name)
        return True

    def _loop_kwargs(self) -> dict:
        return dict(tol=self.tol, long_trace_factor=self.long_trace_factor)

    def run(self) -> FaceEmbedding:
        mesh, surface, h = self.mesh, self.surface, self.h
        topo = self.brep.topology
        face_edges = sorted(topo.face_edge_uses(self.face.id))

        if h.initial_refinement and self.budget is not None:
            self.attempt(
                "initial_refinement",
                lambda: initial_refinement(
                    mesh,
                    surface,
                    [self.brep.curve(E) for E in face_edges],
                    self.budget,
                    factor=self.guards.initial_refinement_factor,
                    min_samples=self.guards.initial_refinement_min_samples,
                ),
            )

        if h.singular_collapse and surface.singular_sides:
            self.attempt(
                "singular_collapse",
                lambda: collapse_singular_sides(mesh, surface),
            )

        loops, merge_map = preprocess_nonmanifold(self.face.loops, topo)

        if h.periodic_rewire and any(surface.periodic):
            ok = self.attempt("periodic_rewire", self._embed_periodic)
            if ok:
                return self._result(periodic=True)

        outer, inner = loops[0], loops[1:]
        if not (
            h.outer_loop_tracing
            and self.attempt(
                "outer_loop_tracing",
                lambda: embed_loop(
                    mesh,
                    outer,
                    self.curves,
                    KEEP_DISK,
                    boundary_tracing=True,
                    **self._loop_kwargs(),
                ),
            )
        ):
            embed_loop(
                mesh, outer, self.curves, KEEP_DISK, **self._loop_kwargs()
            )

        slits = []
        for loop in inner:
            if not is_disk(mesh):
                if h.optimistic_tracing and self.attempt(
                    "optimistic_tracing",
                    lambda: embed_loop(
                        mesh,
                        loop,
                        self.curves,
                        KEEP_COMPLEMENT,
                        optimistic=True,
                        **self._loop_kwargs(),
                    ),
                ):
                    continue
                slits.extend(restore_disk(mesh))
                self.stats.restore_disk_calls += 1

            embed_loop(
                mesh, loop, self.curves, KEEP_COMPLEMENT, **self._loop_kwargs()
            )

        if slits:
            weld(mesh, slits)
        _check_vertex_copies(mesh, loops, merge_map)
        return self._result(merge_map)

    def _embed_periodic(self):
        periodic_rewire(self.mesh, self.surface)
        enforce_simplicial_embedding(self.mesh, self.mesh.boundary_edges())
        embed_loop_graph(
            self.mesh,
            shared_loops(self.face.loops, self.brep.topology),
            self.curves,
            **self._loop_kwargs(),
        )

    def _result(
        self, merge_map: Optional[MergeMap] = None, *, periodic=False
    ):
        self.mesh.remove_unreferenced_vertices()
        return FaceEmbedding(
            face=self.face.id,
            mesh=self.mesh,
            merge_map=merge_map or MergeMap(),
            stats=self.stats,
            periodic=periodic,
        )


def embed_face(
    patch: LabeledTriMesh,
    face_id: int,
    brep: BRep,
    curves: Dict[int, SampledCurve],
    *,
    heuristics: Optional[HeuristicsConfig] = None,
    guards: Optional[GuardsConfig] = None,
    budget: Optional[SamplingBudget] = None,
) -> FaceEmbedding:
    """Embeds the outer and all inner loops of a b-face into its patch mesh.

    The outer loop keeps the disk it bounds; every inner loop removes the
    disk it bounds, after cutting the mesh back into a disk if needed. The
    mesh boundary then consists of labeled chains, one per oriented b-edge
    use of the face's loops.

    If the long-trace guard fires, the patch is remeshed with half the
    tolerance (requires ``budget``) and the face is embedded again; after
    the configured number of retries, the guard is switched off.

    Args:
        patch (LabeledTriMesh): The patch mesh, a disk; not modified
        face_id (int): The b-face to embed
        brep (BRep): The B-Rep the face belongs to
        curves (Dict[int, SampledCurve]): Endpoint-snapped samples of all
            b-edges of the face
        heuristics (HeuristicsConfig, optional): Heuristic switches; all on
            by default
        guards (GuardsConfig, optional): Guard constants
        budget (SamplingBudget, optional): Needed for initial refinement
            and for resampling the patch after long traces
    """
    heuristics = heuristics if heuristics is not None else HeuristicsConfig()
    guards = guards if guards is not None else GuardsConfig()
    stats = HeuristicStats()
    surface = brep.surface(face_id)

    retries = guards.long_trace_retries if heuristics.long_trace_guard else 0
    for attempt in range(retries + 1):
        guarded = attempt < retries
        if guarded:
            stats.attempt("long_trace_guard")
        embedder = _FaceEmbedder(
            patch.copy(),
            face_id,
            brep,
            curves,
            heuristics=heuristics,
            guards=guards,
            budget=budget,
            stats=stats,
            long_trace_factor=guards.long_trace_factor if guarded else None,
        )
        try:
            result = embedder.run()

        except LongTraceError as err:
            stats.reject("long_trace_guard")
            log.debug("Face %d, attempt %d: %s", face_id, attempt, err)
            if budget is None:
                continue
            try:
                patch = mesh_patch(
                    surface,
                    budget.refined(0.5 ** (attempt + 1)),
                    face=face_id,
                )
            except ResourceLimitError:
                log.debug("Resampling face %d hit the triangle cap.", face_id)
            continue

        if guarded:
            stats.accept("long_trace_guard")
        result.long_trace_retries = attempt
        log.debug(
            "Embedded face %d: %d triangles, heuristics %s.",
            face_id,
            result.mesh.num_triangles,
            {k: dict(v) for k, v in stats.counts.items() if v},
        )
        return result

    raise EmbeddingError(f"Embedding face {face_id} did not terminate")

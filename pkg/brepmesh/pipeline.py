"""Runs the five meshing stages on a B-Rep and assembles the run report.

The stages are: (1) sampling of curves and surface patches, (2) snapping of
the sampled curves onto the b-vertices, (3) embedding of the loops of every
face, (4) stitching of the face meshes and (5) remeshing. Stages 2 and 3 are
timed together as ``embedding``.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, TypeVar

from .benchmark import StageTimers
from .brep import BRep
from .cfg import PipelineConfig, make_remesh_config, make_sampling_budget
from .embedding import HeuristicStats, embed_face, snap_curve_endpoints
from .mesh import LabeledTriMesh, quality_report
from .remeshing import RemeshStats, remesh
from .sampling import SampledCurve, mesh_patch, sample_curve
from .stitching import conform_all, guard_refine, merge_all, snap_and_diffuse
from .validation import (
    TopologyReport,
    check_topology,
    measure_deviation,
    mesh_statistics,
)

log = logging.getLogger(__name__)

T = TypeVar("T")


# -----------------------------------------------------------------------------


@dataclass
class PipelineResult:
    """The outcome of :py:func:`run_pipeline`"""

    mesh: LabeledTriMesh
    report: dict
    topology: TopologyReport

    @property
    def ok(self) -> bool:
        return self.topology.ok


def _face_map(
    func: Callable[[int], T], faces: Iterable[int], *, threads: int
) -> Dict[int, T]:
    """Applies ``func`` to every face id; results are ordered by face id
    regardless of the order in which workers finish"""
    faces = sorted(faces)
    if threads <= 1 or len(faces) <= 1:
        return {face: func(face) for face in faces}

    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        return dict(zip(faces, pool.map(func, faces)))


def _face_curves(
    brep: BRep, face: int, curves: Dict[int, SampledCurve]
) -> Dict[int, SampledCurve]:
    return {E: curves[E] for E in sorted(brep.topology.face_edge_uses(face))}


# -----------------------------------------------------------------------------


def run_pipeline(
    brep: BRep, config: Optional[PipelineConfig] = None
) -> PipelineResult:
    """Meshes a B-Rep and verifies the result.

    Args:
        brep (BRep): The B-Rep to mesh; must pass
            :py:func:`~brepmesh.brep.validate_brep`
        config (PipelineConfig, optional): The run configuration; defaults
            are used if not given

    Returns:
        PipelineResult: The labeled mesh, the run report and the topology
            report. A topology discrepancy does not raise; it is reported.

    Raises:
        ResourceLimitError: If a patch exceeds the triangle cap or the run
            exceeds its time budget; the error names the face
    """
    config = config if config is not None else PipelineConfig()
    topo = brep.topology
    diagonal = brep.diagonal
    budget = make_sampling_budget(config, diagonal)
    timers = StageTimers(time_budget=config.limits.time_budget)
    threads = config.threads
    faces = sorted(topo.faces)

    log.progress(
        "Meshing %s with epsilon %.3g (%.3g of the diagonal) ...",
        brep,
        budget.epsilon,
        config.epsilon_fraction,
    )

    # Stage 1
    with timers.stage("sampling"):
        curves = {
            E: sample_curve(brep.curve(E), budget, bedge=E)
            for E in sorted(topo.edges)
        }

        def sample_face(face: int) -> LabeledTriMesh:
            timers.check_budget(face=face)
            return mesh_patch(brep.surface(face), budget, face=face)

        patches = _face_map(sample_face, faces, threads=threads)
        log.remark(
            "Sampled %d curves (%d points) and %d patches (%d triangles).",
            len(curves),
            sum(len(c) for c in curves.values()),
            len(patches),
            sum(p.num_triangles for p in patches.values()),
        )

    # Stages 2 and 3
    with timers.stage("embedding"):
        snapped = {}
        for E, sampled in curves.items():
            edge = topo.edges[E]
            snapped[E] = snap_curve_endpoints(
                sampled, brep.point(edge.start), brep.point(edge.end)
            )

        def embed(face: int):
            timers.check_budget(face=face)
            return embed_face(
                patches[face],
                face,
                brep,
                _face_curves(brep, face, snapped),
                heuristics=config.heuristics,
                guards=config.guards,
                budget=budget,
            )

        embeddings = _face_map(embed, faces, threads=threads)
        stats = HeuristicStats()
        for emb in embeddings.values():
            stats.merge(emb.stats)

    # Stage 4
    with timers.stage("stitching"):
        meshes = {face: emb.mesh for face, emb in embeddings.items()}

        def prepare(face: int) -> int:
            timers.check_budget(face=face)
            snap_and_diffuse(meshes[face], brep)
            return guard_refine(meshes[face], face=face)

        guard_splits = _face_map(prepare, faces, threads=threads)
        conform_splits = conform_all(meshes, brep)
        mesh = merge_all(
            meshes,
            topo,
            scale=diagonal,
            merge_tol=config.guards.merge_tol,
        )
        timers.check_budget()

    # Stage 5
    with timers.stage("remeshing"):
        quality_before = quality_report(mesh)
        remesh_stats = RemeshStats()
        remesh(
            mesh,
            brep,
            make_remesh_config(config, diagonal),
            stats=remesh_stats,
        )

    with timers.stage("validation"):
        topology = check_topology(mesh, brep)
        max_dev, normalized = measure_deviation(
            mesh, brep, sample_count=config.guards.deviation_samples
        )
        statistics = mesh_statistics(mesh)

    report = dict(
        input=dict(
            name=brep.name,
            units=brep.units,
            counts=dict(brep.counts),
            diagonal=float(diagonal),
        ),
        config=config.model_dump(),
        timings=timers.to_dict(),
        heuristics=stats.to_dict(),
        long_trace_retries={
            face: emb.long_trace_retries for face, emb in embeddings.items()
        },
        stitching=dict(
            guard_splits=sum(guard_splits.values()),
            conform_splits=conform_splits,
        ),
        remeshing=dict(
            remesh_stats.to_dict(),
            quality_before=dict(
                min=quality_before["min_quality"],
                mean=quality_before["mean_quality"],
            ),
        ),
        mesh=statistics,
        deviation=dict(
            max=float(max_dev),
            normalized=float(normalized),
            epsilon=float(budget.epsilon),
        ),
        topology=topology.to_dict(),
    )

    if topology.ok:
        log.success(
            "Meshed %s: %d triangles, deviation %.3g of the diagonal.",
            brep,
            mesh.num_triangles,
            normalized,
        )
    else:
        log.caution("Meshing %s did not preserve its topology.", brep)
    return PipelineResult(mesh=mesh, report=report, topology=topology)


def deterministic_report(report: dict) -> dict:
    """The report without the wall-clock timings, which are the only part
    that differs between two runs with the same input and configuration"""
    return {k: v for k, v in report.items() if k != "timings"}


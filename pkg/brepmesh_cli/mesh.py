"""Implements the ``brepmesh mesh`` command"""

import os

import click

from ._shared import HEURISTIC_NAMES, OPTIONS, add_options
from ._utils import (
    EXIT_INPUT,
    EXIT_RESOURCE_LIMIT,
    EXIT_TOPOLOGY,
    Echo,
    parse_update_dict,
)


@click.command(
    help=(
        "Meshes a B-Rep.\n"
        "\n"
        "Reads the ``.brep.txt`` document given by ``--input``, runs the "
        "meshing pipeline and writes the labeled mesh to ``--output`` (an "
        "``.obj`` file with a ``.labels.tsv`` sidecar).\n"
        "\n"
        "Exit codes: 0 on success, 2 for unreadable input or an invalid "
        "configuration, 3 if a resource limit was exceeded and 4 if the "
        "mesh does not preserve the topology of the B-Rep."
    ),
)
@click.option(
    "-i",
    "--input",
    "input_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="The B-Rep document to mesh.",
)
@click.option(
    "-o",
    "--output",
    "output_path",
    required=True,
    type=click.Path(dir_okay=False),
    help="Path of the ``.obj`` file to write.",
)
@add_options(OPTIONS["config"])
@add_options(OPTIONS["report"])
@click.option(
    "--timings/--no-timings",
    default=True,
    show_default=True,
    help=(
        "Whether the report contains the stage timings, the only part of it "
        "that differs between two runs on the same input."
    ),
)
def mesh(**kwargs):
    """Runs the meshing pipeline on a B-Rep document"""
    import brepmesh
    from brepmesh._yaml import write_yml
    from brepmesh.exceptions import (
        ConfigError,
        EmbeddingError,
        ParseError,
        ResourceLimitError,
        StitchingError,
    )
    from brepmesh.pipeline import deterministic_report

    _log = brepmesh._getLogger("brepmesh")

    try:
        update = parse_update_dict(
            **kwargs, heuristic_names=HEURISTIC_NAMES, _log=_log
        )
        cfg = brepmesh.get_pipeline_config(
            preset=kwargs["preset"], cfg_path=kwargs["cfg_path"], **update
        )
    except ConfigError as err:
        Echo.fail("Invalid configuration!", error=err, exit=EXIT_INPUT)

    try:
        doc = brepmesh.read_brep(kwargs["input_path"])
    except ParseError as err:
        Echo.fail(
            "Failed to read %s!",
            kwargs["input_path"],
            error=err,
            exit=EXIT_INPUT,
        )

    try:
        result = brepmesh.run_pipeline(doc.brep, cfg)
    except ResourceLimitError as err:
        where = "" if err.face is None else f" on face {err.face}"
        Echo.fail(
            "Resource limit exceeded%s!",
            where,
            error=err,
            exit=EXIT_RESOURCE_LIMIT,
        )
    except (EmbeddingError, StitchingError) as err:
        stage = "embedding" if isinstance(err, EmbeddingError) else "stitching"
        Echo.fail(
            "Meshing failed in the %s stage: %s: %s",
            stage,
            type(err).__name__,
            err,
            exit=EXIT_TOPOLOGY,
        )

    output_path = kwargs["output_path"]
    out_dir = os.path.dirname(os.path.abspath(output_path))
    os.makedirs(out_dir, exist_ok=True)
    obj_path, labels_path = brepmesh.write_labeled_mesh(
        result.mesh, output_path
    )
    Echo.remark("Wrote mesh to %s and labels to %s.", obj_path, labels_path)

    if kwargs["report_path"]:
        report = result.report
        if not kwargs["timings"]:
            report = deterministic_report(report)
        write_yml(report, path=kwargs["report_path"])
        Echo.remark("Wrote run report to %s.", kwargs["report_path"])

    stats = result.report["mesh"]
    deviation = result.report["deviation"]
    Echo.info(
        "%d vertices, %d triangles, Euler characteristic %d; deviation "
        "%.3g of the diagonal.",
        stats["vertices"],
        stats["triangles"],
        stats["euler_characteristic"],
        deviation["normalized"],
    )

    if not result.ok:
        Echo.fail(str(result.topology), exit=EXIT_TOPOLOGY)
    Echo.success(str(result.topology))

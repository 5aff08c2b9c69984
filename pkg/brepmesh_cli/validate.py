"""Implements the ``brepmesh validate`` command"""

import click

from ._shared import OPTIONS, add_options
from ._utils import EXIT_DISCREPANCY, EXIT_INPUT, Echo


@click.command(
    help=(
        "Checks that a labeled mesh has the topology of a B-Rep.\n"
        "\n"
        "``BREP`` is the ``.brep.txt`` document, ``MESH`` the ``.obj`` file "
        "whose ``.labels.tsv`` sidecar lies next to it. Exits with 0 if the "
        "topology is preserved, 1 if there are discrepancies and 2 if a file "
        "cannot be read or the mesh labels do not resolve against the B-Rep."
    ),
)
@click.argument("brep_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("mesh_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--deviation",
    "with_deviation",
    is_flag=True,
    help="Also measures the geometric deviation of the mesh.",
)
@add_options(OPTIONS["report"])
def validate(
    brep_path: str, mesh_path: str, with_deviation: bool, report_path: str
):
    """Validates a mesh against a B-Rep and prints the topology report"""
    import brepmesh
    from brepmesh._yaml import write_yml
    from brepmesh.exceptions import LabelResolutionError, ParseError
    from brepmesh.validation import mesh_statistics

    try:
        doc = brepmesh.read_brep(brep_path)
        mesh = brepmesh.read_labeled_mesh(mesh_path, brep=doc.brep)

    except (ParseError, LabelResolutionError, FileNotFoundError) as err:
        Echo.fail("Cannot validate %s!", mesh_path, error=err, exit=EXIT_INPUT)

    topology = brepmesh.check_topology(mesh, doc.brep)
    report = dict(mesh=mesh_statistics(mesh), topology=topology.to_dict())

    if with_deviation:
        max_dev, normalized = brepmesh.measure_deviation(mesh, doc.brep)
        report["deviation"] = dict(max=max_dev, normalized=normalized)
        Echo.info(
            "Deviation: %.3g (%.3g of the diagonal)", max_dev, normalized
        )

    if report_path:
        write_yml(report, path=report_path)
        Echo.remark("Wrote validation report to %s.", report_path)

    if not topology.ok:
        Echo.fail(str(topology), exit=EXIT_DISCREPANCY)
    Echo.success(str(topology))

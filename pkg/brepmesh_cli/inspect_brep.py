"""Implements the ``brepmesh inspect`` command"""

import click

from ._utils import EXIT_INPUT, Echo


@click.command(
    name="inspect",
    help=(
        "Shows the entity counts, the primitives and the validation "
        "diagnostics of a B-Rep document."
    ),
)
@click.argument("brep_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "-l",
    "--long",
    "long_mode",
    is_flag=True,
    help="Also list the faces with their surfaces and loops.",
)
def inspect_brep(brep_path: str, long_mode: bool):
    """Prints information about a B-Rep document"""
    import brepmesh
    from brepmesh.exceptions import ParseError

    try:
        doc = brepmesh.read_brep(brep_path)
    except ParseError as err:
        Echo.fail(
            "Invalid B-Rep document %s!",
            brep_path,
            error=err,
            exit=EXIT_INPUT,
        )

    brep = doc.brep
    topo = brep.topology
    Echo.info("B-Rep:     %s", doc.name or "(unnamed)")
    Echo.info("Units:     %s", doc.units)
    Echo.info(
        "Entities:  %s",
        ", ".join(f"{n} {k}" for k, n in topo.counts.items()),
    )
    Echo.info("Diagonal:  %.6g", brep.diagonal)

    if long_mode:
        Echo.info("")
        for fid, face in topo.faces.items():
            surface = brep.surface(fid)
            extras = []
            if any(surface.periodic):
                extras.append("periodic")
            if surface.singular_sides:
                extras.append(
                    "singular " + ", ".join(sorted(surface.singular_sides))
                )
            Echo.info(
                "Face %d: %s%s, %d inner loop(s), edges %s",
                fid,
                surface.kind,
                f" ({'; '.join(extras)})" if extras else "",
                len(face.inner),
                sorted(topo.face_edge_uses(fid)),
            )

    report = brepmesh.validate_brep(topo, brep.geometry)
    Echo.success("Diagnostics: %s", report)

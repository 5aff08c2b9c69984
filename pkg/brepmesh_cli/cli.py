"""Defines the brepmesh CLI"""

import click

from .fixtures import fixtures
from .inspect_brep import inspect_brep
from .mesh import mesh
from .validate import validate

SUBCOMMANDS = [
    mesh,
    validate,
    inspect_brep,
    fixtures,
]


def _set_log_level(ctx, _, value):
    if value is None:
        return None
    from brepmesh._logging import set_log_level

    try:
        set_log_level(value)
    except ValueError as err:
        raise click.BadParameter(str(err)) from err
    return value


def _set_verbosity(ctx, _, count: int):
    if count:
        from brepmesh._logging import set_log_level

        set_log_level("debug" if count > 1 else "info")
    return count


cli = click.Group(
    help=(
        "**brepmesh**: topology-preserving meshing of boundary "
        "representations\n\n"
        "Converts B-Reps into triangle meshes whose vertices, edges and "
        "triangles carry labels of the B-Rep entities they belong to. "
        "The topology of the mesh matches that of the B-Rep exactly, "
        "independent of the geometric tolerance."
    ),
    params=[
        click.Option(
            ["--log-level"],
            default=None,
            expose_value=False,
            is_eager=True,
            callback=_set_log_level,
            help=(
                "Sets the log level, e.g. debug, remark, info or warning. "
                "Overrides the BREPMESH_LOG environment variable."
            ),
        ),
        click.Option(
            ["-v", "--verbose"],
            count=True,
            expose_value=False,
            is_eager=True,
            callback=_set_verbosity,
            help="Increases the verbosity; -vv shows debug messages.",
        ),
    ],
)

for subcommand in SUBCOMMANDS:
    cli.add_command(subcommand)

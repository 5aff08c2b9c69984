"""Implements the ``brepmesh fixtures`` command"""

import click

from ._utils import Echo


@click.command(
    help=(
        "Writes the synthetic B-Rep fixtures to ``OUT_DIR``.\n"
        "\n"
        "Each fixture is written to ``<name>.brep.txt``. The output is "
        "deterministic: regenerating the fixtures gives identical files."
    ),
)
@click.argument("out_dir", required=False, type=click.Path(file_okay=False))
@click.option(
    "-n",
    "--name",
    "names",
    multiple=True,
    help="Only write the named fixture; repeat to select several.",
)
@click.option("--list", "list_only", is_flag=True, help="Only list names.")
def fixtures(out_dir: str, names: tuple, list_only: bool):
    """Writes fixture documents"""
    from brepmesh.fixtures import FIXTURES, write_fixtures

    if list_only:
        for name, func in FIXTURES.items():
            Echo.info("%-16s %s", name, func.__doc__.splitlines()[0])
        return
    if out_dir is None:
        raise click.UsageError("Missing argument 'OUT_DIR'.")

    unknown = [n for n in names if n not in FIXTURES]
    if unknown:
        raise click.BadParameter(
            f"Unknown fixture(s) {', '.join(unknown)}! Available: "
            f"{', '.join(FIXTURES)}",
            param_hint="--name",
        )

    paths = write_fixtures(out_dir, names=names or None)
    Echo.success("Wrote %d fixture(s) to %s.", len(paths), out_dir)

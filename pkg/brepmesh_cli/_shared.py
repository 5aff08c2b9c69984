"""Defines arguments that are shared across various parts of the CLI"""

from typing import Union

import click

# -----------------------------------------------------------------------------
# Variables
#
# NOTE These are duplicated rather than imported to save on brepmesh import
#      time; the tests make sure they stay in sync.

PRESET_NAMES = ("coarse", "default", "fine")
"""Names of the shipped configuration presets"""

HEURISTIC_NAMES = (
    "initial_refinement",
    "singular_collapse",
    "optimistic_tracing",
    "outer_loop_tracing",
    "periodic_rewire",
    "long_trace_guard",
)
"""Names of the switchable heuristics"""


# -----------------------------------------------------------------------------
# Shared options


def add_options(options):
    def _add_options(func):
        for option in reversed(options):
            func = option(func)
        return func

    return _add_options


def default_none(ctx, _, value) -> Union[None, tuple]:
    """For use in ``multiple=True`` with ``nargs=-1`` where None is desired
    for a default value instead of an empty tuple.
    Pass this to the ``callback`` argument of an argument or an option.
    """
    if len(value) == 0:
        return None
    return value


# .............................................................................

OPTIONS = dict()

# -- Configuration
OPTIONS["config"] = (
    click.option(
        "--preset",
        default="default",
        show_default=True,
        type=click.Choice(PRESET_NAMES),
        help="The configuration preset to start from.",
    ),
    click.option(
        "--cfg",
        "cfg_path",
        default=None,
        type=click.Path(exists=True, dir_okay=False),
        help=(
            "A YAML file with configuration entries; applied on top of the "
            "preset and below the options given here."
        ),
    ),
    click.option(
        "--epsilon-frac",
        default=None,
        type=click.FloatRange(min=0.0, min_open=True),
        help=(
            "The geometric tolerance, as a fraction of the bounding box "
            "diagonal. Affects the accuracy of the mesh, never its topology."
        ),
    ),
    click.option(
        "--target-edge-frac",
        "--target-edge",
        default=None,
        type=click.FloatRange(min=0.0, min_open=True),
        help=(
            "Target edge length of the remeshing stage, as a fraction of "
            "the bounding box diagonal; overrides the preset."
        ),
    ),
    click.option(
        "--max-edge-frac",
        default=None,
        type=click.FloatRange(min=0.0, min_open=True),
        help=(
            "Upper bound for the edge length of the initial patch meshes, as "
            "a fraction of the bounding box diagonal."
        ),
    ),
    click.option(
        "--no-heuristics",
        is_flag=True,
        help=(
            "Switches off all heuristics, running the base algorithm only. "
            "Individual --heuristic switches are applied afterwards."
        ),
    ),
    click.option(
        "--heuristic",
        multiple=True,
        callback=default_none,
        metavar="NAME=on|off",
        help=(
            "Switches a single heuristic on or off; repeat to switch several. "
            f"Available: {', '.join(HEURISTIC_NAMES)}"
        ),
    ),
    click.option(
        "--threads",
        default=None,
        type=click.IntRange(min=1),
        help=(
            "Number of threads used for face-level work. 1 runs the fully "
            "sequential reference path."
        ),
    ),
    click.option(
        "--set-params",
        "-p",
        multiple=True,
        callback=default_none,
        metavar="KEY=VALUE",
        help=(
            "Sets an entry of the pipeline configuration; keys can be dotted "
            "paths like ``remesh.max_passes=3``. Parsed after all other "
            "configuration options, such that they take precedence."
        ),
    ),
)

# -- Output
OPTIONS["report"] = (
    click.option(
        "--report",
        "report_path",
        default=None,
        type=click.Path(dir_okay=False, writable=True),
        help="Writes a YAML report to the given path.",
    ),
)

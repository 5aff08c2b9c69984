"""Various utilities used within the CLI definition and for handling click"""

import sys
from typing import Dict, Optional, Sequence

import click
from dantro.logging import getLogger

log = getLogger(__name__)

# -----------------------------------------------------------------------------
# Exit codes

EXIT_DISCREPANCY = 1
"""A validated mesh does not have the topology of its B-Rep"""

EXIT_INPUT = 2
"""An input could not be parsed, a configuration is invalid or mesh labels
do not resolve against the B-Rep"""

EXIT_RESOURCE_LIMIT = 3
"""A triangle cap or the time budget was exceeded"""

EXIT_TOPOLOGY = 4
"""The mesher produced a mesh with a topology discrepancy"""


# -----------------------------------------------------------------------------
# Communication via Terminal


def _parse_msg(msg: str, args) -> str:
    if args:
        return msg % args
    return msg


class Echo:
    """Adds some standardized styled ``click.echo`` calls.

    The styles are aligned with those set in the brepmesh logging module.
    """

    @staticmethod
    def remark(msg: str, *args, fg=246, **style):
        """An echo that communicates some low-level information"""
        click.secho(_parse_msg(msg, args), fg=fg, **style)

    @staticmethod
    def info(msg: str, *args, **style):
        click.secho(_parse_msg(msg, args), **style)

    @staticmethod
    def success(msg: str, *args, fg="green", bold=True, **style):
        click.secho(_parse_msg(msg, args), fg=fg, bold=bold, **style)

    @staticmethod
    def error(
        msg: str,
        *args,
        error: Exception = None,
        fg="red",
        bold=True,
        **style,
    ):
        """An echo that can be used to communicate an error, optionally
        parsing the exception's error msg as well.
        """
        click.secho(_parse_msg(msg, args), fg=fg, bold=bold, **style)
        if not error:
            return

        click.secho(
            f"{type(error).__name__}: {error}", fg=fg, bold=False, **style
        )

    @staticmethod
    def fail(msg: str, *args, exit: int, error: Exception = None):
        """Shows an error message and exits with the given code"""
        Echo.error(msg, *args, error=error)
        sys.exit(exit)


# -----------------------------------------------------------------------------
# Parsing of key-value pairs


def convert_value(val: str):
    """Attempts a number of conversions for a given string: booleans,
    ``null``, integers and floats; anything else stays a string"""
    if val.lower() in ("true", "false"):
        return bool(val.lower() == "true")

    if val.lower() in ("null", "none", "~"):
        return None

    try:
        return int(val)
    except ValueError:
        try:
            return float(val)
        except ValueError:
            pass

    return val


def set_entries_from_kv_pairs(
    *pairs, add_to: dict, _log=log, attempt_conversion: bool = True
) -> None:
    """Parses the given ``key=value`` pairs and adds them to the given dict.

    Keys may be dotted paths into nested entries, e.g. ``remesh.max_passes``.

    .. note::

        This happens directly on the ``add_to`` object, i.e. making use of the
        mutability of the given dict. This function has no return value!

    Raises:
        click.BadParameter: For pairs without ``=``
    """
    _log.remark(
        "Parsing %d key-value pair%s ...",
        len(pairs),
        "s" if len(pairs) != 1 else "",
    )

    for kv in pairs:
        if "=" not in kv:
            raise click.BadParameter(f"Expected a key=value pair, got '{kv}'")
        key, val = kv.split("=", 1)

        key_sequence = key.split(".")
        traverse_keys, last_key = key_sequence[:-1], key_sequence[-1]

        d = add_to
        for _key in traverse_keys:
            d = d.setdefault(_key, dict())

        if attempt_conversion:
            val = convert_value(val)

        _log.remark("  %s  \t->   %s: %s", kv, ".".join(key_sequence), val)
        d[last_key] = val


def parse_heuristic_switches(
    pairs: Sequence[str], *, names: Sequence[str]
) -> Dict[str, bool]:
    """Parses ``name=on|off`` pairs into heuristic switches.

    Raises:
        click.BadParameter: For unknown names or values
    """
    switches = dict()
    for pair in pairs:
        name, _, value = pair.partition("=")
        if name not in names:
            raise click.BadParameter(
                f"Unknown heuristic '{name}'! Available: {', '.join(names)}",
                param_hint="--heuristic",
            )
        if value not in ("on", "off"):
            raise click.BadParameter(
                f"Expected '{name}=on' or '{name}=off', got '{pair}'",
                param_hint="--heuristic",
            )
        switches[name] = value == "on"
    return switches


def parse_update_dict(
    *,
    epsilon_frac: Optional[float] = None,
    target_edge_frac: Optional[float] = None,
    max_edge_frac: Optional[float] = None,
    threads: Optional[int] = None,
    no_heuristics: bool = False,
    heuristic: Optional[Sequence[str]] = None,
    set_params: Optional[Sequence[str]] = None,
    heuristic_names: Sequence[str] = (),
    _log=log,
    **_,
) -> dict:
    """Assembles the configuration update from the command line options.

    ``--no-heuristics`` switches every heuristic off first; individual
    ``--heuristic`` switches and ``--set-params`` entries are applied on
    top, in that order.
    """
    update = dict()
    for key, val in (
        ("epsilon_fraction", epsilon_frac),
        ("target_edge_fraction", target_edge_frac),
        ("max_edge_fraction", max_edge_frac),
        ("threads", threads),
    ):
        if val is not None:
            update[key] = val

    heuristics = dict()
    if no_heuristics:
        heuristics.update({name: False for name in heuristic_names})
    heuristics.update(
        parse_heuristic_switches(heuristic or (), names=heuristic_names)
    )
    if heuristics:
        update["heuristics"] = heuristics

    if set_params:
        set_entries_from_kv_pairs(*set_params, add_to=update, _log=_log)

    return update

"""Sets up logging, based on dantro's logging features"""

import logging
import os

import coloredlogs as _coloredlogs
from dantro.logging import REMARK as _DEFAULT_LOG_LEVEL
from dantro.logging import getLogger as _getLogger

_log = _getLogger("brepmesh")
"""The brepmesh root logger"""

_DEFAULT_LOG_FORMAT = "%(levelname)-8s %(module)-16s  %(message)s"
"""The default logging format"""

LOG_LEVEL_ENV_VAR = "BREPMESH_LOG"
"""Name of the environment variable that controls the log level"""


def parse_log_level(level) -> int:
    """Turns a level name (case-insensitive) or an integer-like string into a
    numeric log level.

    Raises:
        ValueError: For names that are not registered logging levels
    """
    if isinstance(level, int):
        return level

    level = str(level).strip()
    if level.lstrip("-").isdigit():
        return int(level)

    value = logging.getLevelName(level.upper())
    if not isinstance(value, int):
        raise ValueError(
            f"Invalid log level '{level}'! Use a level name like 'debug', "
            "'remark', 'info', 'warning' or an integer."
        )
    return value


def set_log_level(level) -> None:
    """Sets the level of the brepmesh root logger and its colored handler"""
    level = parse_log_level(level)
    _log.setLevel(level)
    for handler in _log.handlers:
        handler.setLevel(level)


# Add colour logging to the root logger
# See API reference:  https://coloredlogs.readthedocs.io/en/latest/api.html
_coloredlogs.install(
    logger=_log,
    level=_DEFAULT_LOG_LEVEL,
    fmt=_DEFAULT_LOG_FORMAT,
    level_styles=dict(
        trace=dict(faint=True),
        debug=dict(faint=True),
        remark=dict(color=246),  # grey
        note=dict(color="cyan"),
        info=dict(bright=True),
        progress=dict(color="green"),
        caution=dict(color=202),  # orange
        hilight=dict(color="yellow", bold=True),
        success=dict(color="green", bold=True),
        warning=dict(color=202, bold=True),  # orange
        error=dict(color="red"),
        critical=dict(color="red", bold=True),
    ),
    field_styles=dict(
        levelname=dict(bold=True, faint=True), module=dict(faint=True)
    ),
)

if os.environ.get(LOG_LEVEL_ENV_VAR):
    try:
        set_log_level(os.environ[LOG_LEVEL_ENV_VAR])
    except ValueError as err:
        _log.warning("Ignoring %s: %s", LOG_LEVEL_ENV_VAR, err)

_log.debug("Logging configured.")

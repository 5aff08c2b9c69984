"""The brepmesh CLI"""

import dantro.logging

from .cli import cli

"""Test module for the `brepmesh_cli` package"""

from click.testing import CliRunner

from brepmesh_cli import cli

runner = CliRunner()
invoke_cli = lambda *a, **kw: runner.invoke(cli, *a, **kw)

FAST_ARGS = (
    "--epsilon-frac",
    "0.005",
    "--max-edge-frac",
    "0.05",
    "--target-edge-frac",
    "0.1",
)
"""Command line equivalent of the fast test configuration"""

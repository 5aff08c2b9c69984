"""Test utilities, fixtures, ..."""

import functools
import os
import pathlib
import shutil

import numpy as np
import pytest

import brepmesh
from brepmesh.cfg import HEURISTIC_NAMES
from brepmesh.fixtures import build_fixture
from brepmesh.mesh import LabeledTriMesh

from . import FAST_CFG, TEST_OUTPUT_DIR, USE_TEST_OUTPUT_DIR

# -----------------------------------------------------------------------------
# Output Directory


@pytest.fixture
def tmpdir_or_local_dir(tmpdir, request) -> pathlib.Path:
    """If ``USE_TEST_OUTPUT_DIR`` is False, returns a temporary directory;
    otherwise a test-specific local directory within ``TEST_OUTPUT_DIR`` is
    returned.
    """
    if not USE_TEST_OUTPUT_DIR:
        return tmpdir

    test_dir = os.path.join(
        TEST_OUTPUT_DIR,
        request.node.module.__name__,
        request.node.originalname,
    )

    print(f"Using local test output directory:\n  {test_dir}")
    if os.path.isdir(test_dir):
        shutil.rmtree(test_dir)
    os.makedirs(test_dir, exist_ok=True)
    return pathlib.Path(test_dir)


out_dir = tmpdir_or_local_dir
"""Alias for ``tmpdir_or_local_dir`` fixture"""


# -----------------------------------------------------------------------------
# B-Reps and pipeline runs


def fast_cfg(**update) -> brepmesh.PipelineConfig:
    """A pipeline configuration with coarse tolerances, for short runs"""
    return brepmesh.get_pipeline_config(**dict(FAST_CFG, **update))


@functools.lru_cache(maxsize=None)
def _cached_run(name: str, no_heuristics: bool):
    update = dict()
    if no_heuristics:
        update["heuristics"] = {k: False for k in HEURISTIC_NAMES}
    return brepmesh.run_pipeline(build_fixture(name).brep, fast_cfg(**update))


def meshed(name: str, *, no_heuristics: bool = False):
    """Runs the pipeline on a fixture with :py:func:`fast_cfg`; results are
    cached across tests, so they must not be mutated"""
    return _cached_run(name, no_heuristics)


@pytest.fixture
def cube():
    return build_fixture("cube").brep


@pytest.fixture
def plate_hole():
    return build_fixture("plate_hole").brep


@pytest.fixture
def sphere():
    return build_fixture("sphere").brep


# -----------------------------------------------------------------------------
# Meshes


def grid_mesh(n: int, *, face: int = 0) -> LabeledTriMesh:
    """The unit square split into ``n x n`` cells of two triangles each.

    Vertex ``(i, j)`` has id ``j * (n + 1) + i``, position ``(i/n, j/n, 0)``
    and the same parametric coordinates. Every cell is split along the
    diagonal from its lower left to its upper right corner.
    """
    s = np.linspace(0.0, 1.0, n + 1)
    uv = np.array([(x, y) for y in s for x in s])
    points = np.column_stack([uv, np.zeros(len(uv))])

    def vid(i, j):
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris += [(a, b, c), (a, c, d)]
    return LabeledTriMesh.from_arrays(points, tris, face=face, uv=uv)

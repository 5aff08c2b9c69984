"""Tests the synthetic B-Rep suite"""

import os

import pytest

from brepmesh.brep import validate_brep
from brepmesh.fixtures import (
    ACCEPTANCE_FIXTURES,
    FIXTURE_SUFFIX,
    FIXTURES,
    build_fixture,
    write_fixtures,
)
from brepmesh.formats import dumps_brep, read_brep

from ._fixtures import out_dir

# -----------------------------------------------------------------------------


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_are_valid(name):
    doc = build_fixture(name)
    assert doc.name == name
    assert validate_brep(doc.topology, doc.geometry).ok

    # Building is deterministic
    assert dumps_brep(build_fixture(name)) == dumps_brep(doc)


def test_fixture_counts():
    counts = {name: build_fixture(name).brep.counts for name in FIXTURES}

    assert counts["cube"] == dict(vertices=8, edges=12, loops=6, faces=6)
    assert counts["displaced_cube"] == counts["cube"]
    assert counts["cylinder"] == dict(vertices=2, edges=3, loops=3, faces=3)
    assert counts["sphere"] == dict(vertices=2, edges=1, loops=1, faces=1)
    assert counts["plate_hole"]["loops"] == 2
    assert counts["plate_two_holes"]["loops"] == 3
    assert counts["figure_eight"] == dict(
        vertices=5, edges=6, loops=1, faces=1
    )

    assert "nested_holes" not in ACCEPTANCE_FIXTURES
    assert len(ACCEPTANCE_FIXTURES) == 8


def test_displaced_cube():
    """One edge curve is moved off the faces it bounds"""
    cube = build_fixture("cube").brep
    displaced = build_fixture("displaced_cube").brep

    assert cube.topology.edges == displaced.topology.edges
    assert (cube.point(0) == displaced.point(0)).all()

    a, b = cube.curve(0).eval(0.5), displaced.curve(0).eval(0.5)
    offset = ((a - b) ** 2).sum() ** 0.5
    assert offset == pytest.approx(0.05 * cube.diagonal)


def test_write_fixtures(out_dir):
    paths = write_fixtures(str(out_dir), names=["cube", "sphere"])
    assert [os.path.basename(p) for p in paths] == [
        "cube" + FIXTURE_SUFFIX,
        "sphere" + FIXTURE_SUFFIX,
    ]
    assert read_brep(paths[1]).brep.counts["faces"] == 1

    # Regeneration is byte-identical
    with open(paths[0], "rb") as f:
        first = f.read()
    write_fixtures(str(out_dir), names=["cube"])
    with open(paths[0], "rb") as f:
        assert f.read() == first

    # All of them
    paths = write_fixtures(os.path.join(str(out_dir), "all"))
    assert len(paths) == len(FIXTURES)

    with pytest.raises(ValueError, match="No fixture named 'torus'"):
        build_fixture("torus")

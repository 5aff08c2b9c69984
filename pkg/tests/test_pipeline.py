"""Tests the full meshing pipeline on the synthetic B-Rep suite"""

import pytest

import brepmesh
from brepmesh.exceptions import ResourceLimitError
from brepmesh.fixtures import ACCEPTANCE_FIXTURES, FIXTURES, build_fixture
from brepmesh.formats import label_counts
from brepmesh.mesh import quality_report
from brepmesh.pipeline import _face_map, deterministic_report

from ._fixtures import fast_cfg, meshed

REPORT_KEYS = (
    "input",
    "config",
    "timings",
    "heuristics",
    "long_trace_retries",
    "stitching",
    "remeshing",
    "mesh",
    "deviation",
    "topology",
)

# -----------------------------------------------------------------------------


def test_face_map():
    assert _face_map(lambda f: f * f, [3, 1, 2], threads=1) == {
        1: 1,
        2: 4,
        3: 9,
    }

    # Result order does not depend on the threads
    res = _face_map(lambda f: -f, range(10, 0, -1), threads=4)
    assert list(res) == list(range(1, 11))
    assert res[7] == -7


@pytest.mark.parametrize("name", ACCEPTANCE_FIXTURES)
def test_topology_is_preserved(name):
    res = meshed(name)
    assert res.ok, str(res.topology)

    # Every entity is present in the output, and only once
    counts = build_fixture(name).brep.counts
    assert label_counts(res.mesh) == dict(
        faces=counts["faces"],
        edges=counts["edges"],
        vertices=counts["vertices"],
    )
    assert set(res.report) == set(REPORT_KEYS)
    assert res.report["topology"]["ok"] is True


@pytest.mark.parametrize("name", FIXTURES)
def test_heuristics_do_not_change_topology(name):
    """Heuristics fall back to the base algorithm whenever their
    validation fails, so their outcome is the same as without them"""
    with_h, without = meshed(name), meshed(name, no_heuristics=True)
    assert with_h.topology.signature() == without.topology.signature()

    # Disabled heuristics are never attempted
    for h, c in without.report["heuristics"].items():
        if h != "restore_disk_calls":
            assert c["attempted"] == 0


def test_rejected_heuristic_falls_back():
    res = meshed("nested_holes")
    counts = res.report["heuristics"]
    assert counts["optimistic_tracing"]["attempted"] >= 1
    assert counts["optimistic_tracing"]["rejected"] >= 1
    assert counts["restore_disk_calls"] >= 1

    # On a well-formed plate, the same heuristic is accepted
    counts = meshed("plate_two_holes").report["heuristics"]
    assert counts["optimistic_tracing"]["accepted"] >= 1


def test_closed_and_open_results():
    cube = meshed("cube")
    assert cube.report["mesh"]["euler_characteristic"] == 2
    assert cube.report["mesh"]["boundary_loops"] == 0
    assert cube.report["deviation"]["normalized"] <= 1e-9

    # The displaced edge does not influence the topology
    displaced = meshed("displaced_cube")
    assert displaced.ok
    assert displaced.topology.signature() == cube.topology.signature()

    plate = meshed("plate_hole")
    assert plate.report["mesh"]["boundary_loops"] == 2
    assert plate.topology.faces[0].boundary_loops == 2


def test_remeshing_contract():
    res = meshed("cylinder")
    rem = res.report["remeshing"]
    after = quality_report(res.mesh)
    assert after["mean_quality"] >= rem["quality_before"]["mean"] - 1e-12

    diag = res.report["input"]["diagonal"]
    for tid in res.mesh.tris:
        assert res.mesh.triangle_area(tid) >= 1e-14 * diag**2


# -----------------------------------------------------------------------------


def test_determinism():
    brep = build_fixture("plate_two_holes").brep
    first = brepmesh.run_pipeline(brep, fast_cfg())
    second = brepmesh.run_pipeline(brep, fast_cfg())

    assert deterministic_report(first.report) == deterministic_report(
        second.report
    )
    assert "timings" not in deterministic_report(first.report)
    assert first.mesh.tris == second.mesh.tris
    assert first.mesh.bedge == second.mesh.bedge

    # Face-level parallelism gives the same result
    threaded = brepmesh.run_pipeline(brep, fast_cfg(threads=2))
    assert threaded.mesh.tris == first.mesh.tris
    assert threaded.report["mesh"] == first.report["mesh"]
    assert threaded.report["topology"] == first.report["topology"]


@pytest.mark.parametrize("name", ["cylinder", "sphere"])
def test_tolerance_does_not_change_topology(name):
    brep = build_fixture(name).brep
    runs = [
        brepmesh.run_pipeline(brep, fast_cfg(epsilon_fraction=eps))
        for eps in (0.1, 0.01, 0.001)
    ]
    assert all(r.ok for r in runs)

    signatures = [r.topology.signature() for r in runs]
    assert all(s == signatures[0] for s in signatures)

    # Tighter tolerances never give a coarser approximation
    devs = [r.report["deviation"]["normalized"] for r in runs]
    for coarse, fine in zip(devs, devs[1:]):
        assert fine <= coarse + 1e-9


def test_resource_limits():
    brep = build_fixture("sphere").brep

    with pytest.raises(ResourceLimitError, match="cap of 10") as exc_info:
        brepmesh.run_pipeline(brep, fast_cfg(limits=dict(max_triangles=10)))
    assert exc_info.value.face == 0

    with pytest.raises(ResourceLimitError, match="Time budget"):
        brepmesh.run_pipeline(brep, fast_cfg(limits=dict(time_budget=1e-9)))


@pytest.mark.parametrize("preset", ["coarse", "default", "fine"])
@pytest.mark.parametrize("name", ACCEPTANCE_FIXTURES)
def test_presets_preserve_topology(name, preset):
    cfg = brepmesh.get_pipeline_config(
        preset=preset, epsilon_fraction=0.005, max_edge_fraction=0.05
    )
    res = brepmesh.run_pipeline(build_fixture(name).brep, cfg)
    assert res.ok, str(res.topology)
    assert res.topology.signature() == meshed(name).topology.signature()

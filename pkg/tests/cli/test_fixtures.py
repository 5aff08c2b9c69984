"""Tests the `brepmesh fixtures` subcommand"""

import os

from brepmesh.fixtures import FIXTURES

from . import invoke_cli

# -----------------------------------------------------------------------------


def test_fixtures(tmpdir):
    out_dir = str(tmpdir.join("suite"))
    res = invoke_cli(["fixtures", out_dir])
    assert res.exit_code == 0
    assert f"Wrote {len(FIXTURES)} fixture(s)" in res.output
    assert sorted(os.listdir(out_dir)) == sorted(
        f"{name}.brep.txt" for name in FIXTURES
    )

    # Regeneration gives identical files
    with open(os.path.join(out_dir, "sphere.brep.txt")) as f:
        sphere = f.read()
    res = invoke_cli(["fixtures", out_dir, "-n", "sphere"])
    assert res.exit_code == 0
    assert "Wrote 1 fixture(s)" in res.output
    with open(os.path.join(out_dir, "sphere.brep.txt")) as f:
        assert f.read() == sphere


def test_fixtures_list_and_errors(tmpdir):
    res = invoke_cli(["fixtures", "--list"])
    assert res.exit_code == 0
    for name in FIXTURES:
        assert name in res.output
    assert "A capped cylinder" in res.output

    res = invoke_cli(["fixtures"])
    assert res.exit_code == 2
    assert "OUT_DIR" in res.output

    res = invoke_cli(["fixtures", str(tmpdir), "-n", "cube", "-n", "torus"])
    assert res.exit_code == 2
    assert "Unknown fixture(s) torus" in res.output
    assert not os.listdir(str(tmpdir))

"""Tests the `brepmesh inspect` subcommand"""

from brepmesh.fixtures import write_fixtures

from . import invoke_cli

# -----------------------------------------------------------------------------


def test_inspect(tmpdir):
    (path,) = write_fixtures(str(tmpdir), names=["cylinder"])

    res = invoke_cli(["inspect", path])
    print(res.output)
    assert res.exit_code == 0
    assert "B-Rep:     cylinder" in res.output
    assert "2 vertices, 3 edges, 3 loops, 3 faces" in res.output
    assert "Diagnostics: No issues." in res.output
    assert "Face 0" not in res.output

    res = invoke_cli(["inspect", "--long", path])
    assert res.exit_code == 0
    assert "Face 0: cylinder (periodic), 0 inner loop(s), edges [0, 1, 2]" in (
        res.output
    )
    assert "Face 1: plane, 0 inner loop(s), edges [0]" in res.output


def test_inspect_errors(tmpdir):
    path = tmpdir.join("broken.brep.txt")
    path.write("format: brepmesh-brep\nformat_version: 1\nvertices: {}\n")

    res = invoke_cli(["inspect", str(path)])
    assert res.exit_code == 2
    assert "Invalid B-Rep document" in res.output

    res = invoke_cli(["inspect", str(tmpdir.join("missing.brep.txt"))])
    assert res.exit_code == 2

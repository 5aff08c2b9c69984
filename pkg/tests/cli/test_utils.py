"""Tests the CLI utilities and the shared option definitions"""

import logging

import click
import pytest
from dantro.logging import REMARK

import brepmesh.cfg
from brepmesh._logging import parse_log_level
from brepmesh_cli import _shared
from brepmesh_cli._utils import (
    convert_value,
    parse_heuristic_switches,
    parse_update_dict,
    set_entries_from_kv_pairs,
)

from . import invoke_cli

# -----------------------------------------------------------------------------


def test_shared_names_in_sync():
    assert _shared.PRESET_NAMES == brepmesh.cfg.PRESET_NAMES
    assert _shared.HEURISTIC_NAMES == brepmesh.cfg.HEURISTIC_NAMES


def test_set_entries_from_kv_pairs():
    d = dict()
    set_entries_from_kv_pairs(
        "preset=fine",
        "remesh.max_passes=3",
        "remesh.envelope_fraction=null",
        "limits.time_budget=1.5",
        "heuristics.periodic_rewire=false",
        "not_a_number=- 10",
        add_to=d,
    )

    assert d["preset"] == "fine"
    assert d["remesh"] == dict(max_passes=3, envelope_fraction=None)
    assert d["limits"]["time_budget"] == 1.5
    assert d["heuristics"]["periodic_rewire"] is False
    assert d["not_a_number"] == "- 10"

    # Without conversion, values stay strings
    d = dict()
    set_entries_from_kv_pairs("threads=2", add_to=d, attempt_conversion=False)
    assert d == dict(threads="2")

    with pytest.raises(click.BadParameter, match="key=value"):
        set_entries_from_kv_pairs("threads", add_to=d)


def test_convert_value():
    assert convert_value("True") is True
    assert convert_value("~") is None
    assert convert_value("12") == 12
    assert convert_value("-1.E10") == -1e10
    assert convert_value(".E10") == ".E10"
    assert convert_value("inf") == float("inf")


def test_parse_heuristic_switches():
    names = _shared.HEURISTIC_NAMES
    switches = parse_heuristic_switches(
        ["periodic_rewire=off", "initial_refinement=on"], names=names
    )
    assert switches == dict(periodic_rewire=False, initial_refinement=True)

    with pytest.raises(click.BadParameter, match="Unknown heuristic 'foo'"):
        parse_heuristic_switches(["foo=on"], names=names)
    with pytest.raises(click.BadParameter, match="periodic_rewire=off"):
        parse_heuristic_switches(["periodic_rewire=maybe"], names=names)


def test_parse_update_dict():
    names = _shared.HEURISTIC_NAMES
    assert parse_update_dict(heuristic_names=names) == dict()

    update = parse_update_dict(
        epsilon_frac=0.01,
        threads=2,
        no_heuristics=True,
        heuristic=["long_trace_guard=on"],
        set_params=["remesh.max_passes=2", "threads=3"],
        heuristic_names=names,
        preset="coarse",
    )
    assert update["epsilon_fraction"] == 0.01
    assert update["threads"] == 3
    assert update["remesh"] == dict(max_passes=2)
    assert update["heuristics"]["long_trace_guard"] is True
    assert not any(
        v for k, v in update["heuristics"].items() if k != "long_trace_guard"
    )
    assert len(update["heuristics"]) == len(names)


def test_cli_group():
    res = invoke_cli(["--help"])
    assert res.exit_code == 0
    for cmd in ("mesh", "validate", "inspect", "fixtures"):
        assert cmd in res.output

    res = invoke_cli(["--log-level", "not-a-level", "fixtures", "--list"])
    assert res.exit_code == 2


def test_parse_log_level():
    assert parse_log_level("remark") == REMARK
    assert parse_log_level("Debug") == logging.DEBUG
    assert parse_log_level("12") == 12
    assert parse_log_level(logging.INFO) == logging.INFO

    with pytest.raises(ValueError, match="Invalid log level 'loud'"):
        parse_log_level("loud")

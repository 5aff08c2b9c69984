"""Test the cfg module"""

import pytest

from brepmesh.cfg import (
    HEURISTIC_NAMES,
    PRESET_NAMES,
    HeuristicsConfig,
    PipelineConfig,
    assemble_cfg,
    get_pipeline_config,
    load_base_cfg,
    make_remesh_config,
    make_sampling_budget,
)
from brepmesh.exceptions import ConfigError

from . import get_cfg_fpath

# -----------------------------------------------------------------------------


def test_base_cfg():
    """The shipped defaults match the schema defaults"""
    base = load_base_cfg()
    assert set(base["presets"]) == set(PRESET_NAMES)
    assert set(base["heuristics"]) == set(HEURISTIC_NAMES)

    base.pop("presets")
    assert PipelineConfig(**base) == PipelineConfig()


@pytest.mark.parametrize(
    "preset, fraction", [("coarse", 0.25), ("default", 0.05), ("fine", 0.01)]
)
def test_presets(preset, fraction):
    cfg = get_pipeline_config(preset=preset)
    assert cfg.target_edge_fraction == fraction
    assert cfg.epsilon_fraction == 0.001
    assert all(getattr(cfg.heuristics, name) for name in HEURISTIC_NAMES)


def test_assemble_cfg():
    cfg = get_pipeline_config(
        preset="coarse",
        cfg_path=get_cfg_fpath("user_pipeline.yml"),
        heuristics=dict(long_trace_guard=False),
        epsilon_fraction=0.01,
    )

    # Preset, user file and update are applied in that order
    assert cfg.target_edge_fraction == 0.25
    assert cfg.epsilon_fraction == 0.01
    assert cfg.threads == 2
    assert cfg.remesh.max_passes == 3
    assert cfg.remesh.foldover_normal_dot == -0.5
    assert cfg.limits.time_budget == 120.0

    assert not cfg.heuristics.optimistic_tracing
    assert not cfg.heuristics.long_trace_guard
    assert cfg.heuristics.periodic_rewire

    # The plain dict is available as well and leaves the defaults untouched
    d = assemble_cfg(update=dict(threads=4))
    assert d["threads"] == 4
    assert "presets" not in d
    assert load_base_cfg()["threads"] == 1


def test_cfg_errors():
    with pytest.raises(ConfigError, match="Unknown preset 'medium'"):
        get_pipeline_config(preset="medium")

    with pytest.raises(ConfigError, match="Invalid pipeline configuration"):
        get_pipeline_config(cfg_path=get_cfg_fpath("invalid_pipeline.yml"))

    with pytest.raises(ConfigError, match="symmetric 7-point rule"):
        get_pipeline_config(quadrature_order=3)

    with pytest.raises(ConfigError, match="threads"):
        get_pipeline_config(threads=0)


def test_heuristics_config():
    off = HeuristicsConfig.all_off()
    assert not any(getattr(off, name) for name in HEURISTIC_NAMES)
    assert HeuristicsConfig().model_dump() == {
        name: True for name in HEURISTIC_NAMES
    }


def test_absolute_configs():
    cfg = get_pipeline_config(epsilon_fraction=0.002)

    budget = make_sampling_budget(cfg, 10.0)
    assert budget.epsilon == pytest.approx(0.02)
    assert budget.max_edge_length == pytest.approx(0.1)
    assert budget.refined().epsilon == pytest.approx(0.01)
    assert budget.refined(0.1).epsilon == pytest.approx(0.002)
    assert budget.epsilon == pytest.approx(0.02)

    # Without an explicit envelope, the sampling tolerance is used
    remesh = make_remesh_config(cfg, 10.0)
    assert remesh.target_edge_length == pytest.approx(0.5)
    assert remesh.envelope_eps == pytest.approx(0.02)
    assert remesh.max_passes == 5

    cfg = get_pipeline_config(remesh=dict(envelope_fraction=0.01))
    assert make_remesh_config(cfg, 2.0).envelope_eps == pytest.approx(0.02)


def test_guards_reach_stage_configs():
    cfg = get_pipeline_config()
    assert make_sampling_budget(cfg, 2.0).domain_padding == 1e-10
    assert make_remesh_config(cfg, 2.0).min_area_factor == 1e-14

    cfg = get_pipeline_config(
        guards=dict(domain_padding=1e-6, min_area_factor=1e-8)
    )
    assert make_sampling_budget(cfg, 2.0).domain_padding == 1e-6
    assert make_remesh_config(cfg, 2.0).min_area_factor == 1e-8

    with pytest.raises(ConfigError, match="domain_padding"):
        get_pipeline_config(guards=dict(domain_padding=-1.0))

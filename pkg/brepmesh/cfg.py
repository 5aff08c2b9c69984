"""Loads and validates the pipeline configuration.

The configuration is assembled in layers: the shipped defaults in
``cfg/base_cfg.yml``, a preset, an optional user configuration file, and
finally explicit updates (e.g. from the command line). The result is
validated into a :py:class:`PipelineConfig`.
"""

import copy
import logging
import os
from typing import Optional

import pydantic
from dantro.tools import recursive_update

from ._yaml import load_yml
from .exceptions import ConfigError

log = logging.getLogger(__name__)

BASE_CFG_PATH = os.path.join(os.path.dirname(__file__), "cfg/base_cfg.yml")
"""Path to the shipped default configuration"""

PRESET_NAMES = ("coarse", "default", "fine")
"""Names of the shipped presets"""

HEURISTIC_NAMES = (
    "initial_refinement",
    "singular_collapse",
    "optimistic_tracing",
    "outer_loop_tracing",
    "periodic_rewire",
    "long_trace_guard",
)
"""Names of the switchable heuristics"""


# -----------------------------------------------------------------------------


class BaseSchema(pydantic.BaseModel):
    """A base schema that forbids extra keys and validates defaults as well
    as assignments"""

    model_config = dict(
        extra="forbid",
        validate_default=True,
        validate_assignment=True,
    )


class HeuristicsConfig(BaseSchema):
    """Switches for the individual heuristics; all on by default"""

    initial_refinement: bool = True
    singular_collapse: bool = True
    optimistic_tracing: bool = True
    outer_loop_tracing: bool = True
    periodic_rewire: bool = True
    long_trace_guard: bool = True

    @classmethod
    def all_off(cls) -> "HeuristicsConfig":
        return cls(**{name: False for name in HEURISTIC_NAMES})


class RemeshSettings(BaseSchema):
    """Remeshing settings as fractions; see :py:class:`RemeshConfig` for the
    absolute counterpart"""

    max_passes: int = pydantic.Field(5, ge=0)
    foldover_normal_dot: float = pydantic.Field(-0.5, ge=-1.0, le=1.0)
    enable_smoothing: bool = True
    envelope_fraction: Optional[float] = pydantic.Field(None, gt=0.0)


class LimitsConfig(BaseSchema):
    max_triangles: int = pydantic.Field(10_000_000, gt=0)
    time_budget: Optional[float] = pydantic.Field(None, gt=0.0)


class GuardsConfig(BaseSchema):
    """Guard constants; relative values are scaled by the model diagonal"""

    coincidence_tol: float = pydantic.Field(1e-12, gt=0.0)
    merge_tol: float = pydantic.Field(1e-9, gt=0.0)
    domain_padding: float = pydantic.Field(1e-10, ge=0.0)
    min_area_factor: float = pydantic.Field(1e-14, ge=0.0)
    long_trace_factor: float = pydantic.Field(100.0, gt=1.0)
    long_trace_retries: int = pydantic.Field(4, ge=0)
    initial_refinement_factor: float = pydantic.Field(0.01, gt=0.0)
    initial_refinement_min_samples: int = pydantic.Field(10, ge=2)
    deviation_samples: int = pydantic.Field(4096, ge=1000)


class PipelineConfig(BaseSchema):
    """The full, validated configuration of a meshing run"""

    epsilon_fraction: float = pydantic.Field(0.001, gt=0.0)
    target_edge_fraction: float = pydantic.Field(0.05, gt=0.0)
    max_edge_fraction: float = pydantic.Field(0.01, gt=0.0)
    quadrature_order: int = 5
    threads: int = pydantic.Field(1, ge=1)

    heuristics: HeuristicsConfig = HeuristicsConfig()
    remesh: RemeshSettings = RemeshSettings()
    limits: LimitsConfig = LimitsConfig()
    guards: GuardsConfig = GuardsConfig()

    @pydantic.field_validator("quadrature_order")
    @classmethod
    def _check_quadrature_order(cls, v: int) -> int:
        if v != 5:
            raise ValueError(
                "Only the symmetric 7-point rule of order 5 is available"
            )
        return v


class SamplingBudget(BaseSchema):
    """Absolute sampling tolerances of stage 1"""

    epsilon: float = pydantic.Field(gt=0.0)
    max_edge_fraction: float = pydantic.Field(gt=0.0)
    diagonal: float = pydantic.Field(gt=0.0)
    quadrature_order: int = 5
    max_triangles: int = 10_000_000
    domain_padding: float = pydantic.Field(1e-10, ge=0.0)

    @property
    def max_edge_length(self) -> float:
        return self.max_edge_fraction * self.diagonal

    def refined(self, factor: float = 0.5) -> "SamplingBudget":
        """A copy with the tolerance scaled by ``factor``"""
        return self.model_copy(update=dict(epsilon=self.epsilon * factor))


class RemeshConfig(BaseSchema):
    """Absolute settings of the remeshing stage"""

    target_edge_length: float = pydantic.Field(gt=0.0)
    envelope_eps: float = pydantic.Field(gt=0.0)
    max_passes: int = pydantic.Field(5, ge=0)
    foldover_normal_dot: float = -0.5
    enable_smoothing: bool = True
    min_area_factor: float = pydantic.Field(1e-14, ge=0.0)


# -----------------------------------------------------------------------------


def load_base_cfg() -> dict:
    """Loads the shipped default configuration, including presets"""
    return load_yml(BASE_CFG_PATH)


def assemble_cfg(
    *,
    preset: str = "default",
    cfg_path: Optional[str] = None,
    update: Optional[dict] = None,
) -> dict:
    """Assembles the configuration dict from defaults, preset, user file
    and explicit update, in that order"""
    base = load_base_cfg()
    presets = base.pop("presets")

    if preset not in presets:
        raise ConfigError(
            f"Unknown preset '{preset}'! Available: {', '.join(presets)}"
        )
    cfg = recursive_update(base, copy.deepcopy(presets[preset]))

    if cfg_path is not None:
        user_cfg = load_yml(cfg_path) or {}
        log.remark("Applying user configuration from %s ...", cfg_path)
        cfg = recursive_update(cfg, user_cfg)

    if update:
        cfg = recursive_update(cfg, copy.deepcopy(update))

    return cfg


def get_pipeline_config(
    *,
    preset: str = "default",
    cfg_path: Optional[str] = None,
    **update,
) -> PipelineConfig:
    """Assembles and validates a :py:class:`PipelineConfig`.

    Args:
        preset (str): Name of the preset to start from
        cfg_path (str, optional): Path to a user YAML configuration file
        **update: Recursive updates applied last

    Raises:
        ConfigError: If the assembled configuration is invalid
    """
    cfg = assemble_cfg(preset=preset, cfg_path=cfg_path, update=update)
    try:
        return PipelineConfig(**cfg)

    except pydantic.ValidationError as err:
        raise ConfigError(
            f"Invalid pipeline configuration!\n{err}"
        ) from err


def make_sampling_budget(
    cfg: PipelineConfig, diagonal: float
) -> SamplingBudget:
    return SamplingBudget(
        epsilon=cfg.epsilon_fraction * diagonal,
        max_edge_fraction=cfg.max_edge_fraction,
        diagonal=diagonal,
        quadrature_order=cfg.quadrature_order,
        max_triangles=cfg.limits.max_triangles,
        domain_padding=cfg.guards.domain_padding,
    )


def make_remesh_config(cfg: PipelineConfig, diagonal: float) -> RemeshConfig:
    envelope = cfg.remesh.envelope_fraction
    if envelope is None:
        envelope = cfg.epsilon_fraction
    return RemeshConfig(
        target_edge_length=cfg.target_edge_fraction * diagonal,
        envelope_eps=envelope * diagonal,
        max_passes=cfg.remesh.max_passes,
        foldover_normal_dot=cfg.remesh.foldover_normal_dot,
        enable_smoothing=cfg.remesh.enable_smoothing,
        min_area_factor=cfg.guards.min_area_factor,
    )

"""Pipeline configuration: one JSON file, strict keys, explicit seeds."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .kernel import Aabb


@dataclass
class PathsConfig:
    seeds: str = None
    donors: str = None


@dataclass
class KernelConfig:
    resolution: int = 128
    domain_half: float = 110.0

    def domain(self) -> Aabb:
        return Aabb.cube(self.domain_half)


@dataclass
class PenaltySection:
    invalid_penalty: float = 1e6
    size_min: float = 60.0
    size_max: float = 200.0
    cube_half: float = 100.0
    w_size: float = 1.0
    w_cube: float = 1.0
    w_novelty: float = 1.0
    epsilon: float = 0.05


@dataclass
class EvolveSection:
    parents_k: int = 3
    children_k: int = 4
    neighbors_m: int = 3
    repairs: int = 2
    budget: int = 50
    acceptance_floor: float = 0.05
    floor_window: int = 20


@dataclass
class SampleSection:
    n_samples: int = 15
    budget: int = 5000
    resolution: int = 64


@dataclass
class MetricsSection:
    points: int = 8192
    iou_resolution: int = 64


@dataclass
class RenderSection:
    views: int = 8
    near_bright: bool = True


@dataclass
class SeedsSection:
    evolve: int = 0
    sample: int = 0
    augment: int = 0
    metrics: int = 0


@dataclass
class ProposerSection:
    kind: str = "mock"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "CADFORGE_API_KEY"
    timeout: float = 60.0
    mock_invalid_every: int = 0


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    penalty: PenaltySection = field(default_factory=PenaltySection)
    evolve: EvolveSection = field(default_factory=EvolveSection)
    sample: SampleSection = field(default_factory=SampleSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    render: RenderSection = field(default_factory=RenderSection)
    seeds: SeedsSection = field(default_factory=SeedsSection)
    proposer: ProposerSection = field(default_factory=ProposerSection)


_SECTIONS = {f.name: f.type for f in fields(PipelineConfig)}


def _load_section(cls, data: dict, prefix: str):
    known = {f.name: f for f in fields(cls)}
    out = cls()
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {prefix}.{key}")
        setattr(out, key, value)
    return out


def load_config(path) -> PipelineConfig:
    """Parse and validate a JSON config; unknown keys are rejected with
    their dotted paths."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    cfg = PipelineConfig()
    classes = {
        "paths": PathsConfig, "kernel": KernelConfig, "penalty": PenaltySection,
        "evolve": EvolveSection, "sample": SampleSection,
        "metrics": MetricsSection, "render": RenderSection,
        "seeds": SeedsSection, "proposer": ProposerSection,
    }
    for key, value in data.items():
        if key not in classes:
            raise ConfigError(f"unknown config key {key}")
        if not isinstance(value, dict):
            raise ConfigError(f"config section {key} must be an object")
        setattr(cfg, key, _load_section(classes[key], value, key))
    if cfg.render.views not in (7, 8):
        raise ConfigError("render.views must be 7 or 8")
    return cfg

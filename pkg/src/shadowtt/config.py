"""Experiment configuration: one JSON document drives every CLI command.

The schema round-trips losslessly through ``to_dict`` / ``from_dict``;
unknown keys are rejected so typos fail fast.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from shadowtt.mle import MLEConfig

MODEL_KINDS = ("heisenberg-1d", "tfim-1d", "random-mps")


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown {where} keys: {sorted(extra)}")


@dataclass
class ModelConfig:
    kind: str
    n: int
    periodic: bool = True
    J: float = 1.0
    h: float = 1.0
    bond: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}")
        if self.n < 2:
            raise ValueError("n must be >= 2")


@dataclass
class ShadowConfig:
    count: int
    w_groups: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 1 or self.w_groups < 1 or self.count % self.w_groups:
            raise ValueError("count must be a positive multiple of w_groups")


@dataclass
class SketchConfig:
    family: str = "random-window"
    r_tilde: int | list[int] = 8
    window: int = 2
    seed: int = 0
    ranks: list[int] | None = None
    rank_threshold: float = 1e-2
    median_of_means: bool = False

    def __post_init__(self) -> None:
        if self.family not in ("random-window", "two-local"):
            raise ValueError("sketch family must be 'random-window' or 'two-local'")


@dataclass
class EvalConfig:
    observables: list[str] = field(default_factory=list)
    renyi_subsystems: str | list[list[int]] = "none"


@dataclass
class ScalingConfig:
    counts: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.counts or not self.seeds:
            raise ValueError("scaling needs at least one count and one seed")


@dataclass
class ExperimentConfig:
    model: ModelConfig
    shadow: ShadowConfig | None = None
    sketch: SketchConfig | None = None
    mle: MLEConfig | None = None
    evaluation: EvalConfig | None = None
    scaling: ScalingConfig | None = None

    def to_dict(self) -> dict:
        out = {"model": asdict(self.model)}
        for name in ("shadow", "sketch", "mle", "evaluation", "scaling"):
            value = getattr(self, name)
            if value is not None:
                out[name] = asdict(value)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        _check_keys(obj, {"model", "shadow", "sketch", "mle", "evaluation", "scaling"}, "config")
        sections = {
            "model": ModelConfig,
            "shadow": ShadowConfig,
            "sketch": SketchConfig,
            "mle": MLEConfig,
            "evaluation": EvalConfig,
            "scaling": ScalingConfig,
        }
        kwargs = {}
        for name, klass in sections.items():
            if name in obj:
                _check_keys(obj[name], {f.name for f in klass.__dataclass_fields__.values()}, name)
                kwargs[name] = klass(**obj[name])
        if "model" not in kwargs:
            raise ValueError("config needs a model section")
        return cls(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")

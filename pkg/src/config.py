"""
Configuration models for selectors, the selection loop and experiments.
"""

import math
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .schemas import DuvParams

SelectorName = Literal["RD", "AE", "IF", "TE", "LSTM"]
SELECTOR_NAMES: tuple[str, ...] = ("RD", "AE", "IF", "TE", "LSTM")
DEFAULT_GOALS = (90.0, 95.0, 97.0)
HIGH_GOALS = (95.0, 97.0, 98.0, 98.5, 99.0)


def _halves(big: int, small: int) -> bool:
    return small in (big // 2, -(-big // 2))


def proportional(widths: list[int]) -> bool:
    """Each width is 1x, 2x or 1/2x its predecessor (halving may round either way)."""
    return all(cur == prev or _halves(prev, cur) or _halves(cur, prev) for prev, cur in zip(widths, widths[1:]))


class ModelHyper(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    d_model: int = Field(32, ge=1)
    heads: int = Field(2, ge=1)
    enc_layers: int = Field(2, ge=1)
    ffn_dim: int = Field(64, ge=1)
    lstm_hidden: Optional[int] = Field(None, ge=1, description="None: ceil(F/2)")
    ae_hidden: Optional[tuple[int, ...]] = Field(None, description="None: [2d, d, ceil(d/2)] of the AE input width d")
    epochs: int = Field(20, ge=1)
    batch: int = Field(256, ge=1)
    lr: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    dropout: float = Field(0.1, ge=0, lt=1)
    use_dropout: bool = True
    trees: int = Field(100, ge=1)
    subsample: int = Field(256, ge=2)

    @model_validator(mode="after")
    def check_shapes(self) -> "ModelHyper":
        if self.d_model % self.heads:
            raise ValueError(f"d_model={self.d_model} is not divisible by heads={self.heads}")
        if self.ae_hidden is not None and (not self.ae_hidden or not proportional(list(self.ae_hidden))):
            raise ValueError(f"ae_hidden {self.ae_hidden} breaks the 2x / 1/2x / 1x layer rule")
        return self

    def lstm_width(self, features: int) -> int:
        return self.lstm_hidden or math.ceil(features / 2)

    def ae_widths(self, d_in: int) -> list[int]:
        """Hidden widths of the flat AE, encoder then mirrored decoder."""
        encoder = list(self.ae_hidden) if self.ae_hidden else [2 * d_in, d_in, math.ceil(d_in / 2)]
        return encoder + encoder[-2::-1]


class LoopConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    warmup_n: int = Field(50, ge=1)
    batch: int = Field(100, ge=1)
    goal_percent: tuple[float, ...] = DEFAULT_GOALS
    seed: int = 0
    selector: SelectorName = "LSTM"
    hyper: ModelHyper = ModelHyper()
    window: Optional[int] = Field(None, ge=1, description="None: pipeline depth D")
    step: Optional[int] = Field(None, ge=1, description="None: window size")
    granularity: Literal["fine", "coarse"] = "fine"
    fit_once: bool = Field(False, description="freeze the standardizer after warm-up")
    exhaust: bool = Field(False, description="keep selecting after the last goal")
    progress: bool = False

    @field_validator("goal_percent")
    @classmethod
    def check_goals(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        return _check_goals(v)


def _check_goals(goals: tuple[float, ...]) -> tuple[float, ...]:
    if not goals:
        raise ValueError("at least one goal is required")
    if any(not 0 < g <= 100 for g in goals):
        raise ValueError(f"goals must lie in (0, 100], got {goals}")
    if any(b <= a for a, b in zip(goals, goals[1:])):
        raise ValueError(f"goals must be strictly increasing, got {goals}")
    return tuple(float(g) for g in goals)


class CorpusSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = Field(None, description="load this JSONL corpus instead of generating")
    seed: int = 1
    n_tests: int = Field(2000, ge=1)
    mix: dict[str, float] = {"UNIFORM": 0.78, "BURSTY": 0.11, "SPARSE_PACING": 0.11}
    len_range: tuple[int, int] = (60, 100)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    methods: tuple[SelectorName, ...] = SELECTOR_NAMES
    repeats: int = Field(10, ge=1)
    seed: int = 0
    seeds: Optional[tuple[int, ...]] = None
    corpus: CorpusSpec = CorpusSpec()
    duv: DuvParams = DuvParams()
    loop: LoopConfig = LoopConfig()
    per_test_sim_minutes: float = Field(12.0, ge=0)
    goals: Union[Literal["high"], tuple[float, ...]] = DEFAULT_GOALS

    @field_validator("goals")
    @classmethod
    def check_goals(cls, v):
        if v == "high":
            return HIGH_GOALS
        return _check_goals(v)

    @field_validator("methods")
    @classmethod
    def check_methods(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        if not v:
            raise ValueError("at least one method is required")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate methods in {v}")
        return v

    @model_validator(mode="after")
    def check_seeds(self) -> "ExperimentConfig":
        if self.seeds is not None and len(self.seeds) != self.repeats:
            raise ValueError(f"{len(self.seeds)} seeds given for repeats={self.repeats}")
        return self

    def run_seeds(self) -> list[int]:
        return list(self.seeds) if self.seeds is not None else [self.seed + i for i in range(self.repeats)]


class CliConfig(BaseModel):
    """Flags that survive into the echoed config of a CLI run."""

    model_config = ConfigDict(extra="forbid")

    command: Literal["gen", "sim", "select", "exp", "report"]
    config_path: Optional[str] = None
    out: Optional[str] = None
    jobs: int = Field(1, ge=1)
    seed: Optional[int] = None
    log_level: str = "INFO"
    args: dict[str, Any] = {}

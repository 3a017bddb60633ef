"""
Domain schemas: bus transactions, tests, generation profiles and DUV parameters.
"""

import math
from typing import ClassVar, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TTYPES = ("READ", "WRITE")
BURST_KINDS = ("SINGLE", "INCR", "WRAP")
PRIORITIES = ("LOW", "HIGH")
WIDTHS = (1, 2, 4, 8)
WRAP_LENGTHS = (2, 4, 8)
MAX_GAP = 7

CATEGORICAL_FIELDS = ("ttype", "master", "slave", "burst_kind", "priority")
WAIT_FIELDS = ("w1", "w2", "w3", "w4")
NUMERIC_FIELDS = ("burst_len", "addr", "gap", *WAIT_FIELDS, "data", "tag", "width")

ProfileName = Literal["UNIFORM", "BURSTY", "SPARSE_PACING"]
PROFILE_NAMES: tuple[str, ...] = ("UNIFORM", "BURSTY", "SPARSE_PACING")
# Короткие имена для CLI: --mix uniform=0.78,bursty=0.11,sparse=0.11
PROFILE_ALIASES = {"uniform": "UNIFORM", "bursty": "BURSTY", "sparse": "SPARSE_PACING"}


class DuvParams(BaseModel):
    """Parameters of the MiniSRI crossbar model."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    M: int = Field(4, ge=1, description="master count")
    S: int = Field(4, ge=1, description="slave count")
    D: int = Field(3, ge=1, description="pipeline depth per slave")
    W: int = Field(3, ge=1, description="max per-beat wait cycles")
    B: int = Field(8, ge=1, description="max burst length")

    def wrap_lengths(self) -> tuple[int, ...]:
        return tuple(n for n in WRAP_LENGTHS if n <= self.B)


class Transaction(BaseModel):
    """One bus stimulus: 5 categorical and 10 numeric attributes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    ttype: Literal["READ", "WRITE"]
    master: int = Field(ge=0)
    slave: int = Field(ge=0)
    burst_kind: Literal["SINGLE", "INCR", "WRAP"]
    priority: Literal["LOW", "HIGH"]
    burst_len: int = Field(ge=1)
    addr: int = Field(ge=0, le=65535)
    gap: int = Field(ge=0, le=MAX_GAP)
    w1: int = Field(ge=0)
    w2: int = Field(ge=0)
    w3: int = Field(ge=0)
    w4: int = Field(ge=0)
    data: int = Field(ge=0, le=255)
    tag: int = Field(ge=0, le=15)
    width: Literal[1, 2, 4, 8]

    @model_validator(mode="after")
    def check_burst(self) -> "Transaction":
        if self.burst_kind == "SINGLE" and self.burst_len != 1:
            raise ValueError(f"SINGLE burst must have burst_len 1, got {self.burst_len}")
        if self.burst_kind == "WRAP" and self.burst_len not in WRAP_LENGTHS:
            raise ValueError(f"WRAP burst must have burst_len in {WRAP_LENGTHS}, got {self.burst_len}")
        return self

    @property
    def waits(self) -> tuple[int, int, int, int]:
        return (self.w1, self.w2, self.w3, self.w4)

    def range_violation(self, params: DuvParams) -> Optional[str]:
        """Returns a description of the first field outside the params ranges, or None."""
        if self.master >= params.M:
            return f"master {self.master} outside [0,{params.M})"
        if self.slave >= params.S:
            return f"slave {self.slave} outside [0,{params.S})"
        if self.burst_len > params.B:
            return f"burst_len {self.burst_len} exceeds B={params.B}"
        for name, value in zip(WAIT_FIELDS, self.waits):
            if value > params.W:
                return f"{name}={value} exceeds W={params.W}"
        return None


class Test(BaseModel):
    """An ordered stream of transactions."""

    __test__ = False  # не собирать как pytest-класс

    model_config = ConfigDict(extra="forbid", frozen=True)

    test_id: int = Field(ge=0)
    txns: tuple[Transaction, ...] = Field(min_length=1)

    def __len__(self) -> int:
        return len(self.txns)


class GenProfile(BaseModel):
    """
    Sampling distributions of a stimulus profile.

    weights keys:
        ttype, master, slave, burst_kind, priority, width  - categorical probabilities
        incr_len  - over burst_len 1..B for INCR bursts
        wrap_len  - over DuvParams.wrap_lengths() for WRAP bursts
        gap       - over 0..7
        wait      - over 0..W, drawn independently per wait slot
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: ProfileName
    weights: dict[str, tuple[float, ...]]

    REQUIRED_KEYS: ClassVar[tuple[str, ...]] = (
        "ttype", "master", "slave", "burst_kind", "priority", "width",
        "incr_len", "wrap_len", "gap", "wait",
    )

    @field_validator("weights")
    @classmethod
    def check_distributions(cls, v: dict[str, tuple[float, ...]]) -> dict[str, tuple[float, ...]]:
        missing = [k for k in cls.REQUIRED_KEYS if k not in v]
        if missing:
            raise ValueError(f"missing distributions: {missing}")
        for key, probs in v.items():
            if not probs:
                raise ValueError(f"{key}: empty distribution")
            if any(p < 0 for p in probs):
                raise ValueError(f"{key}: negative probability")
            if not math.isclose(sum(probs), 1.0, rel_tol=0.0, abs_tol=1e-9):
                raise ValueError(f"{key}: probabilities sum to {sum(probs)}, expected 1")
        return v

"""
State of one selection run.
Defines the state passed between the nodes of the selection graph and the
run history it produces.
"""

import operator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Optional, TypedDict

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from .config import LoopConfig
from .coverage import CoverageState
from .duvsim import CoverageEvent, coverage_events, simulate
from .encode import CorpusEncoding, Standardizer
from .schemas import DuvParams, Test
from .selectors import NoveltySelector


class IterationRecord(BaseModel):
    """One checkpoint of the loop; iteration 0 is the warm-up."""

    iteration: int = Field(ge=0)
    selected: list[int]
    tests_simulated: int = Field(ge=1)
    coverage_percent: float = Field(ge=0, le=100)
    new_products: int = Field(0, ge=0)
    train_windows: int = Field(0, ge=0)
    selector_seconds: float = Field(0.0, ge=0)


class RunHeader(BaseModel):
    """First line of history.jsonl."""

    method: str
    seed: int
    goals: tuple[float, ...]
    tests_to_goal: dict[str, Optional[int]] = {}  # goal_key -> first checkpoint at or above it


class RunHistory(RunHeader):
    records: list[IterationRecord]

    @property
    def warmup(self) -> list[int]:
        return self.records[0].selected

    @property
    def final_coverage(self) -> float:
        return self.records[-1].coverage_percent

    @property
    def selector_seconds(self) -> float:
        return sum(r.selector_seconds for r in self.records)

    def selected_order(self) -> list[int]:
        return [tid for r in self.records for tid in r.selected]

    def curve(self) -> list[tuple[int, float]]:
        return [(r.tests_simulated, r.coverage_percent) for r in self.records]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "iteration": [r.iteration for r in self.records],
                "tests_simulated": [r.tests_simulated for r in self.records],
                "coverage_percent": [r.coverage_percent for r in self.records],
                "selector_seconds": [r.selector_seconds for r in self.records],
            }
        )

    def save(self, run_dir: str | Path) -> Path:
        """history.jsonl (header line, then one iteration per line) and checkpoints.csv."""
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        with open(run_dir / "history.jsonl", "w", encoding="utf-8") as f:
            f.write(self.model_dump_json(exclude={"records"}) + "\n")
            for record in self.records:
                f.write(record.model_dump_json() + "\n")
        self.to_frame().to_csv(run_dir / "checkpoints.csv", index=False)
        return run_dir

    @classmethod
    def load(cls, run_dir: str | Path) -> "RunHistory":
        lines = (Path(run_dir) / "history.jsonl").read_text(encoding="utf-8").splitlines()
        header = RunHeader.model_validate_json(lines[0])
        records = [IterationRecord.model_validate_json(line) for line in lines[1:] if line.strip()]
        return cls(**header.model_dump(), records=records)


@dataclass
class RunContext:
    """Mutable objects one run owns; never shared between runs."""

    corpus: dict[int, Test]
    events: dict[int, list[CoverageEvent]]
    encoding: Optional[CorpusEncoding]
    selector: NoveltySelector
    params: DuvParams
    config: LoopConfig
    coverage: CoverageState
    warmup_rng: np.random.Generator
    rank_rng: np.random.Generator
    standardizer: Optional[Standardizer] = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def window(self) -> int:
        return self.config.window or self.params.D

    @property
    def step(self) -> int:
        return self.config.step or self.window

    def events_for(self, test_id: int) -> list[CoverageEvent]:
        if test_id not in self.events:
            test = self.corpus[test_id]
            self.events[test_id] = coverage_events(simulate(test, self.params), test, self.params)
        return self.events[test_id]


class LoopState(TypedDict):
    ctx: RunContext
    simulated: list[int]
    unsimulated: list[int]
    selected: list[int]
    iteration: int
    goals_reached: dict[str, int]
    done: bool
    # operator.add: записи итераций накапливаются, а не перезаписываются
    records: Annotated[list[IterationRecord], operator.add]


def goal_key(goal: float) -> str:
    return f"{goal:g}"

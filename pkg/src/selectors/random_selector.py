"""
Baseline that ignores novelty: every window scores 0, so ranking falls
through to the random tie-break and the batch is a uniform random draw.
"""

from pathlib import Path

import numpy as np
from pydantic import BaseModel

from .base import NoveltySelector


class RandomSnapshot(BaseModel):
    selector: str
    seed: int


class RandomSelector(NoveltySelector):
    name = "RD"
    requires_training = False

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self._fitted = True

    def _fit(self, windows: np.ndarray, rng: np.random.Generator) -> None:
        return None

    def _score(self, windows: np.ndarray) -> np.ndarray:
        return np.zeros(len(windows))

    def save_snapshot(self, path: str | Path) -> Path:
        path = Path(path).with_suffix(".json")
        path.write_text(RandomSnapshot(selector=self.name, seed=self.seed).model_dump_json(), encoding="utf-8")
        return path

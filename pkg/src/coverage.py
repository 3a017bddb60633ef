"""
Coverage bookkeeping over the cross-coverage product universe.
"""

import logging
from collections import Counter
from typing import Iterable

import pandas as pd

from .duvsim import GROUPS, CoverageEvent, enumerate_products
from .errors import CoverageConsistencyError
from .schemas import DuvParams

logger = logging.getLogger(__name__)

RARITY_BUCKETS = (("0", 0, 0), ("1", 1, 1), ("2-3", 2, 3), ("4-7", 4, 7), ("8+", 8, None))


class CoverageState:
    """
    Hit counts per product plus (tests_simulated, coverage_percent) checkpoints.
    Single-writer: one instance per experiment run.
    """

    def __init__(self, universe: Iterable[CoverageEvent]) -> None:
        self.universe: frozenset[CoverageEvent] = frozenset(universe)
        self.hits: Counter[CoverageEvent] = Counter()
        self.checkpoints: list[tuple[int, float]] = []

    @classmethod
    def for_params(cls, params: DuvParams) -> "CoverageState":
        return cls(enumerate_products(params))

    def absorb(self, events: Iterable[CoverageEvent]) -> "CoverageState":
        for event in events:
            if event not in self.universe:
                raise CoverageConsistencyError(f"event {event} is outside the coverage universe")
            self.hits[event] += 1
        return self

    @property
    def covered(self) -> int:
        return len(self.hits)

    def coverage_percent(self) -> float:
        if not self.universe:
            return 0.0
        return 100.0 * self.covered / len(self.universe)

    def remaining(self) -> list[CoverageEvent]:
        return sorted(self.universe.difference(self.hits))

    def checkpoint(self, tests_simulated: int) -> tuple[int, float]:
        point = (tests_simulated, self.coverage_percent())
        if self.checkpoints:
            last_tests, last_cov = self.checkpoints[-1]
            if tests_simulated < last_tests or point[1] < last_cov:
                raise CoverageConsistencyError(f"checkpoint {point} goes backwards from {self.checkpoints[-1]}")
        self.checkpoints.append(point)
        return point

    def group_summary(self) -> dict[str, tuple[int, int]]:
        """group -> (covered, total)."""
        summary = {}
        for group in GROUPS:
            total = sum(1 for e in self.universe if e.group == group)
            covered = sum(1 for e in self.hits if e.group == group)
            summary[group] = (covered, total)
        return summary

    def rarity_histogram(self) -> dict[str, int]:
        """Number of products per hit-count bucket (0, 1, 2-3, 4-7, 8+)."""
        histogram = {label: 0 for label, _, _ in RARITY_BUCKETS}
        for event in self.universe:
            count = self.hits.get(event, 0)
            for label, lo, hi in RARITY_BUCKETS:
                if count >= lo and (hi is None or count <= hi):
                    histogram[label] += 1
                    break
        return histogram

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.checkpoints, columns=["tests_simulated", "coverage_percent"])

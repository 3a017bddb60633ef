"""
Tests-to-goal extraction, savings arithmetic and the paired sign test.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binomtest


@dataclass(frozen=True)
class GoalHit:
    raw: Optional[int]
    """First checkpoint (tests simulated) whose coverage reaches the goal."""
    interpolated: Optional[float]
    """Linear interpolation inside the batch that crossed the goal."""

    @property
    def reached(self) -> bool:
        return self.raw is not None


def tests_to_goal(curve: Sequence[tuple[int, float]], goal: float) -> GoalHit:
    previous = None
    for tests, coverage in curve:
        if coverage >= goal:
            if previous is None or coverage == previous[1]:
                return GoalHit(raw=tests, interpolated=float(tests))
            t0, c0 = previous
            return GoalHit(raw=tests, interpolated=t0 + (goal - c0) / (coverage - c0) * (tests - t0))
        previous = (tests, coverage)
    return GoalHit(raw=None, interpolated=None)


def savings(rd_tests: float, method_tests: float) -> tuple[float, float]:
    """(saved tests, percent of RD's count)."""
    saved = rd_tests - method_tests
    return saved, 100.0 * saved / rd_tests


def net_savings(saved_tests: float, per_test_minutes: float, selector_hours: float) -> float:
    """Simulation hours saved minus the hours spent running the selector."""
    return saved_tests * per_test_minutes / 60.0 - selector_hours


def sign_test(method: Sequence[float], baseline: Sequence[float]) -> float:
    """
    One-sided sign test over paired values: p-value for "method needs fewer
    tests than baseline". Ties are dropped; no informative pairs gives 1.0.
    """
    diffs = np.asarray(baseline, dtype=np.float64) - np.asarray(method, dtype=np.float64)
    wins = int(np.sum(diffs > 0))
    informative = int(np.sum(diffs != 0))
    if informative == 0:
        return 1.0
    return float(binomtest(wins, informative, 0.5, alternative="greater").pvalue)


def describe(values: Sequence[float]) -> dict[str, float]:
    if len(values) == 0:
        return {"mean": np.nan, "median": np.nan, "q1": np.nan, "q3": np.nan, "iqr": np.nan}
    arr = np.asarray(values, dtype=np.float64)
    q1, median, q3 = np.percentile(arr, [25, 50, 75])
    return {"mean": float(arr.mean()), "median": float(median), "q1": float(q1), "q3": float(q3), "iqr": float(q3 - q1)}


def average_curve(curves: Sequence[Sequence[tuple[int, float]]]) -> tuple[np.ndarray, np.ndarray]:
    """
    Pointwise mean over the union of x positions; a finished run holds its
    last coverage value further right.
    """
    grid = np.unique(np.concatenate([np.array([t for t, _ in c], dtype=np.float64) for c in curves]))
    stacked = [np.interp(grid, [t for t, _ in c], [v for _, v in c]) for c in curves]
    return grid, np.mean(stacked, axis=0)

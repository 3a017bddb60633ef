"""
Tests-to-goal report recomputed from a results directory's curves.csv.
"""

import logging
from pathlib import Path
from typing import Sequence

import pandas as pd

from .stats import describe, tests_to_goal

logger = logging.getLogger(__name__)


def load_curves(runs_dir: str | Path) -> pd.DataFrame:
    path = Path(runs_dir) / "curves.csv"
    if not path.is_file():
        raise FileNotFoundError(f"curves.csv not found in {runs_dir}")
    return pd.read_csv(path)


def goal_report(curves: pd.DataFrame, goal: float) -> pd.DataFrame:
    """Per method: runs, reached, mean/median interpolated and mean raw tests-to-goal."""
    rows = []
    for method, block in curves.groupby("method", sort=False):
        hits = [
            tests_to_goal(list(zip(run["tests"].tolist(), run["coverage"].tolist())), goal)
            for _, run in block.groupby("seed", sort=False)
        ]
        reached = [h for h in hits if h.reached]
        stats = describe([h.interpolated for h in reached])
        rows.append(
            {
                "method": method,
                "goal": goal,
                "runs": len(hits),
                "reached": len(reached),
                "mean_tests": stats["mean"],
                "median_tests": stats["median"],
                "mean_raw_tests": describe([h.raw for h in reached])["mean"],
            }
        )
    return pd.DataFrame(rows)


def report(runs_dir: str | Path, goals: Sequence[float], write: bool = True) -> pd.DataFrame:
    curves = load_curves(runs_dir)
    frame = pd.concat([goal_report(curves, g) for g in goals], ignore_index=True)
    if write:
        for goal in goals:
            target = Path(runs_dir) / f"report_goal_{goal:g}.csv"
            frame[frame["goal"] == goal].to_csv(target, index=False, float_format="%.6f")
            logger.info(f"Wrote {target}")
    return frame


def format_report(frame: pd.DataFrame) -> str:
    lines = []
    for goal, block in frame.groupby("goal", sort=False):
        lines.append(f"Tests to {goal:g}% coverage:")
        for _, row in block.iterrows():
            if row["reached"] == 0:
                lines.append(f"  {row['method']:<5} not reached ({int(row['runs'])} runs)")
                continue
            note = "" if row["reached"] == row["runs"] else f"  [{int(row['runs'] - row['reached'])} not reached]"
            lines.append(
                f"  {row['method']:<5} mean {row['mean_tests']:.1f}  median {row['median_tests']:.1f}  "
                f"raw {row['mean_raw_tests']:.1f}{note}"
            )
    return "\n".join(lines)

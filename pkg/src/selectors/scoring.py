"""
Window-to-test novelty aggregation and batch ranking.

S_seq of a window is the mean of its per-position reconstruction errors;
S_test of a test is the mean of its squared window scores, so a few very
novel windows outweigh many mildly novel ones.
"""

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import InternalError, UsageError


@dataclass(frozen=True)
class NoveltyScore:
    test_id: int
    window_scores: tuple[float, ...]
    s_test: float


def seq_score(position_errors: np.ndarray) -> np.ndarray:
    """(N, L) per-position errors -> (N,) window scores."""
    return np.asarray(position_errors, dtype=np.float64).mean(axis=-1)


def aggregate_test(test_id: int, window_scores: Sequence[float]) -> NoveltyScore:
    scores = np.asarray(window_scores, dtype=np.float64)
    if scores.size == 0:
        raise InternalError(f"test {test_id} has no window scores")
    return NoveltyScore(test_id=test_id, window_scores=tuple(scores.tolist()), s_test=float(np.mean(scores**2)))


def aggregate_owners(window_scores: np.ndarray, owners: np.ndarray, n_tests: int) -> np.ndarray:
    """
    Vectorised aggregate_test over a flat batch: owners[i] is the test position
    window i belongs to. Returns S_test per position 0..n_tests-1.
    """
    counts = np.bincount(owners, minlength=n_tests)
    if n_tests and counts.min() == 0:
        raise InternalError(f"test at position {int(np.argmin(counts))} has no window scores")
    sums = np.bincount(owners, weights=np.asarray(window_scores, dtype=np.float64) ** 2, minlength=n_tests)
    return sums / np.maximum(counts, 1)


def rank_tests(scores: Mapping[int, float], batch: int, rng: np.random.Generator) -> list[int]:
    """
    Test ids by descending S_test, ties broken by a uniform random draw.
    A batch larger than the candidate set returns every candidate.
    """
    if batch < 1:
        raise UsageError(f"batch must be >= 1, got {batch}")
    ids = np.fromiter(scores.keys(), dtype=np.int64, count=len(scores))
    values = np.fromiter(scores.values(), dtype=np.float64, count=len(scores))
    tiebreak = rng.random(len(ids))
    # lexsort: последний ключ первичный
    order = np.lexsort((tiebreak, -values))
    return ids[order[:batch]].tolist()


def random_ranking(test_ids: Sequence[int], batch: int, rng: np.random.Generator) -> list[int]:
    if batch < 1:
        raise UsageError(f"batch must be >= 1, got {batch}")
    ids = np.asarray(test_ids, dtype=np.int64)
    return ids[rng.permutation(len(ids))[:batch]].tolist()

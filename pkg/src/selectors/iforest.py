"""
Isolation-forest selector over flattened windows.

scikit-learn grows the trees; isolation depths are read back from them and
normalised with the exact harmonic number, c(n) = 2H(n-1) - 2(n-1)/n.
"""

from pathlib import Path

import joblib
import numpy as np
from scipy.special import digamma
from sklearn.ensemble import IsolationForest

from ..errors import UsageError
from .base import NoveltySelector


def average_path_length(n) -> np.ndarray | float:
    """
    c(n): average path length of an unsuccessful search in a binary search
    tree of n points, the normaliser of isolation depths. c(1) = 0, c(2) = 1,
    c(3) = 5/3. Accepts a scalar or an array of sizes.
    """
    sizes = np.asarray(n, dtype=np.float64)
    # H(n-1) = digamma(n) + gamma, exact for integer n
    harmonic = digamma(np.maximum(sizes, 2.0)) + np.euler_gamma
    c = np.where(sizes <= 1, 0.0, 2.0 * harmonic - 2.0 * (sizes - 1) / np.maximum(sizes, 1.0))
    return float(c) if c.ndim == 0 else c


class IForestSelector(NoveltySelector):
    """S_seq = 2^(-E[h(x)] / c(m)) in (0, 1); shallower isolation scores higher."""

    name = "IF"

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.forest: IsolationForest | None = None

    def _fit(self, windows: np.ndarray, rng: np.random.Generator) -> None:
        flat = windows.reshape(len(windows), -1)
        self.forest = IsolationForest(
            n_estimators=self.hyper.trees,
            max_samples=min(self.hyper.subsample, len(flat)),
            random_state=int(rng.integers(2**31 - 1)),
        ).fit(flat)

    def _depths(self, windows: np.ndarray) -> np.ndarray:
        """E[h(x)]: mean over trees of edges to the leaf plus c(leaf size)."""
        flat = np.asarray(windows.reshape(len(windows), -1), dtype=np.float32)
        depths = np.zeros(len(flat))
        for tree, features in zip(self.forest.estimators_, self.forest.estimators_features_):
            subset = flat[:, features]
            leaves = tree.apply(subset)
            edges = np.ravel(tree.decision_path(subset).sum(axis=1)) - 1.0
            depths += edges + average_path_length(tree.tree_.n_node_samples[leaves])
        return depths / len(self.forest.estimators_)

    def _score(self, windows: np.ndarray) -> np.ndarray:
        norm = average_path_length(self.forest.max_samples_)
        if norm == 0.0:
            # один обучающий пример: глубины и нормировка нулевые
            return np.ones(len(windows))
        return 2.0 ** (-self._depths(windows) / norm)

    def expected_path_length(self, windows: np.ndarray) -> np.ndarray:
        self._check_fitted()
        return self._depths(np.asarray(windows, dtype=np.float64))

    def save_snapshot(self, path: str | Path) -> Path:
        self._check_fitted()
        path = Path(path).with_suffix(".joblib")
        joblib.dump({"selector": self.name, "round": self.rounds, "forest": self.forest}, path)
        return path

    @classmethod
    def load_snapshot(cls, path: str | Path) -> "IForestSelector":
        saved = joblib.load(path)
        if saved.get("selector") != cls.name:
            raise UsageError(f"{path} is not an {cls.name} snapshot")
        selector = cls()
        selector.forest = saved["forest"]
        selector.rounds = saved["round"]
        selector._fitted = True
        return selector

"""
Common interface of the novelty selectors and the shared training loop of
the reconstruction-based ones.
"""

import logging
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import ClassVar, Optional

import numpy as np

from ..config import ModelHyper
from ..errors import ShapeError, UsageError
from ..numerics import Adam, Module, Tensor, backward, mse, no_grad
from .scoring import seq_score

logger = logging.getLogger(__name__)

INFERENCE_CHUNK = 4096


class NoveltySelector(ABC):
    """
    fit() retrains from scratch on every call; after it, scoring is
    deterministic and read-only.
    """

    name: ClassVar[str]
    requires_training: ClassVar[bool] = True

    def __init__(self, hyper: Optional[ModelHyper] = None, seed: int = 0) -> None:
        self.hyper = hyper or ModelHyper()
        self.seed = seed
        self.rounds = 0
        self.fit_seconds = 0.0
        self._fitted = False

    def _round_rng(self) -> np.random.Generator:
        """Fresh generator per fit() so every retrain is reproducible on its own."""
        self.rounds += 1
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.rounds]))

    def fit(self, windows: np.ndarray) -> "NoveltySelector":
        windows = _check_windows(windows)
        if len(windows) == 0:
            raise UsageError(f"{self.name}: cannot fit on zero windows")
        started = time.perf_counter()
        self._fit(windows, self._round_rng())
        self.fit_seconds = time.perf_counter() - started
        self._fitted = True
        logger.debug(f"{self.name}: fitted round {self.rounds} on {len(windows)} windows in {self.fit_seconds:.2f}s")
        return self

    @abstractmethod
    def _fit(self, windows: np.ndarray, rng: np.random.Generator) -> None: ...

    @abstractmethod
    def _score(self, windows: np.ndarray) -> np.ndarray: ...

    @property
    def fitted(self) -> bool:
        return self._fitted

    def _check_fitted(self) -> None:
        if not self._fitted:
            raise UsageError(f"{self.name} selector is not fitted")

    def score_windows(self, windows: np.ndarray) -> np.ndarray:
        """(N, L, F) windows -> (N,) S_seq values."""
        self._check_fitted()
        windows = _check_windows(windows)
        if len(windows) == 0:
            return np.zeros(0)
        return self._score(windows)

    def score_window(self, window: np.ndarray) -> float:
        return float(self.score_windows(np.asarray(window)[None, ...])[0])

    def position_errors(self, windows: np.ndarray) -> np.ndarray:
        raise UsageError(f"{self.name} has no per-position reconstruction")

    @abstractmethod
    def save_snapshot(self, path: str | Path) -> Path: ...


def _check_windows(windows: np.ndarray) -> np.ndarray:
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3:
        raise ShapeError("windows", windows.shape, ("N", "L", "F"))
    return windows


class Reconstructor(Module):
    """A model that maps (N, L, F) windows to same-shape reconstructions."""

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None, training: bool = False) -> Tensor:
        raise NotImplementedError

    def loss(self, sample: np.ndarray, rng: Optional[np.random.Generator] = None, training: bool = False) -> Tensor:
        return mse(self(Tensor(sample), rng=rng, training=training), sample)


class ReconstructionSelector(NoveltySelector):
    """Novelty is the reconstruction error of a model trained on simulated windows."""

    def __init__(self, hyper: Optional[ModelHyper] = None, seed: int = 0) -> None:
        super().__init__(hyper, seed)
        self.model: Optional[Reconstructor] = None
        self.epoch_losses: list[float] = []

    @abstractmethod
    def build(self, rng: np.random.Generator, L: int, F: int) -> Reconstructor: ...

    def _fit(self, windows: np.ndarray, rng: np.random.Generator) -> None:
        n, L, F = windows.shape
        h = self.hyper
        self.model = self.build(rng, L, F)
        optimizer = Adam(self.model.parameters(), lr=h.lr, beta1=h.beta1, beta2=h.beta2, eps=h.eps)
        self.epoch_losses = []
        for epoch in range(h.epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, h.batch):
                batch = windows[order[start : start + h.batch]]
                optimizer.zero_grad()
                loss = self.model.loss(batch, rng=rng, training=h.use_dropout)
                backward(loss)
                optimizer.step()
                total += loss.item() * len(batch)
            self.epoch_losses.append(total / n)
            logger.debug(f"{self.name}: round {self.rounds} epoch {epoch + 1}/{h.epochs} loss={total / n:.6f}")

    def reconstruct(self, windows: np.ndarray) -> np.ndarray:
        self._check_fitted()
        windows = _check_windows(windows)
        parts = []
        with no_grad():
            for start in range(0, len(windows), INFERENCE_CHUNK):
                parts.append(self.model(Tensor(windows[start : start + INFERENCE_CHUNK])).data)
        return np.concatenate(parts) if parts else np.zeros_like(windows)

    def position_errors(self, windows: np.ndarray) -> np.ndarray:
        """(N, L) mean squared error per position."""
        windows = _check_windows(windows)
        return ((self.reconstruct(windows) - windows) ** 2).mean(axis=-1)

    def _score(self, windows: np.ndarray) -> np.ndarray:
        return seq_score(self.position_errors(windows))

    def save_snapshot(self, path: str | Path) -> Path:
        self._check_fitted()
        path = Path(path).with_suffix(".npz")
        np.savez(
            path,
            __selector__=np.array(self.name),
            __round__=np.array(self.rounds),
            **self.model.named_parameters(),
        )
        return path

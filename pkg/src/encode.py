"""
Preprocessing of transactions (one-hot + standardization) and sliding-window
sampling of tests into fixed-length sequences.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.preprocessing import OneHotEncoder, StandardScaler

from .errors import ConfigurationError, EncodingError
from .schemas import BURST_KINDS, CATEGORICAL_FIELDS, NUMERIC_FIELDS, PRIORITIES, TTYPES, DuvParams, Test, Transaction

logger = logging.getLogger(__name__)

CONSTANT_STD = 1e-12


@dataclass(frozen=True)
class FeatureSchema:
    categorical: tuple[tuple[str, tuple], ...]
    numeric: tuple[str, ...] = NUMERIC_FIELDS
    _encoder: OneHotEncoder = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        categories = [list(cats) for _, cats in self.categorical]
        encoder = OneHotEncoder(categories=categories, handle_unknown="error", sparse_output=False, dtype=np.float64)
        # OneHotEncoder требует fit даже при явных категориях
        encoder.fit(np.array([[cats[0] for cats in categories]], dtype=object))
        object.__setattr__(self, "_encoder", encoder)

    @classmethod
    def for_params(cls, params: DuvParams) -> "FeatureSchema":
        return cls(
            categorical=(
                ("ttype", TTYPES),
                ("master", tuple(range(params.M))),
                ("slave", tuple(range(params.S))),
                ("burst_kind", BURST_KINDS),
                ("priority", PRIORITIES),
            )
        )

    @property
    def onehot_dim(self) -> int:
        return sum(len(cats) for _, cats in self.categorical)

    @property
    def encoded_dim(self) -> int:
        return self.onehot_dim + len(self.numeric)

    def onehot(self, txns: Sequence[Transaction]) -> np.ndarray:
        rows = np.array([[getattr(t, name) for name, _ in self.categorical] for t in txns], dtype=object)
        try:
            return self._encoder.transform(rows)
        except ValueError as e:
            raise EncodingError(f"unknown category: {e}") from e

    def raw_numeric(self, txns: Sequence[Transaction]) -> np.ndarray:
        return np.array([[getattr(t, name) for name in self.numeric] for t in txns], dtype=np.float64)


class Standardizer:
    """Per-attribute population mean and stddev; immutable after fit."""

    def __init__(self, numeric: np.ndarray) -> None:
        if numeric.ndim != 2 or numeric.shape[0] == 0:
            raise ConfigurationError("standardizer needs at least one transaction")
        self._scaler = StandardScaler().fit(numeric)
        self.mean: np.ndarray = self._scaler.mean_.copy()
        self.stddev: np.ndarray = np.sqrt(self._scaler.var_)
        self.constant: np.ndarray = self.stddev < CONSTANT_STD
        # Константные атрибуты только центрируются
        self._scaler.scale_ = np.where(self.constant, 1.0, self.stddev)
        if self.constant.any():
            logger.debug(f"Constant numeric attributes: {np.flatnonzero(self.constant).tolist()}")

    def transform(self, numeric: np.ndarray) -> np.ndarray:
        return self._scaler.transform(numeric)


def fit_standardizer(tests: Iterable[Test], schema: Optional[FeatureSchema] = None) -> Standardizer:
    schema = schema or FeatureSchema.for_params(DuvParams())
    txns = [t for test in tests for t in test.txns]
    if not txns:
        raise ConfigurationError("cannot fit a standardizer on zero transactions")
    return Standardizer(schema.raw_numeric(txns))


def encode_txn(txn: Transaction, schema: FeatureSchema, standardizer: Standardizer) -> np.ndarray:
    return np.concatenate([schema.onehot([txn])[0], standardizer.transform(schema.raw_numeric([txn]))[0]])


@dataclass(frozen=True)
class Window:
    test_id: int
    offset: int
    vectors: np.ndarray  # (L, F)


def window_offsets(length: int, L: int, step: int) -> list[int]:
    """
    Start offsets 0, step, 2·step, ... while offset + L <= length, plus a tail
    window at length − L when transactions would remain unsampled.
    Tests shorter than L yield [0] (one left-padded window).
    """
    if L < 1 or step < 1:
        raise ConfigurationError(f"window needs L >= 1 and step >= 1, got L={L} step={step}")
    if length < L:
        return [0]
    offsets = list(range(0, length - L + 1, step))
    tail = length - L
    if offsets[-1] + L < length and offsets[-1] != tail:
        offsets.append(tail)
    return offsets


def _windows_from_matrix(encoded: np.ndarray, L: int, step: int) -> tuple[list[int], np.ndarray]:
    n, dim = encoded.shape
    offsets = window_offsets(n, L, step)
    if n < L:
        padded = np.vstack([np.zeros((L - n, dim)), encoded])
        return offsets, padded[None, :, :]
    idx = np.asarray(offsets)[:, None] + np.arange(L)[None, :]
    return offsets, encoded[idx]


def sample_windows(
    test: Test, L: int, step: int, schema: FeatureSchema, standardizer: Standardizer
) -> list[Window]:
    encoded = np.hstack([schema.onehot(test.txns), standardizer.transform(schema.raw_numeric(test.txns))])
    offsets, stacked = _windows_from_matrix(encoded, L, step)
    return [Window(test_id=test.test_id, offset=o, vectors=v) for o, v in zip(offsets, stacked)]


class CorpusEncoding:
    """
    Raw one-hot and numeric matrices of a whole corpus, computed once.
    Restandardizing for a new training population only touches the numeric block.
    """

    def __init__(self, corpus: Sequence[Test], schema: FeatureSchema) -> None:
        self.schema = schema
        self.test_ids = [t.test_id for t in corpus]
        self._index = {tid: i for i, tid in enumerate(self.test_ids)}
        lengths = np.array([len(t) for t in corpus])
        self._bounds = np.concatenate([[0], np.cumsum(lengths)])
        all_txns = [txn for t in corpus for txn in t.txns]
        self._onehot = schema.onehot(all_txns)
        self._numeric = schema.raw_numeric(all_txns)

    def _rows(self, test_id: int) -> slice:
        i = self._index[test_id]
        return slice(self._bounds[i], self._bounds[i + 1])

    def fit_standardizer(self, test_ids: Iterable[int]) -> Standardizer:
        rows = [self._numeric[self._rows(tid)] for tid in test_ids]
        if not rows:
            raise ConfigurationError("cannot fit a standardizer on zero tests")
        return Standardizer(np.vstack(rows))

    def encoded(self, test_id: int, standardizer: Standardizer) -> np.ndarray:
        rows = self._rows(test_id)
        return np.hstack([self._onehot[rows], standardizer.transform(self._numeric[rows])])

    def windows(
        self,
        test_ids: Sequence[int],
        standardizer: Standardizer,
        L: int,
        step: int,
        granularity: str = "fine",
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Returns (windows of shape (N, L', F), owner array of shape (N,)) where
        owner[i] is the position in test_ids of the test window i came from.
        Coarse granularity gives one (1, F) window per test: its mean encoded transaction.
        """
        blocks, owners = [], []
        for pos, tid in enumerate(test_ids):
            encoded = self.encoded(tid, standardizer)
            if granularity == "coarse":
                stacked = encoded.mean(axis=0)[None, None, :]
            else:
                _, stacked = _windows_from_matrix(encoded, L, step)
            blocks.append(stacked)
            owners.append(np.full(len(stacked), pos))
        if not blocks:
            width = 1 if granularity == "coarse" else L
            return np.zeros((0, width, self.schema.encoded_dim)), np.zeros(0, dtype=np.int64)
        return np.concatenate(blocks), np.concatenate(owners)

import numpy as np
import pytest

from src.config import ModelHyper
from src.schemas import DuvParams, Test, Transaction
from src.stimgen import gen_corpus

SMALL_MIX = {"UNIFORM": 0.6, "BURSTY": 0.2, "SPARSE_PACING": 0.2}


@pytest.fixture
def params() -> DuvParams:
    return DuvParams()


@pytest.fixture
def make_txn():
    """Transaction factory: a READ SINGLE from master 0 to slave 0 with zero waits, unless overridden."""

    def factory(**overrides) -> Transaction:
        fields = dict(
            ttype="READ",
            master=0,
            slave=0,
            burst_kind="SINGLE",
            priority="LOW",
            burst_len=1,
            addr=0,
            gap=0,
            w1=0,
            w2=0,
            w3=0,
            w4=0,
            data=0,
            tag=0,
            width=1,
        )
        fields.update(overrides)
        return Transaction(**fields)

    return factory


@pytest.fixture
def make_test(make_txn):
    def factory(*txns: dict, test_id: int = 0) -> Test:
        return Test(test_id=test_id, txns=tuple(make_txn(**t) for t in txns))

    return factory


@pytest.fixture(scope="session")
def small_corpus() -> list[Test]:
    return gen_corpus(seed=3, n_tests=30, mix=SMALL_MIX, len_range=(6, 14))


@pytest.fixture
def tiny_hyper() -> ModelHyper:
    return ModelHyper(d_model=8, heads=2, enc_layers=1, ffn_dim=16, epochs=2, batch=64, trees=20, subsample=64)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

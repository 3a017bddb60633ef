from typing import Optional

from ..config import ModelHyper
from ..errors import ConfigurationError
from .base import NoveltySelector, ReconstructionSelector, Reconstructor
from .flat_ae import FlatAESelector, FlatAutoencoder
from .iforest import IForestSelector, average_path_length
from .lstm_ae import LSTMAutoencoder, LSTMSelector
from .random_selector import RandomSelector
from .scoring import NoveltyScore, aggregate_owners, aggregate_test, random_ranking, rank_tests, seq_score
from .transformer import TransformerAutoencoder, TransformerSelector, positional_encoding, scaled_dot_product_attention

SELECTORS: dict[str, type[NoveltySelector]] = {
    "RD": RandomSelector,
    "AE": FlatAESelector,
    "IF": IForestSelector,
    "TE": TransformerSelector,
    "LSTM": LSTMSelector,
}


def create_selector(name: str, hyper: Optional[ModelHyper] = None, seed: int = 0) -> NoveltySelector:
    try:
        cls = SELECTORS[name]
    except KeyError:
        raise ConfigurationError(f"unknown selector {name!r}; expected one of {sorted(SELECTORS)}") from None
    return cls(hyper, seed)


__all__ = [
    "SELECTORS",
    "FlatAESelector",
    "FlatAutoencoder",
    "IForestSelector",
    "LSTMAutoencoder",
    "LSTMSelector",
    "NoveltyScore",
    "NoveltySelector",
    "RandomSelector",
    "ReconstructionSelector",
    "Reconstructor",
    "TransformerAutoencoder",
    "TransformerSelector",
    "aggregate_owners",
    "aggregate_test",
    "average_path_length",
    "create_selector",
    "positional_encoding",
    "random_ranking",
    "rank_tests",
    "scaled_dot_product_attention",
    "seq_score",
]

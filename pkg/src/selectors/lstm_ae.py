"""
LSTM autoencoder selector.

The encoder LSTM reads the window; its final hidden state is repeated L
times and fed to a decoder LSTM whose per-step outputs go through an affine
layer back to the transaction width.
"""

from typing import Optional

import numpy as np

from ..numerics import LSTM, Linear, Tensor, stack_steps
from .base import ReconstructionSelector, Reconstructor


class LSTMAutoencoder(Reconstructor):
    def __init__(self, rng: np.random.Generator, features: int, hidden: int) -> None:
        self.encoder = LSTM(rng, features, hidden, name="encoder")
        self.decoder = LSTM(rng, hidden, hidden, name="decoder")
        self.output = Linear(rng, hidden, features, name="output")

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None, training: bool = False) -> Tensor:
        steps = x.shape[1]
        summary = self.encoder(x)[-1]
        decoded = self.decoder(stack_steps([summary] * steps))
        return self.output(stack_steps(decoded))


class LSTMSelector(ReconstructionSelector):
    name = "LSTM"

    def build(self, rng: np.random.Generator, L: int, F: int) -> LSTMAutoencoder:
        return LSTMAutoencoder(rng, F, self.hyper.lstm_width(F))

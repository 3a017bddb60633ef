"""
Fully connected autoencoder over the flattened L·F window.
"""

from typing import Optional, Sequence

import numpy as np

from ..numerics import Linear, Tensor, reshape, tanh
from .base import ReconstructionSelector, Reconstructor


class FlatAutoencoder(Reconstructor):
    def __init__(self, rng: np.random.Generator, d_in: int, hidden: Sequence[int]) -> None:
        widths = [d_in, *hidden, d_in]
        self.layers = [Linear(rng, a, b, name=f"dense{i}") for i, (a, b) in enumerate(zip(widths, widths[1:]))]

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None, training: bool = False) -> Tensor:
        n = x.shape[0]
        h = reshape(x, (n, -1))
        for layer in self.layers[:-1]:
            h = tanh(layer(h))
        return reshape(self.layers[-1](h), x.shape)


class FlatAESelector(ReconstructionSelector):
    """
    S_seq is the MSE over the whole flattened window, which equals the mean of
    the per-position errors of the reshaped reconstruction.
    """

    name = "AE"

    def build(self, rng: np.random.Generator, L: int, F: int) -> FlatAutoencoder:
        return FlatAutoencoder(rng, L * F, self.hyper.ae_widths(L * F))

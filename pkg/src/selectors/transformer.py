"""
Transformer-encoder reconstruction selector.

Each transaction vector is projected to d_model, sinusoidal positions are
added, enc_layers encoder blocks (multi-head scaled dot-product attention and
a GELU feed-forward, each followed by residual + layer norm) process the
window, and an affine layer maps back to the transaction width.
"""

import math
from typing import Optional

import numpy as np

from ..numerics import LayerNorm, Linear, Module, Tensor, dropout, gelu, matmul, reshape, softmax, transpose
from .base import ReconstructionSelector, Reconstructor


def positional_encoding(length: int, d_model: int) -> np.ndarray:
    """PE[pos, 2i] = sin(pos / 10000^(2i/d)), PE[pos, 2i+1] = cos(same)."""
    pos = np.arange(length)[:, None]
    two_i = np.arange(0, d_model, 2)[None, :]
    angle = pos / np.power(10000.0, two_i / d_model)
    pe = np.zeros((length, d_model))
    pe[:, 0::2] = np.sin(angle)
    pe[:, 1::2] = np.cos(angle[:, : d_model // 2])
    return pe


def _swap_last(x: Tensor) -> Tensor:
    axes = list(range(x.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(x, axes)


def scaled_dot_product_attention(q: Tensor, k: Tensor, v: Tensor) -> tuple[Tensor, Tensor]:
    """softmax(Q Kᵀ / sqrt(d_k)) V over the last two axes; returns (output, weights)."""
    d_k = q.shape[-1]
    weights = softmax(matmul(q, _swap_last(k)) * (1.0 / math.sqrt(d_k)))
    return matmul(weights, v), weights


class EncoderBlock(Module):
    def __init__(self, rng: np.random.Generator, d_model: int, heads: int, ffn_dim: int, rate: float, name: str) -> None:
        self.heads = heads
        self.rate = rate
        self.query = Linear(rng, d_model, d_model, name=f"{name}.q")
        self.key = Linear(rng, d_model, d_model, name=f"{name}.k")
        self.value = Linear(rng, d_model, d_model, name=f"{name}.v")
        self.proj = Linear(rng, d_model, d_model, name=f"{name}.o")
        self.norm1 = LayerNorm(d_model, name=f"{name}.ln1")
        self.ffn_in = Linear(rng, d_model, ffn_dim, name=f"{name}.ffn1")
        self.ffn_out = Linear(rng, ffn_dim, d_model, name=f"{name}.ffn2")
        self.norm2 = LayerNorm(d_model, name=f"{name}.ln2")

    def _split(self, x: Tensor) -> Tensor:
        n, steps, d = x.shape
        return transpose(reshape(x, (n, steps, self.heads, d // self.heads)), (0, 2, 1, 3))

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None, training: bool = False) -> Tensor:
        n, steps, d = x.shape
        attended, _ = scaled_dot_product_attention(self._split(self.query(x)), self._split(self.key(x)), self._split(self.value(x)))
        merged = reshape(transpose(attended, (0, 2, 1, 3)), (n, steps, d))
        x = self.norm1(x + dropout(self.proj(merged), self.rate, rng, training))
        hidden = self.ffn_out(gelu(self.ffn_in(x)))
        return self.norm2(x + dropout(hidden, self.rate, rng, training))


class TransformerAutoencoder(Reconstructor):
    def __init__(
        self,
        rng: np.random.Generator,
        length: int,
        features: int,
        d_model: int = 32,
        heads: int = 2,
        layers: int = 2,
        ffn_dim: int = 64,
        rate: float = 0.1,
    ) -> None:
        self.embed = Linear(rng, features, d_model, name="embed")
        self.blocks = [EncoderBlock(rng, d_model, heads, ffn_dim, rate, name=f"block{i}") for i in range(layers)]
        self.output = Linear(rng, d_model, features, name="output")
        self.positions = Tensor(positional_encoding(length, d_model))

    def __call__(self, x: Tensor, rng: Optional[np.random.Generator] = None, training: bool = False) -> Tensor:
        h = self.embed(x) + self.positions
        for block in self.blocks:
            h = block(h, rng=rng, training=training)
        return self.output(h)


class TransformerSelector(ReconstructionSelector):
    name = "TE"

    def build(self, rng: np.random.Generator, L: int, F: int) -> TransformerAutoencoder:
        h = self.hyper
        return TransformerAutoencoder(
            rng,
            L,
            F,
            d_model=h.d_model,
            heads=h.heads,
            layers=h.enc_layers,
            ffn_dim=h.ffn_dim,
            rate=h.dropout if h.use_dropout else 0.0,
        )

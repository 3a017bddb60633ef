"""
Small building blocks over the tensor engine: parameter containers, affine
layers, affine layer norm and an LSTM layer.
"""

from typing import Iterator, Optional

import numpy as np

from .tensor import Parameter, Tensor, concat, layer_norm, matmul, mul, reshape, sigmoid, tanh


class Module:
    """Collects Parameters from attributes, nested modules and lists of modules."""

    def parameters(self) -> list[Parameter]:
        return list(self._walk())

    def _walk(self) -> Iterator[Parameter]:
        for value in vars(self).values():
            if isinstance(value, Parameter):
                yield value
            elif isinstance(value, Module):
                yield from value._walk()
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        yield from item._walk()
                    elif isinstance(item, Parameter):
                        yield item

    def named_parameters(self) -> dict[str, np.ndarray]:
        return {f"{i}:{p.name}": p.data for i, p in enumerate(self.parameters())}

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape: Optional[tuple[int, ...]] = None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


class Linear(Module):
    def __init__(self, rng: np.random.Generator, n_in: int, n_out: int, name: str = "linear") -> None:
        self.weight = Parameter(glorot(rng, n_in, n_out), name=f"{name}.weight")
        self.bias = Parameter(np.zeros(n_out), name=f"{name}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        return matmul(x, self.weight) + self.bias


class LayerNorm(Module):
    def __init__(self, dim: int, name: str = "ln") -> None:
        self.gamma = Parameter(np.ones(dim), name=f"{name}.gamma")
        self.beta = Parameter(np.zeros(dim), name=f"{name}.beta")

    def __call__(self, x: Tensor) -> Tensor:
        return mul(layer_norm(x), self.gamma) + self.beta


class LSTM(Module):
    """
    Single-layer LSTM over (N, L, n_in) inputs.
    Gates i, f, o use sigmoid and the candidate g uses tanh:
    c_t = f*c_{t-1} + i*g,  h_t = o*tanh(c_t).
    """

    def __init__(self, rng: np.random.Generator, n_in: int, hidden: int, name: str = "lstm") -> None:
        self.hidden = hidden
        self.weight = Parameter(glorot(rng, n_in + hidden, 4 * hidden), name=f"{name}.weight")
        bias = np.zeros(4 * hidden)
        bias[hidden : 2 * hidden] = 1.0  # forget gate
        self.bias = Parameter(bias, name=f"{name}.bias")

    def __call__(self, x: Tensor) -> list[Tensor]:
        """Returns the hidden state after every step."""
        n, steps, _ = x.shape
        H = self.hidden
        h = Tensor(np.zeros((n, H)))
        c = Tensor(np.zeros((n, H)))
        outputs = []
        for t in range(steps):
            z = matmul(concat([x[:, t, :], h], axis=-1), self.weight) + self.bias
            i = sigmoid(z[:, 0:H])
            f = sigmoid(z[:, H : 2 * H])
            o = sigmoid(z[:, 2 * H : 3 * H])
            g = tanh(z[:, 3 * H : 4 * H])
            c = f * c + i * g
            h = o * tanh(c)
            outputs.append(h)
        return outputs


def stack_steps(steps: list[Tensor]) -> Tensor:
    """[(N, D)] * L -> (N, L, D)."""
    return concat([reshape(s, (s.shape[0], 1, s.shape[1])) for s in steps], axis=1)

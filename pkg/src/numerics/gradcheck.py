"""
Finite-difference check of analytic gradients.
"""

import math
from typing import Any, Protocol

import numpy as np

from .tensor import Parameter, Tensor, backward, no_grad


class Differentiable(Protocol):
    def parameters(self) -> list[Parameter]: ...

    def loss(self, sample: Any) -> Tensor: ...


def grad_check(
    model: Differentiable,
    sample: Any,
    rng: np.random.Generator | None = None,
    fraction: float = 0.05,
    min_entries: int = 20,
    h: float = 1e-5,
) -> float:
    """
    Compares backward() against central differences on a random subset of
    parameter entries (fraction of all entries, at least min_entries) and
    returns the maximum relative error.
    """
    rng = rng or np.random.default_rng(0)
    params = model.parameters()
    for p in params:
        p.zero_grad()
    backward(model.loss(sample))
    analytic = [p.grad.copy() for p in params]

    sizes = np.array([p.data.size for p in params])
    total = int(sizes.sum())
    k = min(total, max(min_entries, math.ceil(fraction * total)))
    picks = rng.choice(total, size=k, replace=False)
    bounds = np.cumsum(sizes)

    worst = 0.0
    with no_grad():
        for flat in picks:
            which = int(np.searchsorted(bounds, flat, side="right"))
            offset = int(flat - (bounds[which - 1] if which else 0))
            p = params[which]
            original = p.data.flat[offset]
            p.data.flat[offset] = original + h
            f_plus = model.loss(sample).item()
            p.data.flat[offset] = original - h
            f_minus = model.loss(sample).item()
            p.data.flat[offset] = original
            numeric = (f_plus - f_minus) / (2 * h)
            exact = analytic[which].flat[offset]
            err = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-6)
            worst = max(worst, err)
    return worst

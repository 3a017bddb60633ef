from .gradcheck import grad_check
from .layers import LSTM, LayerNorm, Linear, Module, stack_steps
from .optim import Adam
from .tensor import (
    Parameter,
    Tensor,
    add,
    backward,
    concat,
    dropout,
    gelu,
    layer_norm,
    matmul,
    mean,
    mse,
    mul,
    no_grad,
    relu,
    reshape,
    sigmoid,
    slice_,
    softmax,
    sub,
    sum_,
    tanh,
    transpose,
)

__all__ = [
    "Adam",
    "LSTM",
    "LayerNorm",
    "Linear",
    "Module",
    "Parameter",
    "Tensor",
    "add",
    "backward",
    "concat",
    "dropout",
    "gelu",
    "grad_check",
    "layer_norm",
    "matmul",
    "mean",
    "mse",
    "mul",
    "no_grad",
    "relu",
    "reshape",
    "sigmoid",
    "slice_",
    "softmax",
    "stack_steps",
    "sub",
    "sum_",
    "tanh",
    "transpose",
]

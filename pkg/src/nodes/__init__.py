# Selection loop nodes
from .selection import select_node
from .simulate import absorb_selection, simulate_node
from .train import train_node
from .warmup import warmup_node

__all__ = ["absorb_selection", "select_node", "simulate_node", "train_node", "warmup_node"]

"""
Warm-up node - случайный стартовый набор тестов.
"""

import logging
from typing import Any

from ..state import LoopState
from .simulate import absorb_selection

logger = logging.getLogger(__name__)


def warmup_node(state: LoopState) -> dict[str, Any]:
    """
    Draws warmup_n tests uniformly without replacement from the warm-up stream,
    which depends on the run seed only, so every method of a seed starts alike.
    """
    ctx = state["ctx"]
    candidates = state["unsimulated"]
    picks = ctx.warmup_rng.choice(len(candidates), size=ctx.config.warmup_n, replace=False)
    warm = [candidates[i] for i in picks]
    logger.info(f"{ctx.selector.name} seed={ctx.config.seed}: warm-up with {len(warm)} tests")
    return absorb_selection(state, warm, iteration=0)

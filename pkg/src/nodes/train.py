"""
Train node - переобучает селектор на всех просимулированных тестах.
"""

import logging
import time
from typing import Any

from ..state import LoopState

logger = logging.getLogger(__name__)


def train_node(state: LoopState) -> dict[str, Any]:
    """
    Refits the standardizer (unless frozen after warm-up) and retrains the
    selector from scratch on the windows of every simulated test.
    """
    ctx = state["ctx"]
    iteration = state["iteration"] + 1
    selector = ctx.selector
    if not selector.requires_training:
        ctx.timings = {"train": 0.0, "train_windows": 0}
        return {"iteration": iteration}

    started = time.perf_counter()
    if ctx.standardizer is None or not ctx.config.fit_once:
        ctx.standardizer = ctx.encoding.fit_standardizer(state["simulated"])
    windows, _ = ctx.encoding.windows(
        state["simulated"], ctx.standardizer, ctx.window, ctx.step, ctx.config.granularity
    )
    selector.fit(windows)
    ctx.timings = {"train": time.perf_counter() - started, "train_windows": len(windows)}
    logger.debug(f"{selector.name}: iteration {iteration} trained on {len(windows)} windows")
    return {"iteration": iteration}

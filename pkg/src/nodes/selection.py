"""
Select node - ранжирует непросимулированные тесты по новизне.
"""

import time
from typing import Any

from ..selectors import aggregate_owners, random_ranking, rank_tests
from ..state import LoopState


def select_node(state: LoopState) -> dict[str, Any]:
    ctx = state["ctx"]
    candidates = state["unsimulated"]
    batch = ctx.config.batch
    if not ctx.selector.requires_training:
        return {"selected": random_ranking(candidates, batch, ctx.rank_rng)}

    started = time.perf_counter()
    windows, owners = ctx.encoding.windows(candidates, ctx.standardizer, ctx.window, ctx.step, ctx.config.granularity)
    s_test = aggregate_owners(ctx.selector.score_windows(windows), owners, len(candidates))
    selected = rank_tests(dict(zip(candidates, s_test.tolist())), batch, ctx.rank_rng)
    ctx.timings["score"] = time.perf_counter() - started
    return {"selected": selected}

"""
Simulate node - прогоняет выбранные тесты через DUV и учитывает покрытие.
"""

import logging
from typing import Any

from ..state import IterationRecord, LoopState, goal_key

logger = logging.getLogger(__name__)


def absorb_selection(state: LoopState, selected: list[int], iteration: int) -> dict[str, Any]:
    """
    Absorbs the events of `selected` into the run's coverage, checkpoints and
    decides whether the loop is done.

    Args:
        state: Текущее состояние цикла
        selected: Тесты, выбранные на этой итерации (в порядке выбора)
        iteration: Номер итерации, 0 для warm-up

    Returns:
        Обновление состояния с новой записью истории
    """
    ctx = state["ctx"]
    before = ctx.coverage.covered
    for test_id in selected:
        ctx.coverage.absorb(ctx.events_for(test_id))

    chosen = set(selected)
    simulated = state["simulated"] + selected
    unsimulated = [tid for tid in state["unsimulated"] if tid not in chosen]
    tests, coverage = ctx.coverage.checkpoint(len(simulated))

    reached = dict(state["goals_reached"])
    for goal in ctx.config.goal_percent:
        if goal_key(goal) not in reached and coverage >= goal:
            reached[goal_key(goal)] = tests
            logger.info(f"{ctx.selector.name}: goal {goal:g}% reached after {tests} tests")
    last_goal = goal_key(ctx.config.goal_percent[-1]) in reached
    done = not unsimulated or (last_goal and not ctx.config.exhaust)

    record = IterationRecord(
        iteration=iteration,
        selected=selected,
        tests_simulated=tests,
        coverage_percent=coverage,
        new_products=ctx.coverage.covered - before,
        train_windows=int(ctx.timings.get("train_windows", 0)),
        selector_seconds=ctx.timings.get("train", 0.0) + ctx.timings.get("score", 0.0),
    )
    ctx.timings = {}
    logger.debug(f"{ctx.selector.name}: iteration {iteration} selected {selected}")
    if ctx.config.progress:
        print(
            f"[{ctx.selector.name} seed={ctx.config.seed}] iter {iteration}: "
            f"tests={tests} coverage={coverage:.2f}% new={record.new_products}",
            flush=True,
        )
    return {
        "simulated": simulated,
        "unsimulated": unsimulated,
        "selected": selected,
        "iteration": iteration,
        "goals_reached": reached,
        "done": done,
        "records": [record],
    }


def simulate_node(state: LoopState) -> dict[str, Any]:
    return absorb_selection(state, state["selected"], state["iteration"])

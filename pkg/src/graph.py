"""
Graph assembly - сборка цикла отбора тестов в LangGraph.

warmup -> train -> select -> simulate -> (train | END)
"""

import logging
import math
from typing import Iterable, Literal, Mapping, Optional

import numpy as np
from langgraph.graph import END, StateGraph

from .config import LoopConfig
from .coverage import CoverageState
from .duvsim import CoverageEvent
from .encode import CorpusEncoding, FeatureSchema
from .errors import ConfigurationError, EmptyCorpusError
from .nodes import select_node, simulate_node, train_node, warmup_node
from .schemas import DuvParams, Test
from .selectors import NoveltySelector
from .state import LoopState, RunContext, RunHistory, goal_key

logger = logging.getLogger(__name__)

WARMUP_STREAM = 0
RANK_STREAM = 1


def create_selection_graph():
    """
    Создает и компилирует граф цикла отбора.

    Returns:
        Compiled LangGraph application
    """
    workflow = StateGraph(LoopState)

    workflow.add_node("warmup", warmup_node)
    workflow.add_node("train", train_node)
    workflow.add_node("select", select_node)
    workflow.add_node("simulate", simulate_node)

    def route_next(state: LoopState) -> Literal["train", "__end__"]:
        """После warm-up и каждой симуляции: продолжаем или завершаем."""
        return "__end__" if state["done"] else "train"

    workflow.add_edge("train", "select")
    workflow.add_edge("select", "simulate")
    for source in ("warmup", "simulate"):
        workflow.add_conditional_edges(source, route_next, {"train": "train", "__end__": END})

    workflow.set_entry_point("warmup")
    return workflow.compile()


selection_app = create_selection_graph()


def _context(
    by_id: dict[int, Test],
    selector: NoveltySelector,
    duv_params: DuvParams,
    loop_config: LoopConfig,
    events: Optional[Mapping[int, list[CoverageEvent]]] = None,
    encoding: Optional[CorpusEncoding] = None,
    coverage: Optional[CoverageState] = None,
) -> RunContext:
    seed = loop_config.seed
    return RunContext(
        corpus=by_id,
        events=dict(events or {}),
        encoding=encoding,
        selector=selector,
        params=duv_params,
        config=loop_config,
        coverage=coverage if coverage is not None else CoverageState.for_params(duv_params),
        warmup_rng=np.random.default_rng(np.random.SeedSequence([seed, WARMUP_STREAM])),
        rank_rng=np.random.default_rng(np.random.SeedSequence([seed, RANK_STREAM])),
    )


def run(
    corpus: Iterable[Test],
    selector: NoveltySelector,
    duv_params: DuvParams,
    loop_config: LoopConfig,
    events: Optional[Mapping[int, list[CoverageEvent]]] = None,
    encoding: Optional[CorpusEncoding] = None,
    coverage: Optional[CoverageState] = None,
) -> RunHistory:
    """
    Runs the closed selection loop until every goal is met or the corpus is
    exhausted.

    Args:
        corpus: Все сгенерированные тесты
        selector: Селектор новизны (RD не обучается и ранжирует случайно)
        duv_params: Параметры DUV
        loop_config: Конфигурация цикла
        events: Заранее просимулированные события по test_id (опционально)
        encoding: Закэшированное кодирование корпуса (опционально)
        coverage: Пустое состояние покрытия (по умолчанию строится из duv_params)

    Returns:
        RunHistory с записью на каждую итерацию
    """
    tests = list(corpus)
    if not tests:
        raise EmptyCorpusError("cannot run selection on an empty corpus")
    by_id = {t.test_id: t for t in tests}
    if len(by_id) != len(tests):
        raise ConfigurationError("corpus contains duplicate test ids")
    if loop_config.warmup_n > len(tests):
        raise ConfigurationError(f"warmup_n={loop_config.warmup_n} exceeds corpus size {len(tests)}")
    if selector.requires_training and encoding is None:
        encoding = CorpusEncoding(tests, FeatureSchema.for_params(duv_params))

    seed = loop_config.seed
    ctx = _context(by_id, selector, duv_params, loop_config, events, encoding, coverage)
    initial: LoopState = {
        "ctx": ctx,
        "simulated": [],
        "unsimulated": [t.test_id for t in tests],
        "selected": [],
        "iteration": 0,
        "goals_reached": {},
        "done": False,
        "records": [],
    }
    iterations = math.ceil((len(tests) - loop_config.warmup_n) / loop_config.batch)
    logger.info(f"{selector.name} seed={seed}: run started on {len(tests)} tests")
    final = selection_app.invoke(initial, config={"recursion_limit": 3 * iterations + 8})

    history = RunHistory(
        method=selector.name,
        seed=seed,
        goals=loop_config.goal_percent,
        records=final["records"],
        tests_to_goal={goal_key(g): final["goals_reached"].get(goal_key(g)) for g in loop_config.goal_percent},
    )
    logger.info(
        f"{selector.name} seed={seed}: run finished, {history.records[-1].tests_simulated} tests, "
        f"coverage {history.final_coverage:.2f}%"
    )
    return history


def select_step(
    corpus: Iterable[Test],
    simulated: list[int],
    selector: NoveltySelector,
    duv_params: DuvParams,
    loop_config: LoopConfig,
) -> list[int]:
    """
    One train + select step outside the loop: fits on `simulated` and returns
    the next batch of test ids from the rest of the corpus.
    """
    tests = list(corpus)
    by_id = {t.test_id: t for t in tests}
    unknown = [tid for tid in simulated if tid not in by_id]
    if unknown:
        raise ConfigurationError(f"simulated ids not in corpus: {unknown[:5]}")
    if not simulated:
        raise ConfigurationError("select needs at least one simulated test")
    done = set(simulated)
    candidates = [t.test_id for t in tests if t.test_id not in done]
    if not candidates:
        return []
    encoding = CorpusEncoding(tests, FeatureSchema.for_params(duv_params)) if selector.requires_training else None
    ctx = _context(by_id, selector, duv_params, loop_config, encoding=encoding)
    state: LoopState = {
        "ctx": ctx,
        "simulated": list(simulated),
        "unsimulated": candidates,
        "selected": [],
        "iteration": 0,
        "goals_reached": {},
        "done": False,
        "records": [],
    }
    state.update(train_node(state))
    return select_node(state)["selected"]

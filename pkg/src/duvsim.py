"""
MiniSRI: transaction-level model of a pipelined crossbar.
Turns a test into a schedule trace and pipeline / parallelism / data-pacing
coverage events.
"""

import heapq
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from pydantic import BaseModel

from .schemas import BURST_KINDS, DuvParams, Test, Transaction
from .stimgen import validate_test

logger = logging.getLogger(__name__)

GROUPS = ("PIPELINE", "PARALLELISM", "PACING")
PARALLELISM_CLAMP = 8
PACING_BUCKET = 4
PARTITIONS = ("AAA", "AAB", "ABA", "ABB", "ABC")


class CoverageEvent(NamedTuple):
    group: str
    key: tuple


@dataclass(frozen=True)
class ScheduleTrace:
    request: np.ndarray
    start: np.ndarray
    end: np.ndarray
    # (master, slave) пары в полете в момент start_k, включая сам k
    in_flight: tuple[tuple[tuple[int, int], ...], ...]

    def __len__(self) -> int:
        return len(self.start)


def txn_duration(txn: Transaction) -> int:
    """Σ over beats of (1 + wait); beats past the fourth reuse w1..w4 cyclically."""
    waits = txn.waits
    return sum(1 + waits[i % 4] for i in range(txn.burst_len))


def simulate(test: Test, params: DuvParams) -> ScheduleTrace:
    validate_test(test, params)
    n = len(test.txns)
    request = np.zeros(n, dtype=np.int64)
    start = np.zeros(n, dtype=np.int64)
    end = np.zeros(n, dtype=np.int64)

    # Для каждого slave храним D наибольших end и последний start (FIFO)
    top_ends: dict[int, list[int]] = {}
    last_start: dict[int, int] = {}
    clock = 0
    for k, txn in enumerate(test.txns):
        clock += txn.gap
        request[k] = clock
        ends = top_ends.setdefault(txn.slave, [])
        free_at = ends[0] if len(ends) >= params.D else 0
        start[k] = max(clock, last_start.get(txn.slave, 0), free_at)
        end[k] = start[k] + txn_duration(txn)
        last_start[txn.slave] = int(start[k])
        heapq.heappush(ends, int(end[k]))
        if len(ends) > params.D:
            heapq.heappop(ends)

    masters = np.array([t.master for t in test.txns])
    slaves = np.array([t.slave for t in test.txns])
    in_flight = []
    for k in range(n):
        mask = (start <= start[k]) & (end > start[k])
        idx = np.flatnonzero(mask)
        in_flight.append(tuple((int(masters[j]), int(slaves[j])) for j in idx))
    return ScheduleTrace(request=request, start=start, end=end, in_flight=tuple(in_flight))


def master_partition(masters: Iterable[int]) -> str:
    """Canonical equality pattern, e.g. (2, 0, 2) -> 'ABA'."""
    labels: dict[int, str] = {}
    out = []
    for m in masters:
        if m not in labels:
            labels[m] = "ABC"[len(labels)]
        out.append(labels[m])
    return "".join(out)


def pacing_key(txn: Transaction) -> tuple:
    values = tuple(w if i < txn.burst_len else -1 for i, w in enumerate(txn.waits))
    return (txn.burst_kind, min(txn.burst_len, PACING_BUCKET), *values)


def parallelism_key(pairs: tuple[tuple[int, int], ...]) -> tuple:
    masters = {m for m, _ in pairs}
    slaves = {s for _, s in pairs}
    return (min(len(pairs), PARALLELISM_CLAMP), len(masters), len(slaves))


def coverage_events(trace: ScheduleTrace, test: Test, params: DuvParams) -> list[CoverageEvent]:
    events: list[CoverageEvent] = []
    history: dict[int, deque] = {}
    for k, txn in enumerate(test.txns):
        recent = history.setdefault(txn.slave, deque(maxlen=3))
        recent.append((txn.ttype[0], txn.master))
        if len(recent) == 3:
            pattern = "".join(t for t, _ in recent)
            events.append(CoverageEvent("PIPELINE", (txn.slave, pattern, master_partition(m for _, m in recent))))
        events.append(CoverageEvent("PARALLELISM", parallelism_key(trace.in_flight[k])))
        events.append(CoverageEvent("PACING", pacing_key(txn)))
    return events


def enumerate_products(params: DuvParams) -> set[CoverageEvent]:
    """The exact universe of keys reachable under the key rules."""
    products: set[CoverageEvent] = set()

    for slave in range(params.S):
        for pattern in itertools.product("RW", repeat=3):
            for part in PARTITIONS:
                if len(set(part)) <= params.M:
                    products.add(CoverageEvent("PIPELINE", (slave, "".join(pattern), part)))

    for count in range(1, params.S * params.D + 1):
        for n_masters in range(1, min(params.M, count) + 1):
            # count транзакций помещаются минимум в ceil(count/D) slave
            for n_slaves in range(-(-count // params.D), min(params.S, count) + 1):
                products.add(CoverageEvent("PARALLELISM", (min(count, PARALLELISM_CLAMP), n_masters, n_slaves)))

    lengths = {
        "SINGLE": (1,),
        "INCR": tuple(range(1, params.B + 1)),
        "WRAP": params.wrap_lengths(),
    }
    for kind in BURST_KINDS:
        for burst_len in lengths[kind]:
            slots = [range(params.W + 1) if i < burst_len else (-1,) for i in range(4)]
            for values in itertools.product(*slots):
                products.add(CoverageEvent("PACING", (kind, min(burst_len, PACING_BUCKET), *values)))
    return products


def simulate_corpus(corpus: Iterable[Test], params: DuvParams) -> dict[int, list[CoverageEvent]]:
    return {test.test_id: coverage_events(simulate(test, params), test, params) for test in corpus}


class EventRecord(BaseModel):
    group: str
    key: list[int | str]


class EventsLine(BaseModel):
    """One line of an events JSONL file."""

    test_id: int
    events: list[EventRecord]


def save_events(path: str | Path, events_by_test: Mapping[int, list[CoverageEvent]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for test_id, events in events_by_test.items():
            record = EventsLine(test_id=test_id, events=[EventRecord(group=e.group, key=list(e.key)) for e in events])
            f.write(record.model_dump_json())
            f.write("\n")


def load_events(path: str | Path) -> dict[int, list[CoverageEvent]]:
    events_by_test: dict[int, list[CoverageEvent]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                record = EventsLine.model_validate_json(line)
                events_by_test[record.test_id] = [CoverageEvent(e.group, tuple(e.key)) for e in record.events]
    return events_by_test

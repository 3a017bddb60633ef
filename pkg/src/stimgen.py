"""
Stimulus generation: reproducible corpora of bus tests mixing an unconstrained
random profile with biased profiles that reach rare coverage.
"""

import logging
import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from pydantic import ValidationError

from .errors import ConfigurationError, CorpusParseError, EmptyCorpusError, StimulusValidationError
from .schemas import (
    BURST_KINDS,
    MAX_GAP,
    PRIORITIES,
    PROFILE_ALIASES,
    PROFILE_NAMES,
    TTYPES,
    WIDTHS,
    DuvParams,
    GenProfile,
    Test,
    Transaction,
)

logger = logging.getLogger(__name__)

# Вероятность wait = w падает как decay**w
UNIFORM_WAIT_DECAY = 0.25
BURSTY_WAIT_DECAY = 0.65


def _uniform(k: int) -> tuple[float, ...]:
    return tuple([1.0 / k] * k)


def _normalized(weights: Iterable[float]) -> tuple[float, ...]:
    w = [float(x) for x in weights]
    total = sum(w)
    return tuple(x / total for x in w)


def get_profile(name: str, params: DuvParams | None = None) -> GenProfile:
    """
    Builds one of the built-in profiles for the given DUV parameters.

    UNIFORM        every categorical, address and data field uniform; timing
                   fields follow a light-load generator (each extra wait cycle
                   is four times less likely, gaps uniform).
    BURSTY         back-to-back long INCR/WRAP bursts; waits decay gently
                   (x0.65 per extra cycle), so deep stall patterns show up only
                   across many bursty tests. Drives deep pipelines and wide
                   parallelism.
    SPARSE_PACING  almost all waits zero, the rest at the maximum stall W.
    """
    params = params or DuvParams()
    name = PROFILE_ALIASES.get(name, name)
    lengths = range(1, params.B + 1)
    wraps = params.wrap_lengths() or (1,)
    base = {
        "ttype": _uniform(len(TTYPES)),
        "master": _uniform(params.M),
        "slave": _uniform(params.S),
        "priority": _uniform(len(PRIORITIES)),
        "width": _uniform(len(WIDTHS)),
        "gap": _uniform(MAX_GAP + 1),
        "incr_len": _uniform(params.B),
        "wrap_len": _uniform(len(wraps)),
    }
    if name == "UNIFORM":
        weights = {
            **base,
            "burst_kind": _uniform(len(BURST_KINDS)),
            "wait": _normalized(UNIFORM_WAIT_DECAY**w for w in range(params.W + 1)),
        }
    elif name == "BURSTY":
        weights = {
            **base,
            "burst_kind": (0.05, 0.55, 0.40),
            "priority": (0.3, 0.7),
            "gap": _normalized([0.85, 0.10, 0.05] + [0.0] * (MAX_GAP - 2)),
            "incr_len": _normalized(lengths),
            "wrap_len": _normalized(wraps),
            "wait": _normalized(BURSTY_WAIT_DECAY**w for w in range(params.W + 1)),
        }
    elif name == "SPARSE_PACING":
        weights = {
            **base,
            "burst_kind": (0.2, 0.5, 0.3),
            "wait": _normalized([0.93] + [0.0] * (params.W - 1) + [0.07]),
        }
    else:
        raise ConfigurationError(f"unknown profile '{name}', expected one of {PROFILE_NAMES}")
    return GenProfile(name=name, weights=weights)


def _check_support(profile: GenProfile, params: DuvParams) -> None:
    expected = {
        "ttype": len(TTYPES),
        "master": params.M,
        "slave": params.S,
        "burst_kind": len(BURST_KINDS),
        "priority": len(PRIORITIES),
        "width": len(WIDTHS),
        "incr_len": params.B,
        "wrap_len": max(len(params.wrap_lengths()), 1),
        "gap": MAX_GAP + 1,
        "wait": params.W + 1,
    }
    for key, size in expected.items():
        if len(profile.weights[key]) != size:
            raise ConfigurationError(
                f"profile {profile.name}: '{key}' has {len(profile.weights[key])} entries, params imply {size}"
            )


def _check_len_range(len_range: tuple[int, int]) -> tuple[int, int]:
    lo, hi = int(len_range[0]), int(len_range[1])
    if not 1 <= lo <= hi:
        raise ConfigurationError(f"invalid length range [{lo},{hi}]: need 1 <= lo <= hi")
    return lo, hi


def gen_test(
    seed: int,
    profile: GenProfile,
    len_range: tuple[int, int],
    params: DuvParams | None = None,
    test_id: int = 0,
) -> Test:
    """Generates one test; a pure function of its arguments."""
    params = params or DuvParams()
    lo, hi = _check_len_range(len_range)
    _check_support(profile, params)

    rng = np.random.default_rng(seed)
    n = int(rng.integers(lo, hi + 1))
    w = profile.weights

    def draw(key: str, size: int | tuple[int, int] = n) -> np.ndarray:
        return rng.choice(len(w[key]), size=size, p=w[key])

    ttype = draw("ttype")
    master = draw("master")
    slave = draw("slave")
    kind = draw("burst_kind")
    priority = draw("priority")
    width = draw("width")
    incr_len = draw("incr_len") + 1
    wraps = params.wrap_lengths()
    wrap_idx = draw("wrap_len")
    gap = draw("gap")
    waits = draw("wait", (n, 4))
    addr = rng.integers(0, 65536, size=n)
    data = rng.integers(0, 256, size=n)
    tag = rng.integers(0, 16, size=n)

    txns = []
    for k in range(n):
        burst_kind = BURST_KINDS[kind[k]]
        if burst_kind == "WRAP" and not wraps:
            # B < 2: WRAP невозможен, заменяем на INCR
            burst_kind = "INCR"
        if burst_kind == "SINGLE":
            burst_len = 1
        elif burst_kind == "WRAP":
            burst_len = wraps[wrap_idx[k]]
        else:
            burst_len = int(incr_len[k])
        txns.append(
            Transaction(
                ttype=TTYPES[ttype[k]],
                master=int(master[k]),
                slave=int(slave[k]),
                burst_kind=burst_kind,
                priority=PRIORITIES[priority[k]],
                burst_len=burst_len,
                addr=int(addr[k]),
                gap=int(gap[k]),
                w1=int(waits[k, 0]),
                w2=int(waits[k, 1]),
                w3=int(waits[k, 2]),
                w4=int(waits[k, 3]),
                data=int(data[k]),
                tag=int(tag[k]),
                width=WIDTHS[width[k]],
            )
        )
    return Test(test_id=test_id, txns=tuple(txns))


def parse_mix(text: str) -> dict[str, float]:
    """Parses 'uniform=0.78,bursty=0.11,sparse=0.11' into a profile → fraction map."""
    mix: dict[str, float] = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, value = part.partition("=")
        if not sep:
            raise ConfigurationError(f"mix entry '{part}' is not name=fraction")
        key = PROFILE_ALIASES.get(name.strip().lower(), name.strip().upper())
        if key not in PROFILE_NAMES:
            raise ConfigurationError(f"unknown profile '{name}' in mix")
        try:
            mix[key] = float(value)
        except ValueError as e:
            raise ConfigurationError(f"mix fraction '{value}' is not a number") from e
    return mix


def split_counts(n_tests: int, mix: Mapping[str, float]) -> dict[str, int]:
    """Per-profile counts: floor of fraction·n plus largest-remainder correction."""
    if n_tests < 1:
        raise ConfigurationError(f"corpus needs at least one test, got n_tests={n_tests}")
    if not mix:
        raise ConfigurationError("empty profile mix")
    if any(f < 0 for f in mix.values()):
        raise ConfigurationError(f"negative fraction in mix {dict(mix)}")
    total = math.fsum(mix.values())
    if abs(total - 1.0) > 1e-9:
        raise ConfigurationError(f"mix fractions sum to {total}, expected 1")

    names = list(mix)
    exact = [mix[k] * n_tests for k in names]
    counts = [math.floor(x) for x in exact]
    short = n_tests - sum(counts)
    # Остаток отдаем профилям с наибольшей дробной частью (при равенстве - по порядку в mix)
    order = sorted(range(len(names)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return dict(zip(names, counts))


def gen_corpus(
    seed: int,
    n_tests: int,
    mix: Mapping[str, float],
    len_range: tuple[int, int],
    params: DuvParams | None = None,
) -> list[Test]:
    """Generates n_tests tests with ids 0..n_tests-1, profiles interleaved by a seeded shuffle."""
    params = params or DuvParams()
    mix = {PROFILE_ALIASES.get(k, k): v for k, v in mix.items()}
    counts = split_counts(n_tests, mix)
    _check_len_range(len_range)
    profiles = {name: get_profile(name, params) for name in counts}

    labels = np.array([name for name, c in counts.items() for _ in range(c)], dtype=object)
    labels = labels[np.random.default_rng(seed).permutation(n_tests)]

    corpus = []
    for test_id, name in enumerate(labels):
        test_seed = int(np.random.SeedSequence([seed, test_id]).generate_state(1)[0])
        corpus.append(gen_test(test_seed, profiles[name], len_range, params, test_id=test_id))
    logger.info(f"Generated corpus: seed={seed} n={n_tests} split={counts}")
    return corpus


def validate_test(test: Test, params: DuvParams) -> None:
    """Raises StimulusValidationError naming the first transaction outside the params ranges."""
    for index, txn in enumerate(test.txns):
        problem = txn.range_violation(params)
        if problem:
            raise StimulusValidationError(index, problem)


def save_corpus(path: str | Path, corpus: Iterable[Test]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for test in corpus:
            f.write(test.model_dump_json())
            f.write("\n")


def load_corpus(path: str | Path) -> list[Test]:
    """Reads a JSONL corpus; malformed records raise CorpusParseError with the line number."""
    corpus: list[Test] = []
    seen: set[int] = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                test = Test.model_validate_json(line)
            except ValidationError as e:
                raise CorpusParseError(line_no, e.errors()[0]["msg"]) from e
            if test.test_id in seen:
                raise CorpusParseError(line_no, f"duplicate test_id {test.test_id}")
            seen.add(test.test_id)
            corpus.append(test)
    if not corpus:
        raise EmptyCorpusError(f"corpus file {path} holds no tests")
    return corpus

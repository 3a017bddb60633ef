"""
Multi-method, multi-seed experiment runner.

Every (method, seed) pair is an independent selection run on the same corpus;
runs of one seed share the warm-up set. Results are aggregated into
curves.csv, table.csv, costs.csv, curves.svg and summary.md under the output directory.
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from ..config import ExperimentConfig  # noqa: E402
from ..coverage import CoverageState  # noqa: E402
from ..duvsim import CoverageEvent, simulate_corpus  # noqa: E402
from ..graph import run  # noqa: E402
from ..schemas import Test  # noqa: E402
from ..selectors import create_selector  # noqa: E402
from ..state import RunHistory  # noqa: E402
from ..stimgen import gen_corpus, load_corpus  # noqa: E402
from ..utils import echo_config  # noqa: E402
from .stats import average_curve, describe, net_savings, savings, sign_test, tests_to_goal  # noqa: E402

logger = logging.getLogger(__name__)

BASELINE = "RD"
FLOAT_FORMAT = "%.6f"
TABLE_COLUMNS = [
    "method",
    "goal",
    "runs",
    "reached",
    "not_reached",
    "mean_tests",
    "median_tests",
    "q1_tests",
    "q3_tests",
    "iqr_tests",
    "mean_raw_tests",
    "savings_tests",
    "savings_percent",
    "ratio_to_best",
    "selector_hours",
    "net_savings_hours",
    "sign_test_p",
]
# Wall-clock columns; kept out of table.csv so reruns compare value-identically
COST_COLUMNS = ["method", "goal", "selector_hours", "net_savings_hours"]


def build_corpus(config: ExperimentConfig) -> list[Test]:
    spec = config.corpus
    if spec.path:
        return load_corpus(spec.path)
    return gen_corpus(spec.seed, spec.n_tests, spec.mix, spec.len_range, config.duv)


def run_one(
    config: ExperimentConfig,
    corpus: list[Test],
    events: dict[int, list[CoverageEvent]],
    method: str,
    seed: int,
    progress: bool = False,
) -> RunHistory:
    """One selection run; a top-level function so worker processes can unpickle it."""
    loop_config = config.loop.model_copy(
        update={"seed": seed, "selector": method, "goal_percent": config.goals, "progress": progress}
    )
    selector = create_selector(method, loop_config.hyper, seed)
    return run(corpus, selector, config.duv, loop_config, events=events)


async def _fan_out(tasks: list[tuple], jobs: int) -> list[RunHistory]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [loop.run_in_executor(pool, run_one, *task) for task in tasks]
        # Ждем завершения всех прогонов (join barrier)
        return await asyncio.gather(*futures)


def run_all(
    config: ExperimentConfig,
    corpus: list[Test],
    events: dict[int, list[CoverageEvent]],
    jobs: int = 1,
    progress: bool = False,
) -> list[RunHistory]:
    tasks = [(config, corpus, events, method, seed, progress) for method in config.methods for seed in config.run_seeds()]
    logger.info(f"Running {len(tasks)} selection runs with jobs={jobs}")
    if jobs <= 1:
        return [run_one(*task) for task in tasks]
    return asyncio.run(_fan_out(tasks, jobs))


def curves_frame(histories: list[RunHistory]) -> pd.DataFrame:
    rows = [
        {"method": h.method, "seed": h.seed, "tests": r.tests_simulated, "coverage": r.coverage_percent}
        for h in histories
        for r in h.records
    ]
    return pd.DataFrame(rows, columns=["method", "seed", "tests", "coverage"])


def _selector_hours_to(history: RunHistory, tests: int) -> float:
    """Selector time spent up to and including the iteration that reached `tests`."""
    seconds = sum(r.selector_seconds for r in history.records if r.tests_simulated <= tests)
    return seconds / 3600.0


def build_table(histories: list[RunHistory], config: ExperimentConfig) -> pd.DataFrame:
    methods = list(dict.fromkeys(h.method for h in histories))
    rows = []
    for goal in config.goals:
        per_method = {}
        for method in methods:
            runs = [h for h in histories if h.method == method]
            hits = {h.seed: tests_to_goal(h.curve(), goal) for h in runs}
            reached = [h for h in runs if hits[h.seed].reached]
            stats = describe([hits[h.seed].interpolated for h in reached])
            raw = describe([hits[h.seed].raw for h in reached])
            hours = describe([_selector_hours_to(h, hits[h.seed].raw) for h in reached])["mean"]
            per_method[method] = (runs, hits, stats, raw, hours)

        reached_means = [v[2]["mean"] for v in per_method.values() if not pd.isna(v[2]["mean"])]
        best = min(reached_means) if reached_means else float("nan")
        baseline = per_method.get(BASELINE)
        for method, (runs, hits, stats, raw, hours) in per_method.items():
            row = {
                "method": method,
                "goal": goal,
                "runs": len(runs),
                "reached": sum(1 for hit in hits.values() if hit.reached),
                "not_reached": sum(1 for hit in hits.values() if not hit.reached),
                "mean_tests": stats["mean"],
                "median_tests": stats["median"],
                "q1_tests": stats["q1"],
                "q3_tests": stats["q3"],
                "iqr_tests": stats["iqr"],
                "mean_raw_tests": raw["mean"],
                "savings_tests": float("nan"),
                "savings_percent": float("nan"),
                "ratio_to_best": stats["mean"] / best if best == best and best > 0 else float("nan"),
                "selector_hours": hours,
                "net_savings_hours": float("nan"),
                "sign_test_p": float("nan"),
            }
            if baseline is not None and not pd.isna(stats["mean"]) and not pd.isna(baseline[2]["mean"]):
                saved, percent = savings(baseline[2]["mean"], stats["mean"])
                row["savings_tests"] = saved
                row["savings_percent"] = percent
                row["net_savings_hours"] = net_savings(saved, config.per_test_sim_minutes, hours)
                paired = [s for s, hit in hits.items() if hit.reached and s in baseline[1] and baseline[1][s].reached]
                if method != BASELINE and paired:
                    row["sign_test_p"] = sign_test(
                        [hits[s].interpolated for s in paired], [baseline[1][s].interpolated for s in paired]
                    )
            rows.append(row)
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def plot_curves(histories: list[RunHistory], path: Path) -> None:
    plt.rcParams["svg.hashsalt"] = "covsteer"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for method in dict.fromkeys(h.method for h in histories):
        grid, mean = average_curve([h.curve() for h in histories if h.method == method])
        ax.plot(grid, mean, label=method, linewidth=1.4)
    ax.set_xlabel("Number of simulated tests")
    ax.set_ylabel("Coverage (%)")
    ax.set_title("Coverage progress vs. simulated tests")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _replayed_coverage(history: RunHistory, corpus_events: dict[int, list[CoverageEvent]], config: ExperimentConfig) -> CoverageState:
    state = CoverageState.for_params(config.duv)
    for test_id in history.selected_order():
        state.absorb(corpus_events[test_id])
    return state


def _fmt(value: float, digits: int = 1) -> str:
    return "-" if pd.isna(value) else f"{value:.{digits}f}"


def write_summary(
    path: Path,
    table: pd.DataFrame,
    histories: list[RunHistory],
    events: dict[int, list[CoverageEvent]],
    config: ExperimentConfig,
) -> None:
    lines = ["# Experiment summary", ""]
    lines.append(
        f"Corpus: {config.corpus.path or f'generated, seed {config.corpus.seed}, {config.corpus.n_tests} tests'}; "
        f"warm-up {config.loop.warmup_n}, batch {config.loop.batch}, seeds {config.run_seeds()}."
    )
    lines.append("")
    footnotes = []
    for goal, block in table.groupby("goal", sort=False):
        lines += [f"## Goal {goal:g}%", ""]
        lines.append("| method | mean tests | median | IQR | savings vs RD | net savings (h) | sign test p |")
        lines.append("|---|---|---|---|---|---|---|")
        for _, row in block.iterrows():
            mark = ""
            if row["not_reached"]:
                footnotes.append(f"{row['method']} @ {goal:g}%: {int(row['not_reached'])} of {int(row['runs'])} runs did not reach the goal")
                mark = f" [{len(footnotes)}]"
            saved = "-" if pd.isna(row["savings_tests"]) else f"{row['savings_tests']:.1f} ({row['savings_percent']:.2f}%)"
            lines.append(
                f"| {row['method']}{mark} | {_fmt(row['mean_tests'])} | {_fmt(row['median_tests'])} | "
                f"{_fmt(row['iqr_tests'])} | {saved} | {_fmt(row['net_savings_hours'], 2)} | {_fmt(row['sign_test_p'], 4)} |"
            )
        lines.append("")
    if footnotes:
        lines += ["Not reached:", ""] + [f"[{i}] {note}" for i, note in enumerate(footnotes, 1)] + [""]

    lines += ["## Final coverage (first seed)", ""]
    first_seed = config.run_seeds()[0]
    for history in histories:
        if history.seed != first_seed:
            continue
        state = _replayed_coverage(history, events, config)
        groups = ", ".join(f"{g} {c}/{t}" for g, (c, t) in state.group_summary().items())
        rarity = ", ".join(f"{k}: {v}" for k, v in state.rarity_histogram().items())
        lines.append(f"- {history.method}: {state.coverage_percent():.2f}% ({groups}); hit counts {rarity}")
    lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path,
    jobs: int = 1,
    progress: bool = False,
    corpus: Optional[list[Test]] = None,
) -> pd.DataFrame:
    """
    Runs every method for every seed, writes all artifacts into out_dir and
    returns the result table.

    Args:
        config: Конфигурация эксперимента
        out_dir: Каталог для результатов
        jobs: Число параллельных процессов (1 - последовательно, воспроизводимо побайтно)
        progress: Печатать строку прогресса на каждой итерации
        corpus: Готовый корпус (иначе строится по config.corpus)
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    echo_config(out, config)

    corpus = corpus if corpus is not None else build_corpus(config)
    events = simulate_corpus(corpus, config.duv)
    histories = run_all(config, corpus, events, jobs=jobs, progress=progress)
    for history in histories:
        history.save(out / "runs" / f"{history.method}_{history.seed}")

    curves = curves_frame(histories)
    curves.to_csv(out / "curves.csv", index=False, float_format=FLOAT_FORMAT)
    table = build_table(histories, config)
    table.drop(columns=COST_COLUMNS[2:]).to_csv(out / "table.csv", index=False, float_format=FLOAT_FORMAT)
    table[COST_COLUMNS].to_csv(out / "costs.csv", index=False, float_format=FLOAT_FORMAT)
    plot_curves(histories, out / "curves.svg")
    write_summary(out / "summary.md", table, histories, events, config)

    for _, row in table[table["not_reached"] > 0].iterrows():
        logger.warning(f"{row['method']}: goal {row['goal']:g}% not reached in {int(row['not_reached'])} runs")
    logger.info(f"Experiment finished: {len(histories)} runs written to {out}")
    return table

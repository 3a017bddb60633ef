import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from src.config import HIGH_GOALS, ExperimentConfig
from src.harness import (
    average_curve,
    describe,
    format_report,
    net_savings,
    report,
    run_experiment,
    savings,
    sign_test,
)
from src.harness import stats
from src.harness.experiment import TABLE_COLUMNS
from src.harness.report import load_curves
from src.utils import default_jobs, load_config

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "default.json"


def small_config(**overrides) -> ExperimentConfig:
    fields = {
        "methods": ["RD", "IF"],
        "repeats": 2,
        "seed": 0,
        "corpus": {"seed": 3, "n_tests": 30, "len_range": [6, 14]},
        "loop": {"warmup_n": 6, "batch": 6, "hyper": {"trees": 20, "subsample": 64}},
        "goals": [10.0, 99.0],
    }
    fields.update(overrides)
    return ExperimentConfig.model_validate(fields)


@pytest.fixture(scope="module")
def experiment(tmp_path_factory):
    out = tmp_path_factory.mktemp("exp")
    table = run_experiment(small_config(), out, jobs=1)
    return out, table


class TestArithmetic:
    def test_savings(self):
        saved, percent = savings(4735, 3461)
        assert saved == 1274
        assert percent == pytest.approx(26.906, abs=1e-3)

    @pytest.mark.parametrize("saved, hours, expected", [(1274, 0.27, 254.53), (211, 0.59, 41.61)])
    def test_net_savings(self, saved, hours, expected):
        assert net_savings(saved, 12, hours) == pytest.approx(expected)

    def test_baseline_saves_nothing(self):
        assert savings(500.0, 500.0) == (0.0, 0.0)


class TestTestsToGoal:
    CURVE = [(50, 80.0), (150, 90.0), (250, 96.0)]

    def test_interpolates_inside_crossing_batch(self):
        hit = stats.tests_to_goal(self.CURVE, 95.0)
        assert hit.raw == 250
        assert hit.interpolated == pytest.approx(700 / 3)

    def test_goal_met_at_first_checkpoint(self):
        hit = stats.tests_to_goal(self.CURVE, 80.0)
        assert (hit.raw, hit.interpolated) == (50, 50.0)

    def test_not_reached(self):
        hit = stats.tests_to_goal(self.CURVE, 97.0)
        assert not hit.reached and hit.interpolated is None

    def test_flat_segment(self):
        assert stats.tests_to_goal([(10, 90.0), (20, 90.0)], 90.0).raw == 10


class TestStatistics:
    def test_sign_test_all_wins(self):
        method = [100.0] * 10
        baseline = [120.0] * 10
        assert sign_test(method, baseline) == pytest.approx(0.5**10)

    def test_sign_test_ties_only(self):
        assert sign_test([1, 2, 3], [1, 2, 3]) == 1.0

    def test_sign_test_drops_ties(self):
        # 3 wins out of 3 informative pairs
        assert sign_test([1, 1, 1, 5], [2, 2, 2, 5]) == pytest.approx(0.125)

    def test_describe(self):
        summary = describe([1.0, 2.0, 3.0, 4.0])
        assert summary == pytest.approx({"mean": 2.5, "median": 2.5, "q1": 1.75, "q3": 3.25, "iqr": 1.5})

    def test_describe_empty(self):
        assert all(math.isnan(v) for v in describe([]).values())

    def test_average_curve_holds_last_value(self):
        grid, mean = average_curve([[(0, 0.0), (10, 50.0)], [(0, 10.0), (5, 40.0)]])
        np.testing.assert_allclose(grid, [0, 5, 10])
        np.testing.assert_allclose(mean, [5.0, 32.5, 45.0])


class TestExperimentConfig:
    def test_run_seeds(self):
        assert small_config().run_seeds() == [0, 1]
        assert small_config(seeds=[7, 9]).run_seeds() == [7, 9]

    def test_seed_count_must_match_repeats(self):
        with pytest.raises(ValidationError):
            small_config(seeds=[1, 2, 3])

    def test_duplicate_methods(self):
        with pytest.raises(ValidationError):
            small_config(methods=["RD", "RD"])

    def test_goal_preset(self):
        assert small_config(goals="high").goals == HIGH_GOALS

    @pytest.mark.parametrize("goals", [[97.0, 95.0], [0.0], [101.0], []])
    def test_bad_goals(self, goals):
        with pytest.raises(ValidationError):
            small_config(goals=goals)

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            small_config(methods=["RD", "GAN"])


class TestRunExperiment:
    def test_artifacts(self, experiment):
        out, _ = experiment
        for name in ("config.json", "curves.csv", "table.csv", "costs.csv", "curves.svg", "summary.md"):
            assert (out / name).is_file(), name
        runs = sorted(p.name for p in (out / "runs").iterdir())
        assert runs == ["IF_0", "IF_1", "RD_0", "RD_1"]
        assert (out / "runs" / "IF_0" / "history.jsonl").is_file()

    def test_table_layout(self, experiment):
        out, table = experiment
        assert list(table.columns) == TABLE_COLUMNS
        written = pd.read_csv(out / "table.csv")
        assert "selector_hours" not in written.columns
        assert "net_savings_hours" not in written.columns
        costs = pd.read_csv(out / "costs.csv")
        assert list(costs.columns) == ["method", "goal", "selector_hours", "net_savings_hours"]

    def test_baseline_row(self, experiment):
        _, table = experiment
        rd = table[(table["method"] == "RD") & (table["goal"] == 10.0)].iloc[0]
        assert rd["reached"] == 2
        assert rd["savings_tests"] == 0.0
        assert math.isnan(rd["sign_test_p"])

    def test_unreached_goal(self, experiment):
        out, table = experiment
        rows = table[table["goal"] == 99.0]
        assert (rows["not_reached"] == 2).all()
        assert rows["mean_tests"].isna().all()
        summary = (out / "summary.md").read_text()
        assert "## Goal 10%" in summary
        assert "Not reached:" in summary

    def test_config_echo_round_trip(self, experiment):
        out, _ = experiment
        assert load_config(out / "config.json", ExperimentConfig) == small_config()

    def test_sequential_reruns_are_identical(self, experiment, tmp_path):
        out, _ = experiment
        run_experiment(small_config(), tmp_path, jobs=1)
        for name in ("table.csv", "curves.csv", "curves.svg", "config.json"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes(), name

    def test_parallel_run_matches(self, experiment, tmp_path):
        out, _ = experiment
        run_experiment(small_config(), tmp_path, jobs=2)
        assert (tmp_path / "table.csv").read_bytes() == (out / "table.csv").read_bytes()

    def test_given_corpus_is_used(self, tmp_path, small_corpus):
        table = run_experiment(small_config(methods=["RD"], repeats=1), tmp_path, corpus=small_corpus[:12])
        curves = pd.read_csv(tmp_path / "curves.csv")
        assert curves["tests"].max() <= 12
        assert len(table) == 2


class TestReport:
    def test_matches_table(self, experiment):
        out, table = experiment
        frame = report(out, [10.0])
        assert (out / "report_goal_10.csv").is_file()
        expected = table[table["goal"] == 10.0].set_index("method")["mean_tests"]
        for _, row in frame.iterrows():
            assert row["mean_tests"] == pytest.approx(expected[row["method"]], rel=1e-3)

    def test_format(self, experiment):
        out, _ = experiment
        text = format_report(report(out, [10.0, 99.0], write=False))
        assert "Tests to 10% coverage:" in text
        assert "not reached (2 runs)" in text

    def test_missing_curves(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_curves(tmp_path)


def _tests_to_goal_by_seed(curves: pd.DataFrame, method: str, goal: float) -> dict[int, float]:
    """Interpolated tests-to-goal per seed; an unreached goal counts as infinitely many tests."""
    out = {}
    for seed, run in curves[curves["method"] == method].groupby("seed"):
        hit = stats.tests_to_goal(list(zip(run["tests"].tolist(), run["coverage"].tolist())), goal)
        out[int(seed)] = hit.interpolated if hit.reached else math.inf
    return out


@pytest.mark.slow
class TestDefaultBenchmark:
    """The shipped benchmark: 2000-test mixed corpus, warm-up 50, batch 100, 10 paired seeds."""

    @pytest.fixture(scope="class")
    def benchmark(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("benchmark")
        config = load_config(DEFAULT_CONFIG, ExperimentConfig)
        table = run_experiment(config, out, jobs=default_jobs())
        return table, load_curves(out)

    @pytest.mark.parametrize("method", ["AE", "IF", "TE", "LSTM"])
    def test_novelty_beats_random_at_90(self, benchmark, method):
        _, curves = benchmark
        rd = _tests_to_goal_by_seed(curves, "RD", 90.0)
        ours = _tests_to_goal_by_seed(curves, method, 90.0)
        wins = sum(ours[s] < rd[s] for s in rd)
        assert wins >= 7, f"{method} beat RD on {wins}/10 seeds"

    def test_lstm_median_savings_at_95(self, benchmark):
        _, curves = benchmark
        rd = np.median(list(_tests_to_goal_by_seed(curves, "RD", 95.0).values()))
        lstm = np.median(list(_tests_to_goal_by_seed(curves, "LSTM", 95.0).values()))
        assert lstm <= 0.85 * rd

    def test_lstm_sign_test_at_95(self, benchmark):
        table, _ = benchmark
        row = table[(table["method"] == "LSTM") & (table["goal"] == 95.0)].iloc[0]
        assert row["sign_test_p"] < 0.05

    def test_closure_takes_several_batches(self, benchmark):
        _, curves = benchmark
        # хотя бы один прогон LSTM доходит до последней цели не за первый батч
        assert curves.loc[curves["method"] == "LSTM", "tests"].max() > 150
        lstm = curves[curves["method"] == "LSTM"].set_index(["seed", "tests"])["coverage"]
        te = curves[curves["method"] == "TE"].set_index(["seed", "tests"])["coverage"]
        assert not lstm.equals(te)

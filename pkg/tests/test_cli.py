import json
from pathlib import Path

import pytest

from src.cli import build_parser, main
from src.config import ExperimentConfig
from src.stimgen import load_corpus
from src.utils import load_config


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("COVSTEER_SEED", "COVSTEER_JOBS", "COVSTEER_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.jsonl"
    assert main(["gen", "--seed", "1", "--n", "20", "--out", str(path), "--len-range", "6", "12"]) == 0
    return path


def _exp_config(tmp_path, **overrides):
    config = {
        "methods": ["RD", "IF"],
        "repeats": 2,
        "corpus": {"seed": 3, "n_tests": 24, "len_range": [6, 12]},
        "loop": {"warmup_n": 6, "batch": 6, "hyper": {"trees": 20, "subsample": 64}},
        "goals": [10.0, 99.0],
    }
    config.update(overrides)
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(config))
    return path


class TestGen:
    def test_writes_corpus(self, tmp_path):
        out = tmp_path / "c.jsonl"
        assert main(["gen", "--seed", "1", "--n", "10", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 10
        echoed = json.loads((tmp_path / "c.config.json").read_text())
        assert echoed["command"] == "gen" and echoed["seed"] == 1

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        explicit = tmp_path / "explicit.jsonl"
        from_env = tmp_path / "env.jsonl"
        main(["gen", "--seed", "5", "--n", "4", "--out", str(explicit)])
        monkeypatch.setenv("COVSTEER_SEED", "5")
        main(["gen", "--n", "4", "--out", str(from_env)])
        assert load_corpus(explicit) == load_corpus(from_env)

    def test_zero_tests(self, tmp_path, capsys):
        assert main(["gen", "--n", "0", "--out", str(tmp_path / "c.jsonl")]) == 1
        assert "--n" in capsys.readouterr().err

    def test_bad_mix(self, tmp_path):
        assert main(["gen", "--n", "3", "--out", str(tmp_path / "c.jsonl"), "--mix", "golden=1.0"]) == 1


class TestParsing:
    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "gen" in capsys.readouterr().out

    def test_unknown_flag(self, tmp_path):
        assert main(["gen", "--n", "3", "--out", str(tmp_path / "c.jsonl"), "--bogus"]) == 1

    def test_missing_subcommand(self):
        assert main([]) == 1

    def test_bad_log_level(self, tmp_path):
        assert main(["--log-level", "LOUD", "gen", "--n", "3", "--out", str(tmp_path / "c.jsonl")]) == 1


class TestSim:
    def test_writes_events(self, corpus_file, tmp_path):
        out = tmp_path / "events.jsonl"
        assert main(["sim", "--corpus", str(corpus_file), "--out", str(out)]) == 0
        records = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(records) == 20
        assert {e["group"] for r in records for e in r["events"]} <= {"PIPELINE", "PARALLELISM", "PACING"}

    def test_corrupt_corpus(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"test_id": 0, "txns": [}\n')
        assert main(["sim", "--corpus", str(bad), "--out", str(tmp_path / "e.jsonl")]) == 2
        assert "line 1" in capsys.readouterr().err

    def test_missing_corpus(self, tmp_path):
        assert main(["sim", "--corpus", str(tmp_path / "none.jsonl"), "--out", str(tmp_path / "e.jsonl")]) == 1


class TestSelect:
    def test_random_batch(self, corpus_file, tmp_path, capsys):
        out = tmp_path / "picked.txt"
        code = main(
            ["select", "--corpus", str(corpus_file), "--simulated", "0,1,2,3,4", "--method", "RD", "--batch", "3", "--out", str(out)]
        )
        assert code == 0
        picked = [int(x) for x in capsys.readouterr().out.split()]
        assert len(picked) == 3 and not set(picked) & {0, 1, 2, 3, 4}
        assert [int(x) for x in out.read_text().split()] == picked

    def test_forest_with_config_and_id_file(self, corpus_file, tmp_path, capsys):
        ids = tmp_path / "simulated.txt"
        ids.write_text("\n".join(str(i) for i in range(8)) + "\n")
        config = tmp_path / "loop.json"
        config.write_text(json.dumps({"hyper": {"trees": 10, "subsample": 32}}))
        code = main(
            ["select", "--corpus", str(corpus_file), "--simulated", str(ids), "--method", "IF", "--batch", "4", "--config", str(config), "--seed", "2"]
        )
        assert code == 0
        picked = [int(x) for x in capsys.readouterr().out.split()]
        assert len(picked) == 4 and min(picked) >= 8

    def test_unknown_simulated_id(self, corpus_file):
        assert main(["select", "--corpus", str(corpus_file), "--simulated", "999", "--method", "RD"]) == 1

    def test_unknown_method(self, corpus_file):
        assert main(["select", "--corpus", str(corpus_file), "--simulated", "1", "--method", "GAN"]) == 1


class TestExpAndReport:
    def test_shipped_default_config(self):
        path = Path(__file__).resolve().parents[1] / "configs" / "default.json"
        args = build_parser().parse_args(["exp", "--config", str(path), "--jobs", "4"])
        config = load_config(args.config, ExperimentConfig)
        assert config == ExperimentConfig()
        assert config.corpus.n_tests == 2000 and config.loop.batch == 100
        assert config.run_seeds() == list(range(10))

    def test_experiment_then_report(self, tmp_path, capsys):
        out = tmp_path / "results"
        config = _exp_config(tmp_path)
        assert main(["exp", "--config", str(config), "--out", str(out), "--jobs", "1", "--quiet"]) == 0
        assert (out / "table.csv").is_file()
        capsys.readouterr()
        assert main(["report", "--runs", str(out), "--goal", "10", "--goal", "99"]) == 0
        text = capsys.readouterr().out
        assert "Tests to 10% coverage:" in text
        assert (out / "report_goal_99.csv").is_file()

    def test_seed_flag_overrides_config(self, tmp_path):
        out = tmp_path / "results"
        config = _exp_config(tmp_path, methods=["RD"], repeats=1)
        assert main(["exp", "--config", str(config), "--out", str(out), "--jobs", "1", "--quiet", "--seed", "40"]) == 0
        assert (out / "runs" / "RD_40").is_dir()

    def test_missing_config(self, tmp_path, capsys):
        assert main(["exp", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 1
        assert "config not found" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, capsys):
        config = _exp_config(tmp_path, repeats=0)
        assert main(["exp", "--config", str(config), "--out", str(tmp_path / "o")]) == 1
        assert "invalid config" in capsys.readouterr().err

    def test_report_without_results(self, tmp_path):
        assert main(["report", "--runs", str(tmp_path), "--goal", "95"]) == 1

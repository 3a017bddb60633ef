"""
covsteer command line: gen / sim / select / exp / report.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import CliConfig, ExperimentConfig, LoopConfig, SELECTOR_NAMES
from .duvsim import save_events, simulate_corpus
from .errors import ConfigurationError, CovsteerError, UsageError
from .graph import select_step
from .harness import format_report, report, run_experiment
from .schemas import DuvParams
from .selectors import create_selector
from .stimgen import gen_corpus, load_corpus, parse_mix, save_corpus
from .utils import default_jobs, echo_config, env_int, load_config, load_env, setup_logging

logger = logging.getLogger(__name__)

DEFAULT_MIX = "uniform=0.78,bursty=0.11,sparse=0.11"


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on bad flags."""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> CliParser:
    parser = CliParser(prog="covsteer", description="Novelty-driven test selection workbench.")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING... (env COVSTEER_LOG_LEVEL, default INFO)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    gen = sub.add_parser("gen", help="generate a stimulus corpus (JSONL)")
    gen.add_argument("--seed", type=int, default=None, help="corpus seed (env COVSTEER_SEED, default 1)")
    gen.add_argument("--n", type=int, required=True, help="number of tests")
    gen.add_argument("--out", required=True, help="output JSONL path")
    gen.add_argument("--mix", default=DEFAULT_MIX, help=f"profile fractions (default {DEFAULT_MIX})")
    gen.add_argument("--len-range", type=int, nargs=2, default=(60, 100), metavar=("MIN", "MAX"), help="test length range")
    gen.add_argument("--duv", default=None, help="JSON file with DUV params M, S, D, W, B")

    sim = sub.add_parser("sim", help="simulate a corpus and write coverage events (JSONL)")
    sim.add_argument("--corpus", required=True, help="corpus JSONL")
    sim.add_argument("--out", required=True, help="events JSONL path")
    sim.add_argument("--duv", default=None, help="JSON file with DUV params")

    select = sub.add_parser("select", help="one selection step: rank the unsimulated tests")
    select.add_argument("--corpus", required=True, help="corpus JSONL")
    select.add_argument("--simulated", required=True, help="file with one simulated test id per line, or a comma list")
    select.add_argument("--method", choices=SELECTOR_NAMES, default="LSTM", help="selector (default LSTM)")
    select.add_argument("--batch", type=int, default=100, help="tests to select (default 100)")
    select.add_argument("--seed", type=int, default=None, help="selector and tie-break seed (env COVSTEER_SEED, default 0)")
    select.add_argument("--config", default=None, help="JSON LoopConfig (hyper, window, granularity...)")
    select.add_argument("--duv", default=None, help="JSON file with DUV params")
    select.add_argument("--out", default=None, help="write selected ids here, one per line")

    exp = sub.add_parser("exp", help="run a multi-method, multi-seed experiment")
    exp.add_argument("--config", required=True, help="JSON ExperimentConfig")
    exp.add_argument("--out", default="results", help="output directory (default results/)")
    exp.add_argument("--jobs", type=int, default=None, help="parallel runs (env COVSTEER_JOBS, default: cores); 1 is bit-reproducible")
    exp.add_argument("--seed", type=int, default=None, help="base seed of the runs (overrides config and COVSTEER_SEED)")
    exp.add_argument("--quiet", action="store_true", help="no per-iteration progress lines")

    rep = sub.add_parser("report", help="tests-to-goal per method from a results directory")
    rep.add_argument("--runs", required=True, help="results directory holding curves.csv")
    rep.add_argument("--goal", type=float, action="append", required=True, help="coverage goal in percent (repeatable)")
    return parser


def _seed(flag: Optional[int], default: int) -> int:
    if flag is not None:
        return flag
    env = env_int("COVSTEER_SEED")
    return env if env is not None else default


def _duv(path: Optional[str]) -> DuvParams:
    return load_config(path, DuvParams) if path else DuvParams()


def _corpus(path: str):
    if not Path(path).is_file():
        raise FileNotFoundError(f"corpus not found: {path}")
    return load_corpus(path)


def _simulated_ids(spec: str) -> list[int]:
    path = Path(spec)
    text = path.read_text(encoding="utf-8") if path.is_file() else spec
    try:
        return [int(tok) for tok in text.replace(",", "\n").split() if tok]
    except ValueError:
        raise UsageError(f"--simulated must be a file of ids or a comma list, got {spec!r}") from None


def _echo(args: argparse.Namespace, target_dir: Path, name: str, **extra) -> None:
    cli = CliConfig(
        command=args.command,
        config_path=getattr(args, "config", None),
        out=getattr(args, "out", None),
        seed=extra.pop("seed", None),
        log_level=logging.getLevelName(logging.getLogger().level),
        args=extra,
    )
    echo_config(target_dir, cli, name=name)


def cmd_gen(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    seed = _seed(args.seed, 1)
    params = _duv(args.duv)
    mix = parse_mix(args.mix)
    corpus = gen_corpus(seed, args.n, mix, tuple(args.len_range), params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_corpus(out, corpus)
    _echo(args, out.parent, f"{out.stem}.config.json", seed=seed, n=args.n, mix=mix, len_range=list(args.len_range), duv=params.model_dump())
    print(f"wrote {len(corpus)} tests to {out}")
    return 0


def cmd_sim(args: argparse.Namespace) -> int:
    params = _duv(args.duv)
    corpus = _corpus(args.corpus)
    events = simulate_corpus(corpus, params)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_events(out, events)
    _echo(args, out.parent, f"{out.stem}.config.json", corpus=args.corpus, duv=params.model_dump())
    print(f"wrote events of {len(events)} tests to {out}")
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    if args.batch < 1:
        raise UsageError("--batch must be >= 1")
    seed = _seed(args.seed, 0)
    params = _duv(args.duv)
    base = load_config(args.config, LoopConfig) if args.config else LoopConfig()
    loop_config = base.model_copy(update={"seed": seed, "selector": args.method, "batch": args.batch})
    corpus = _corpus(args.corpus)
    simulated = _simulated_ids(args.simulated)
    selector = create_selector(args.method, loop_config.hyper, seed)
    selected = select_step(corpus, simulated, selector, params, loop_config)
    text = "\n".join(str(tid) for tid in selected)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n", encoding="utf-8")
        echo_config(out.parent, loop_config, name=f"{out.stem}.config.json")
    print(text)
    return 0


def cmd_exp(args: argparse.Namespace) -> int:
    config = load_config(args.config, ExperimentConfig)
    env_seed = env_int("COVSTEER_SEED")
    seed = args.seed if args.seed is not None else env_seed
    if seed is not None:
        config = ExperimentConfig.model_validate({**config.model_dump(), "seed": seed, "seeds": None})
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    table = run_experiment(config, args.out, jobs=jobs, progress=not args.quiet)
    print(f"results written to {args.out} ({len(table)} table rows)")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if not (Path(args.runs) / "curves.csv").is_file():
        raise FileNotFoundError(f"curves.csv not found in {args.runs}")
    frame = report(args.runs, args.goal)
    print(format_report(frame))
    return 0


COMMANDS = {"gen": cmd_gen, "sim": cmd_sim, "select": cmd_select, "exp": cmd_exp, "report": cmd_report}


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_env()
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        return COMMANDS[args.command](args)
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except (UsageError, ConfigurationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except CovsteerError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        logger.exception(f"unexpected failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

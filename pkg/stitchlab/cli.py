"""
Command-line interface.

Every command reads the experiment configuration (``--config``), applies its
flags on top and works inside ``--output-dir``. Exit code 0 means every
artifact of the command was written.

    stitchlab prepare --config desk.yaml
    stitchlab search --algo gomea --pop 32 --budget 2000 --seed 1 --deterministic
    stitchlab sweep --algo ga --sizes 16,32,64
    stitchlab report --runs runs/desk/runs
    stitchlab stats --runs runs/desk/runs/ga runs/desk/runs/gomea
"""

import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import ALGORITHMS, load_experiment_config
from .errors import StitchLabError
from .pipeline import StitchingPipeline
from .search.runlog import ARCHIVE_FILE
from .stages import StageResult

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: Optional[str] = None) -> None:
    level = (level or os.environ.get("LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT, force=True)


def _sizes(text: str) -> List[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got '{text}'") from None
    if not sizes:
        raise argparse.ArgumentTypeError("at least one size is required")
    return sizes


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algo", choices=ALGORITHMS, help="search algorithm")
    parser.add_argument("--pop", type=int, help="population size n")
    parser.add_argument("--budget", type=int, help="evaluation budget (skipped evaluations count)")
    parser.add_argument("--seed", type=int, help="search seed")
    parser.add_argument("--workers", type=int, help="concurrent evaluations")
    parser.add_argument("--deterministic", action="store_true", default=None,
                        help="single inline worker, reproducible run log")
    parser.add_argument("--time-limit", type=float, help="wall-clock limit in seconds")
    parser.add_argument("--kernel-min", type=int, help="minimum LK neighborhood size c")
    parser.add_argument("--eval-limit", type=int, help="validation samples per evaluation")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stitchlab", description="Model stitching and supernetwork search")
    parser.add_argument("--config", type=Path, help="experiment YAML file")
    parser.add_argument("--output-dir", type=Path, help="experiment directory")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: $LOG_LEVEL or INFO)")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="generate the synthetic dataset")
    gen.add_argument("--kind", choices=("images", "two_spirals", "rings"))
    gen.add_argument("--n", type=int, help="number of samples")
    gen.add_argument("--classes", type=int)
    gen.add_argument("--noise", type=float)
    gen.add_argument("--data-seed", type=int)

    parents = commands.add_parser("train-parents", help="train parents A and B")
    parents.add_argument("--preset", help="parent pair preset")
    parents.add_argument("--lr", type=float)
    parents.add_argument("--sample-budget", type=int, help="training samples per parent")
    parents.add_argument("--batch-size", type=int)

    stitch = commands.add_parser("stitch", help="match layers and build the supernetwork")
    stitch.add_argument("--match-stride", type=int, help="consider every k-th eligible layer")
    stitch.add_argument("--match-budget", type=int, help="node expansions of the matching search")

    train = commands.add_parser("train-stitches", help="train all stitches")
    train.add_argument("--method", choices=("closed_form", "adam"))
    train.add_argument("--ridge", type=float)
    train.add_argument("--max-samples", type=int)

    commands.add_parser("prepare", help="gen-data, train-parents, stitch and train-stitches in one go")

    search = commands.add_parser("search", help="run one search")
    _add_search_flags(search)
    search.add_argument("--run-dir", type=Path, help="override the run directory")

    sweep = commands.add_parser("sweep", help="one run per population size, keep the best")
    _add_search_flags(sweep)
    sweep.add_argument("--sizes", type=_sizes, help="comma-separated population sizes")

    report = commands.add_parser("report", help="fronts, references and calibration over finished runs")
    report.add_argument("--runs", type=Path, nargs="+", required=True, help="run directories or their parents")
    report.add_argument("--test-split", action=argparse.BooleanOptionalAction, default=True,
                        help="re-evaluate archive members on the test split")

    stats = commands.add_parser("stats", help="Mann-Whitney U tests over final hypervolumes")
    stats.add_argument("--runs", type=Path, nargs="+", required=True, help="one directory per algorithm")
    stats.add_argument("--alpha", type=float, default=0.05)
    stats.add_argument("--out", type=Path, help="output table (default: <output-dir>/stats.txt)")

    serve = commands.add_parser("serve", help="serve decode/evaluate endpoints over HTTP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested configuration overrides from the parsed flags; unset flags stay ``None``."""
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return {
        "output_dir": str(args.output_dir) if args.output_dir else None,
        "preset": get("preset"),
        "match_stride": get("match_stride"),
        "match_budget": get("match_budget"),
        "dataset": {"kind": get("kind"), "n": get("n"), "classes": get("classes"),
                    "noise": get("noise"), "seed": get("data_seed")},
        "parent_training": {"lr": get("lr"), "sample_budget": get("sample_budget"),
                            "batch_size": get("batch_size")},
        "stitch_training": {"method": get("method"), "ridge": get("ridge"), "max_samples": get("max_samples")},
        "search": {"algorithm": get("algo"), "population_size": get("pop"), "budget": get("budget"),
                   "seed": get("seed"), "workers": get("workers"), "deterministic": get("deterministic"),
                   "time_limit": get("time_limit"), "kernel_min_size": get("kernel_min"),
                   "eval_limit": get("eval_limit")},
    }


def _archive_dirs(roots: Sequence[Path]) -> List[Path]:
    found: List[Path] = []
    for root in roots:
        if (root / ARCHIVE_FILE).exists():
            found.append(root)
        else:
            found.extend(sorted(p.parent for p in root.rglob(ARCHIVE_FILE)))
    return found


def _print_result(command: str, result: StageResult) -> None:
    data = result.data
    if command == "stitch":
        print(f"matches: {data['matches']}  genotype length: {data['genotype_length']}"
              f"{'  (matching budget exhausted)' if data['timed_out'] else ''}")
    elif command == "train-stitches":
        for s in data["report"].stitches:
            print(f"{s.stitch_id}: mse {s.mse:.6g} (random init {s.initial_mse:.6g})")
    elif command == "search":
        summary = data["summary"]
        print(f"evaluations: {summary.evaluations}  skip fraction: {summary.skip_fraction:.4f}  "
              f"termination: {summary.termination}  hypervolume: {summary.hypervolume:.6f}")
    elif command == "sweep":
        for row in data["rows"]:
            print(f"n={row['population_size']:<6} hypervolume {row['hypervolume']:.6f}  "
                  f"skip fraction {row['skip_fraction']:.4f}")
        print(f"selected population size: {data['selected']}")
    elif command == "report":
        print(f"report written to {data['files']['report']}")
    elif command == "stats":
        print(data["table"], end="")
    else:
        print(f"{command}: done")


async def _dispatch(command: str, args: argparse.Namespace, pipeline: StitchingPipeline) -> StageResult:
    if command == "gen-data":
        return await pipeline.generate_data()
    if command == "train-parents":
        return await pipeline.train_parents()
    if command == "stitch":
        return await pipeline.stitch()
    if command == "train-stitches":
        return await pipeline.train_stitches()
    if command == "prepare":
        return await pipeline.prepare()
    if command == "search":
        return await pipeline.search(run_dir=args.run_dir)
    if command == "sweep":
        return await pipeline.sweep(pipeline.config.search.algorithm, args.sizes)
    if command == "report":
        return await pipeline.report(_archive_dirs(args.runs), test_split=args.test_split)
    if command == "stats":
        return await pipeline.stats(args.runs, args.out, args.alpha)
    raise ValueError(f"unknown command {command}")


def serve(pipeline: StitchingPipeline, host: str, port: int) -> int:
    import uvicorn

    from .api import create_app

    context = pipeline.search_context()
    uvicorn.run(create_app(context["supernet"], context["dataset"]), host=host, port=port)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = load_experiment_config(args.config, config_overrides(args))
        pipeline = StitchingPipeline(config)
        if args.command == "serve":
            return serve(pipeline, args.host, args.port)
        result = asyncio.run(_dispatch(args.command, args, pipeline))
    except StitchLabError as e:
        logger.error(f"[CLI] {args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    if not result.success:
        print(f"error: {result.error}", file=sys.stderr)
        return 1
    _print_result(args.command, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())

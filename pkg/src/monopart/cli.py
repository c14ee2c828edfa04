"""Command-line interface.

Subcommands:
  run        full untuned/random/hyperopt experiment from a JSON config
  partition  run one algorithm once and print the partition as JSON
  score      print the metric vector of a partition against its dataset
  rank       re-rank treatments from persisted trial CSVs
  synth      generate a synthetic trace corpus with planted structure
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import __version__
from .corpus import (
    generate_synthetic,
    load_dataset,
    load_partition,
    partition_json,
    save_dataset,
)
from .experiment import derive_seed, load_config, run_experiment
from .metrics import METRIC_NAMES, MINIMIZED, MetricVector, evaluate
from .partitioners import Algorithm, PartitionerConfig, run_partitioner
from .stats import SampleSet, scott_knott


def _parse_param(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected k=v, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value: float = int(raw)
    except ValueError:
        try:
            value = float(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"parameter {key!r} needs a numeric value, got {raw!r}"
            ) from None
    return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monopart",
        description="Partition monolith trace corpora into service candidates "
        "and tune the partitioners.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full experiment grid")
    p_run.add_argument("--config", required=True, help="JSON experiment config")

    p_part = sub.add_parser("partition", help="run one partitioner once")
    p_part.add_argument("--dataset", required=True)
    p_part.add_argument(
        "--algorithm", required=True, choices=[a.value for a in Algorithm]
    )
    p_part.add_argument(
        "--param",
        action="append",
        default=[],
        type=_parse_param,
        metavar="k=v",
        help="hyperparameter, repeatable",
    )
    p_part.add_argument("--seed", type=int, default=0)

    p_score = sub.add_parser("score", help="score a partition against a dataset")
    p_score.add_argument("--dataset", required=True)
    p_score.add_argument("--partition", required=True)

    p_rank = sub.add_parser("rank", help="rank treatments from trial CSVs")
    p_rank.add_argument(
        "--input", required=True, help="experiment output directory with trials.csv files"
    )

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--classes", type=int, required=True)
    p_synth.add_argument("--use-cases", type=int, required=True)
    p_synth.add_argument("--modularity", type=float, required=True)
    p_synth.add_argument("--out", required=True)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    report = run_experiment(cfg)
    out = Path(cfg.output_dir)
    print(f"wrote report under {out}")
    print(f"summary: {out / 'summary.txt'}")
    if report.any_failed():
        print(f"FAILED cells: {len(report.failed_cells)}", file=sys.stderr)
        return 1
    return 0


def _cmd_partition(args: argparse.Namespace) -> int:
    ds = load_dataset(args.dataset)
    params = dict(args.param)
    cfg = PartitionerConfig(
        algorithm=Algorithm(args.algorithm), params=params, seed=args.seed
    )
    partition = run_partitioner(ds, cfg)
    print(partition_json(partition), end="")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    ds = load_dataset(args.dataset)
    partition = load_partition(args.partition)
    partition.validate_against(ds)
    vector = evaluate(ds, partition)
    print(MetricVector.csv_header())
    print(vector.csv_row())
    return 0


def _read_trial_blocks(path: Path) -> list[dict[str, float] | None]:
    """Best row (by loss) per optimization run recorded in one trials.csv.

    Runs are concatenated in the file; a row with index 0 starts a new run.
    Returns one metric dict per run, or None for runs whose best is a
    failed trial.
    """
    blocks: list[list[dict]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if int(row["index"]) == 0:
                blocks.append([])
            blocks[-1].append(row)
    out: list[dict[str, float] | None] = []
    for block in blocks:
        best = min(block, key=lambda r: (float(r["loss"]), int(r["index"])))
        if not math.isfinite(float(best["loss"])):
            out.append(None)
            continue
        values = {m: float(best[m]) for m in METRIC_NAMES}
        values["loss"] = float(best["loss"])
        out.append(values)
    return out


def _cmd_rank(args: argparse.Namespace) -> int:
    root = Path(args.input)
    if not root.is_dir():
        print(f"not a directory: {root}", file=sys.stderr)
        return 2
    found = sorted(root.glob("*/*/*/trials.csv"))
    if not found:
        print(f"no trials.csv files under {root}", file=sys.stderr)
        return 2
    grouped: dict[tuple[str, str], dict[str, list[dict[str, float]]]] = {}
    for path in found:
        treatment = path.parent.name
        algorithm = path.parent.parent.name
        dataset = path.parent.parent.parent.name
        runs = [r for r in _read_trial_blocks(path) if r is not None]
        grouped.setdefault((dataset, algorithm), {})[treatment] = runs
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["dataset", "algorithm", "metric", "treatment", "rank"])
    status = 0
    for (dataset, algorithm), by_treatment in sorted(grouped.items()):
        usable = {t: runs for t, runs in by_treatment.items() if len(runs) >= 2}
        if len(usable) < 2:
            print(
                f"skipping {dataset}/{algorithm}: needs >= 2 runs for >= 2 treatments",
                file=sys.stderr,
            )
            status = 1
            continue
        for metric in METRIC_NAMES + ("loss",):
            samples = [
                SampleSet(label=t, values=tuple(run[metric] for run in runs))
                for t, runs in sorted(usable.items())
            ]
            direction = (
                "minimize" if metric == "loss" or MINIMIZED[metric] else "maximize"
            )
            table = scott_knott(
                samples, direction, seed=derive_seed(0, "rank", dataset, algorithm, metric)
            )
            for treatment in sorted(usable):
                writer.writerow(
                    [dataset, algorithm, metric, treatment, table.ranks[treatment]]
                )
    return status


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.classes < 2 or args.use_cases < 1:
        print("synth needs --classes >= 2 and --use-cases >= 1", file=sys.stderr)
        return 2
    if not 0.0 <= args.modularity <= 1.0:
        print("--modularity must be in [0, 1]", file=sys.stderr)
        return 2
    ds = generate_synthetic(
        seed=args.seed,
        n_classes=args.classes,
        n_use_cases=args.use_cases,
        modularity=args.modularity,
    )
    save_dataset(ds, args.out)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    commands = {
        "run": _cmd_run,
        "partition": _cmd_partition,
        "score": _cmd_score,
        "rank": _cmd_rank,
        "synth": _cmd_synth,
    }
    try:
        return commands[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

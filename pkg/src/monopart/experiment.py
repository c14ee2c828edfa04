"""Full experiment harness: untuned vs random vs TPE over a dataset grid.

Every grid cell (dataset, algorithm, treatment) runs `repeats` times with
seeds derived purely from (root seed, dataset, algorithm, treatment,
repeat), so any cell reproduces in isolation. A tuned repeat is one
complete optimization run whose best trial becomes that repeat's sample;
an untuned repeat evaluates the pinned defaults once. Results are ranked
per metric, aggregated into win and best-of tables, and written under the
configured output directory.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .corpus import load_dataset
from .metrics import DEFAULT_WEIGHTS, METRIC_NAMES, MINIMIZED, LossSpec, MetricVector
from .optimizer import (
    Trial,
    make_objective,
    search_space_for,
    trials_to_csv,
    tune_random,
    tune_tpe,
)
from .partitioners import Algorithm, default_params
from .stats import (
    BestOfTable,
    RankTable,
    SampleSet,
    WinTable,
    best_of,
    best_of_text,
    scott_knott,
    win_table,
    win_table_text,
)

TREATMENTS = ("untuned", "random", "hyperopt")
RANKED_METRICS = METRIC_NAMES + ("loss",)
WORKERS_ENV = "MONOPART_WORKERS"
DEFAULT_TRIAL_TIMEOUT = 60.0


def derive_seed(root: int, *parts: object) -> int:
    """Stable 32-bit seed from a root seed and a label path."""
    text = str(root) + "".join(f"|{p}" for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...]
    algorithms: tuple[Algorithm, ...]
    output_dir: str
    repeats: int = 30
    budget: int = 100
    seed: int = 0
    weights: tuple[float, ...] = DEFAULT_WEIGHTS
    trial_timeout: float = DEFAULT_TRIAL_TIMEOUT

    def __post_init__(self) -> None:
        if not self.datasets:
            raise ValueError("config needs at least one dataset")
        if not self.algorithms:
            raise ValueError("config needs at least one algorithm")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        names = [Path(p).stem for p in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError("duplicate dataset names (file stems must be unique)")

    def to_json_dict(self) -> dict:
        return {
            "datasets": list(self.datasets),
            "algorithms": [a.value for a in self.algorithms],
            "output_dir": self.output_dir,
            "repeats": self.repeats,
            "budget": self.budget,
            "seed": self.seed,
            "weights": list(self.weights),
            "trial_timeout": self.trial_timeout,
        }

    @staticmethod
    def from_json_dict(raw: Mapping) -> "ExperimentConfig":
        known = {
            "datasets",
            "algorithms",
            "output_dir",
            "repeats",
            "budget",
            "seed",
            "weights",
            "trial_timeout",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for required in ("datasets", "algorithms", "output_dir"):
            if required not in raw:
                raise ValueError(f"config missing required field {required!r}")
        return ExperimentConfig(
            datasets=tuple(str(p) for p in raw["datasets"]),
            algorithms=tuple(Algorithm(a) for a in raw["algorithms"]),
            output_dir=str(raw["output_dir"]),
            repeats=int(raw.get("repeats", 30)),
            budget=int(raw.get("budget", 100)),
            seed=int(raw.get("seed", 0)),
            weights=tuple(float(w) for w in raw.get("weights", DEFAULT_WEIGHTS)),
            trial_timeout=float(raw.get("trial_timeout", DEFAULT_TRIAL_TIMEOUT)),
        )

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_json_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class RepeatSample:
    repeat: int
    seed: int
    loss: float
    vector: MetricVector | None
    params: dict
    default_loss: float
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class CellResult:
    samples: tuple[RepeatSample, ...]
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class Provenance:
    seed: int
    config_hash: str
    version: str


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    dataset_names: tuple[str, ...]
    cells: dict[tuple[str, str, str], CellResult]
    ranks: dict[tuple[str, str, str], RankTable] = field(default_factory=dict)
    win_tables: dict[str, WinTable] = field(default_factory=dict)
    best_table: BestOfTable | None = None
    provenance: Provenance | None = None
    zero_variance: tuple[tuple[str, str, str], ...] = ()
    failed_cells: tuple[tuple[str, str, str], ...] = ()

    def any_failed(self) -> bool:
        return bool(self.failed_cells)


def _sample_from_trial(
    repeat: int, trial_seed: int, best: Trial, default_trial: Trial
) -> RepeatSample:
    return RepeatSample(
        repeat=repeat,
        seed=trial_seed,
        loss=best.loss,
        vector=best.metric_vector,
        params=dict(best.params),
        default_loss=default_trial.loss,
        failed=best.metric_vector is None,
        error=best.error if best.metric_vector is None else None,
    )


def _run_cell(
    dataset_path: str,
    dataset_name: str,
    algorithm_value: str,
    treatment: str,
    repeats: int,
    budget: int,
    weights: tuple[float, ...],
    root_seed: int,
    trial_timeout: float,
) -> tuple[CellResult, str]:
    """One grid cell: all repeats of one treatment. Returns the result and
    the concatenated trial-history CSV text."""
    algorithm = Algorithm(algorithm_value)
    try:
        ds = load_dataset(dataset_path)
        objective = make_objective(ds, algorithm, LossSpec(weights=weights))
        defaults = default_params(algorithm, ds)
        samples: list[RepeatSample] = []
        histories: list[Trial] = []
        for repeat in range(repeats):
            cell_seed = derive_seed(
                root_seed, dataset_name, algorithm.value, treatment, repeat
            )
            if treatment == "untuned":
                result = tune_random(
                    objective,
                    search_space_for(algorithm, ds),
                    defaults,
                    seed=cell_seed,
                    budget=0,
                    trial_timeout=trial_timeout,
                )
            elif treatment == "random":
                result = tune_random(
                    objective,
                    search_space_for(algorithm, ds),
                    defaults,
                    seed=cell_seed,
                    budget=budget,
                    trial_timeout=trial_timeout,
                )
            elif treatment == "hyperopt":
                result = tune_tpe(
                    objective,
                    search_space_for(algorithm, ds),
                    defaults,
                    seed=cell_seed,
                    budget=budget,
                    trial_timeout=trial_timeout,
                )
            else:
                raise ValueError(f"unknown treatment: {treatment!r}")
            samples.append(
                _sample_from_trial(repeat, cell_seed, result.best, result.history[0])
            )
            histories.extend(result.history)
        failed = any(s.failed for s in samples)
        error = next((s.error for s in samples if s.failed), None)
        return (
            CellResult(samples=tuple(samples), failed=failed, error=error),
            trials_to_csv(histories, algorithm),
        )
    except Exception as exc:  # setup-level failure: the whole cell is failed
        result = CellResult(
            samples=(), failed=True, error=f"{type(exc).__name__}: {exc}"
        )
        return result, trials_to_csv([], algorithm)


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the full grid, assemble rankings and tables, write all outputs."""
    dataset_names = tuple(Path(p).stem for p in cfg.datasets)
    for path in cfg.datasets:
        load_dataset(path)  # fail fast before any work is scheduled
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [
        (path, name, algorithm.value, treatment)
        for path, name in zip(cfg.datasets, dataset_names)
        for algorithm in cfg.algorithms
        for treatment in TREATMENTS
    ]
    cell_args = [
        (
            path,
            name,
            algorithm_value,
            treatment,
            cfg.repeats,
            cfg.budget,
            cfg.weights,
            cfg.seed,
            cfg.trial_timeout,
        )
        for path, name, algorithm_value, treatment in jobs
    ]
    workers = _worker_count()
    outputs: list[tuple[CellResult, str]] = []
    if workers == 1 or len(jobs) == 1:
        outputs = [_run_cell(*args) for args in cell_args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_cell, *zip(*cell_args)))

    cells: dict[tuple[str, str, str], CellResult] = {}
    for (path, name, algorithm_value, treatment), (cell, csv_text) in zip(
        jobs, outputs
    ):
        cells[(name, algorithm_value, treatment)] = cell
        cell_dir = out_dir / name / algorithm_value / treatment
        cell_dir.mkdir(parents=True, exist_ok=True)
        (cell_dir / "trials.csv").write_text(csv_text, encoding="utf-8")

    report = ExperimentReport(
        config=cfg,
        dataset_names=dataset_names,
        cells=cells,
        provenance=Provenance(
            seed=cfg.seed,
            config_hash=cfg.config_hash(),
            version=_version(),
        ),
    )
    report.failed_cells = tuple(
        sorted(key for key, cell in cells.items() if cell.failed)
    )
    report.zero_variance = tuple(
        sorted(
            key
            for key, cell in cells.items()
            if cell.samples
            and not cell.failed
            and len({s.loss for s in cell.samples}) == 1
        )
    )

    _assemble_ranks(report)
    _assemble_tables(report)
    for fmt in ("csv", "text-table", "json"):
        emit_report(report, fmt)
    return report


def _metric_value(sample: RepeatSample, metric: str) -> float:
    if metric == "loss":
        return sample.loss
    assert sample.vector is not None
    return getattr(sample.vector, metric)


def _assemble_ranks(report: ExperimentReport) -> None:
    """Scott-Knott per (dataset, algorithm, metric) over the treatments.

    Needs >= 2 repeats and a fully successful (dataset, algorithm) row;
    anything else is skipped rather than half-ranked.
    """
    cfg = report.config
    if cfg.repeats < 2:
        return
    for name in report.dataset_names:
        for algorithm in cfg.algorithms:
            row_cells = {
                t: report.cells[(name, algorithm.value, t)] for t in TREATMENTS
            }
            if any(cell.failed for cell in row_cells.values()):
                continue
            for metric in RANKED_METRICS:
                sample_sets = [
                    SampleSet(
                        label=t,
                        values=tuple(
                            _metric_value(s, metric) for s in row_cells[t].samples
                        ),
                    )
                    for t in TREATMENTS
                ]
                direction = (
                    "minimize"
                    if metric == "loss" or MINIMIZED[metric]
                    else "maximize"
                )
                table = scott_knott(
                    sample_sets,
                    direction,
                    seed=derive_seed(cfg.seed, "rank", name, algorithm.value, metric),
                )
                report.ranks[(name, algorithm.value, metric)] = table


def _assemble_tables(report: ExperimentReport) -> None:
    cfg = report.config
    for algorithm in cfg.algorithms:
        ranked = {
            (name, metric): table
            for (name, alg_value, metric), table in report.ranks.items()
            if alg_value == algorithm.value and metric in METRIC_NAMES
        }
        if ranked:
            report.win_tables[algorithm.value] = win_table(ranked)
    if report.failed_cells:
        return
    summaries: dict[tuple[str, str, str], dict[str, float]] = {}
    for (name, alg_value, treatment), cell in report.cells.items():
        summary = {}
        for metric in RANKED_METRICS:
            values = [_metric_value(s, metric) for s in cell.samples]
            summary[metric] = float(np.median(values))
        summaries[(name, alg_value, treatment)] = summary
    report.best_table = best_of(summaries)


def _version() -> str:
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return f"{value:.6f}" if math.isfinite(value) else "inf"


def _samples_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "dataset",
            "algorithm",
            "treatment",
            "repeat",
            "seed",
            "loss",
            *METRIC_NAMES,
            "default_loss",
            "param_json",
        ]
    )
    for name in report.dataset_names:
        for algorithm in report.config.algorithms:
            for treatment in TREATMENTS:
                cell = report.cells[(name, algorithm.value, treatment)]
                for sample in cell.samples:
                    if sample.vector is None:
                        metric_cells = ["nan"] * len(METRIC_NAMES)
                    else:
                        metric_cells = sample.vector.csv_row().split(",")
                    writer.writerow(
                        [
                            name,
                            algorithm.value,
                            treatment,
                            sample.repeat,
                            sample.seed,
                            _fmt(sample.loss),
                            *metric_cells,
                            _fmt(sample.default_loss),
                            json.dumps(sample.params, sort_keys=True),
                        ]
                    )
    return buf.getvalue()


def _ranks_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", "algorithm", "metric", "treatment", "rank"])
    for name in report.dataset_names:
        for algorithm in report.config.algorithms:
            for metric in RANKED_METRICS:
                table = report.ranks.get((name, algorithm.value, metric))
                if table is None:
                    continue
                for treatment in TREATMENTS:
                    writer.writerow(
                        [name, algorithm.value, metric, treatment,
                         table.ranks[treatment]]
                    )
    return buf.getvalue()


def _wins_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["algorithm", "metric", "treatment", "wins"])
    for algorithm in report.config.algorithms:
        table = report.win_tables.get(algorithm.value)
        if table is None:
            continue
        for metric in table.metrics:
            for treatment in table.treatments:
                writer.writerow(
                    [algorithm.value, metric, treatment, table.wins[metric][treatment]]
                )
        for key in ("untuned", "tuned", "tie"):
            writer.writerow([algorithm.value, "total", key, table.totals[key]])
    return buf.getvalue()


def _best_csv(report: ExperimentReport) -> str:
    from .stats import best_of_csv

    if report.best_table is None:
        return "dataset,metric,best\n"
    return best_of_csv(report.best_table)


def _summary_text(report: ExperimentReport) -> str:
    assert report.provenance is not None
    cfg = report.config
    lines = [
        "experiment summary",
        "==================",
        f"seed: {report.provenance.seed}",
        f"config hash: {report.provenance.config_hash}",
        f"version: {report.provenance.version}",
        f"datasets: {', '.join(report.dataset_names)}",
        f"algorithms: {', '.join(a.value for a in cfg.algorithms)}",
        f"repeats: {cfg.repeats}  budget: {cfg.budget}",
        "",
    ]
    if cfg.repeats < 2:
        lines.append("ranking skipped (repeats < 2)")
        lines.append("")
    for algorithm in cfg.algorithms:
        table = report.win_tables.get(algorithm.value)
        if table is None:
            continue
        lines.append(
            win_table_text(
                table, title=f"[{algorithm.value}] rank-1 counts over "
                f"{table.n_datasets} dataset(s)"
            ).rstrip("\n")
        )
        lines.append("")
    if report.best_table is not None:
        lines.append(
            best_of_text(
                report.best_table, title="best treatment value per algorithm"
            ).rstrip("\n")
        )
        lines.append("")
    if report.zero_variance:
        lines.append("zero-variance cells (deterministic under seed changes):")
        for name, alg_value, treatment in report.zero_variance:
            lines.append(f"  {name}/{alg_value}/{treatment}")
        lines.append("")
    if report.failed_cells:
        lines.append("FAILED cells:")
        for name, alg_value, treatment in report.failed_cells:
            cell = report.cells[(name, alg_value, treatment)]
            lines.append(f"  {name}/{alg_value}/{treatment}: {cell.error}")
        lines.append("")
    return "\n".join(lines)


def _report_json(report: ExperimentReport) -> str:
    assert report.provenance is not None

    def loss_cell(value: float):
        return value if math.isfinite(value) else "inf"

    cells = {}
    for (name, alg_value, treatment), cell in sorted(report.cells.items()):
        cells["/".join((name, alg_value, treatment))] = {
            "failed": cell.failed,
            "error": cell.error,
            "repeats": [
                {
                    "repeat": s.repeat,
                    "seed": s.seed,
                    "loss": loss_cell(s.loss),
                    "default_loss": loss_cell(s.default_loss),
                    "params": s.params,
                    "metrics": (
                        None
                        if s.vector is None
                        else {
                            m: getattr(s.vector, m) for m in METRIC_NAMES
                        }
                    ),
                    "failed": s.failed,
                    "error": s.error,
                }
                for s in cell.samples
            ],
        }
    payload = {
        "version": report.provenance.version,
        "config": report.config.to_json_dict(),
        "config_hash": report.provenance.config_hash,
        "cells": cells,
        "ranks": {
            "/".join(key): dict(table.ranks)
            for key, table in sorted(report.ranks.items())
        },
        "wins": {
            alg: {"metrics": {m: dict(t.wins[m]) for m in t.metrics},
                  "totals": dict(t.totals)}
            for alg, t in sorted(report.win_tables.items())
        },
        "best": (
            None
            if report.best_table is None
            else {
                "values": {
                    "/".join(key): value
                    for key, value in sorted(report.best_table.values.items())
                },
                "winners": {
                    "/".join(key): list(winners)
                    for key, winners in sorted(report.best_table.best.items())
                },
                "wins": dict(report.best_table.wins),
            }
        ),
        "flags": {
            "zero_variance": ["/".join(k) for k in report.zero_variance],
            "failed_cells": ["/".join(k) for k in report.failed_cells],
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def emit_report(report: ExperimentReport, format: str) -> list[Path]:
    """Write one format family under the report's output_dir."""
    out_dir = Path(report.config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def write(rel: str, text: str) -> None:
        path = out_dir / rel
        path.write_text(text, encoding="utf-8")
        written.append(path)

    if format == "csv":
        write("ranks.csv", _ranks_csv(report))
        write("wins.csv", _wins_csv(report))
        write("best.csv", _best_csv(report))
        write("samples.csv", _samples_csv(report))
    elif format == "text-table":
        write("summary.txt", _summary_text(report))
    elif format == "json":
        write("report.json", _report_json(report))
    else:
        raise ValueError(f"unknown report format: {format!r}")
    return written

"""Trace-driven monolith partitioning, metric scoring, and tuner benchmarking."""

from .corpus import (
    CallGraph,
    Partition,
    Trace,
    TraceDataset,
    ValidationError,
    build_call_graph,
    cooccurrence_matrix,
    generate_synthetic,
    load_dataset,
    load_partition,
    planted_partition,
    save_dataset,
    save_partition,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    derive_seed,
    emit_report,
    load_config,
    run_experiment,
)
from .metrics import (
    DEFAULT_WEIGHTS,
    METRIC_NAMES,
    LossSpec,
    MetricVector,
    evaluate,
    loss,
)
from .optimizer import (
    Dimension,
    DimKind,
    SearchSpace,
    Trial,
    TuneResult,
    make_objective,
    sample_random,
    search_space_for,
    trials_to_csv,
    tune_random,
    tune_tpe,
)
from .partitioners import (
    Algorithm,
    PartitionerConfig,
    default_params,
    partition_bunch,
    partition_fosci,
    partition_mem,
    partition_mono2micro,
    run_partitioner,
)
from .stats import RankTable, SampleSet, best_of, scott_knott, win_table

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "CallGraph",
    "DEFAULT_WEIGHTS",
    "DimKind",
    "Dimension",
    "ExperimentConfig",
    "ExperimentReport",
    "LossSpec",
    "METRIC_NAMES",
    "MetricVector",
    "Partition",
    "PartitionerConfig",
    "RankTable",
    "SampleSet",
    "SearchSpace",
    "Trace",
    "TraceDataset",
    "Trial",
    "TuneResult",
    "ValidationError",
    "best_of",
    "build_call_graph",
    "cooccurrence_matrix",
    "default_params",
    "derive_seed",
    "emit_report",
    "evaluate",
    "generate_synthetic",
    "load_config",
    "load_dataset",
    "load_partition",
    "loss",
    "make_objective",
    "partition_bunch",
    "partition_fosci",
    "partition_mem",
    "partition_mono2micro",
    "planted_partition",
    "run_experiment",
    "run_partitioner",
    "sample_random",
    "save_dataset",
    "save_partition",
    "scott_knott",
    "search_space_for",
    "trials_to_csv",
    "tune_random",
    "tune_tpe",
    "win_table",
]

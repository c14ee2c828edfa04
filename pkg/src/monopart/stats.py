"""Rank treatments over repeated runs and aggregate wins across datasets.

Ranking uses a nonparametric Scott-Knott procedure: treatments sorted by
mean are recursively bi-partitioned at the split maximizing between-group
sum of squares, but a split only happens when the two halves differ both
significantly (bootstrap test on shifted samples) and non-trivially
(Cliff's delta at the standard small-effect cutoff). Treatments that never
separate share a rank.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metrics import METRIC_NAMES, MINIMIZED

DEFAULT_ALPHA = 0.05
DEFAULT_N_BOOT = 512
DEFAULT_DELTA = 0.147  # smallest non-negligible Cliff's delta

UNTUNED_LABEL = "untuned"


@dataclass(frozen=True)
class SampleSet:
    """Repeated measurements of one metric for one treatment."""

    label: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) < 2:
            raise ValueError(f"sample set {self.label!r} needs >= 2 values")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"sample set {self.label!r} has non-finite values")

    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class RankTable:
    ranks: Mapping[str, int]

    def groups(self) -> list[list[str]]:
        """Labels per rank, rank 1 first; labels sorted within a group."""
        by_rank: dict[int, list[str]] = {}
        for label, rank in self.ranks.items():
            by_rank.setdefault(rank, []).append(label)
        return [sorted(by_rank[r]) for r in sorted(by_rank)]

    def winners(self) -> list[str]:
        return self.groups()[0]


def cliffs_delta(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pairwise dominance effect size in [-1, 1]."""
    x = np.asarray(xs, dtype=float)[:, None]
    y = np.asarray(ys, dtype=float)[None, :]
    gt = int((x > y).sum())
    lt = int((x < y).sum())
    return (gt - lt) / (len(xs) * len(ys))


def _welch_t(
    mean_x: np.ndarray, var_x: np.ndarray, n_x: int,
    mean_y: np.ndarray, var_y: np.ndarray, n_y: int,
) -> np.ndarray:
    """Elementwise Welch t statistic; a zero-variance gap maps to +/-inf."""
    gap = mean_y - mean_x
    se = np.sqrt(var_x / n_x + var_y / n_y)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = gap / se
        t = np.where((se == 0) & (gap != 0), np.sign(gap) * np.inf, t)
        return np.where((se == 0) & (gap == 0), 0.0, t)


def bootstrap_significant(
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    rng: np.random.Generator,
    n_boot: int = DEFAULT_N_BOOT,
    alpha: float = DEFAULT_ALPHA,
) -> bool:
    """Two-sample studentized bootstrap test of the mean difference.

    Both samples are recentered onto the pooled mean (the null hypothesis)
    and resampled; the observed Welch t statistic is compared against its
    bootstrap null distribution. Studentizing keeps the type-I error close
    to alpha even for small samples, where the raw mean-gap bootstrap is
    anti-conservative. The add-one correction makes the test conservative
    rather than permissive when few resamples reach the observed statistic.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if abs(float(y.mean() - x.mean())) == 0.0:
        return False
    t_obs = abs(float(_welch_t(
        x.mean(), x.var(ddof=1) if len(x) > 1 else 0.0, len(x),
        y.mean(), y.var(ddof=1) if len(y) > 1 else 0.0, len(y),
    )))
    grand = float(np.concatenate([x, y]).mean())
    x_null = x - x.mean() + grand
    y_null = y - y.mean() + grand
    bx = rng.choice(x_null, size=(n_boot, len(x)), replace=True)
    by = rng.choice(y_null, size=(n_boot, len(y)), replace=True)
    ddof_x = 1 if len(x) > 1 else 0
    ddof_y = 1 if len(y) > 1 else 0
    t_null = _welch_t(
        bx.mean(axis=1), bx.var(axis=1, ddof=ddof_x), len(x),
        by.mean(axis=1), by.var(axis=1, ddof=ddof_y), len(y),
    )
    hits = int((np.abs(t_null) >= t_obs).sum())
    p = (1 + hits) / (1 + n_boot)
    return p < alpha


def _best_split(ordered: list[SampleSet]) -> int:
    """Index i splitting ordered[:i] / ordered[i:] with maximal between-group
    sum of squares over the pooled values; first index wins ties."""
    pooled = [v for s in ordered for v in s.values]
    grand = float(np.mean(pooled))
    best_i, best_tau = 1, -math.inf
    for i in range(1, len(ordered)):
        left = [v for s in ordered[:i] for v in s.values]
        right = [v for s in ordered[i:] for v in s.values]
        m1, m2 = float(np.mean(left)), float(np.mean(right))
        tau = len(left) * (m1 - grand) ** 2 + len(right) * (m2 - grand) ** 2
        if tau > best_tau:
            best_tau = tau
            best_i = i
    return best_i


def scott_knott(
    samples: Sequence[SampleSet],
    direction: str = "minimize",
    *,
    alpha: float = DEFAULT_ALPHA,
    n_boot: int = DEFAULT_N_BOOT,
    delta_threshold: float = DEFAULT_DELTA,
    seed: int = 0,
) -> RankTable:
    """Rank sample sets; rank 1 is best for the given direction.

    Maximization is handled by negating the values and minimizing, so the
    two directions are duals by construction. Results are invariant to the
    input order: sets are first sorted canonically by (mean, label).
    """
    if not samples:
        raise ValueError("scott_knott needs at least one sample set")
    if direction not in ("minimize", "maximize"):
        raise ValueError(f"unknown direction: {direction!r}")
    labels = [s.label for s in samples]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate sample set labels")
    if direction == "maximize":
        samples = [
            SampleSet(s.label, tuple(-v for v in s.values)) for s in samples
        ]
    ordered = sorted(samples, key=lambda s: (s.mean(), s.label))
    rng = np.random.default_rng(seed)
    groups: list[list[SampleSet]] = []

    def recurse(segment: list[SampleSet]) -> None:
        if len(segment) == 1:
            groups.append(segment)
            return
        i = _best_split(segment)
        left = [v for s in segment[:i] for v in s.values]
        right = [v for s in segment[i:] for v in s.values]
        separated = bootstrap_significant(
            left, right, rng=rng, n_boot=n_boot, alpha=alpha
        ) and abs(cliffs_delta(left, right)) >= delta_threshold
        if not separated:
            groups.append(segment)
            return
        recurse(segment[:i])
        recurse(segment[i:])

    recurse(ordered)
    ranks = {s.label: rank for rank, group in enumerate(groups, 1) for s in group}
    return RankTable(ranks=ranks)


# ---------------------------------------------------------------------------
# Win counting across datasets (three-treatment protocol)
# ---------------------------------------------------------------------------

def _metric_order(names: Iterable[str]) -> tuple[str, ...]:
    present = set(names)
    known = [m for m in METRIC_NAMES if m in present]
    extra = sorted(present - set(METRIC_NAMES))
    return tuple(known + extra)


@dataclass(frozen=True)
class WinTable:
    treatments: tuple[str, ...]
    metrics: tuple[str, ...]
    wins: Mapping[str, Mapping[str, int]]  # metric -> treatment -> count
    totals: Mapping[str, int]  # untuned / tuned / tie over metrics
    n_datasets: int


def win_table(ranked: Mapping[tuple[str, str], RankTable]) -> WinTable:
    """Count rank-1 finishes per (metric, treatment) across datasets.

    The totals row classifies each metric as an untuned win, a tuned win
    (best tuned treatment), or a tie between the two camps.
    """
    if not ranked:
        raise ValueError("no rank tables given")
    treatment_sets = {frozenset(rt.ranks) for rt in ranked.values()}
    if len(treatment_sets) != 1:
        raise ValueError("inconsistent treatment sets across rank tables")
    treatments_present = set(next(iter(treatment_sets)))
    if UNTUNED_LABEL not in treatments_present:
        raise ValueError(f"treatment set must include {UNTUNED_LABEL!r}")
    tuned = sorted(treatments_present - {UNTUNED_LABEL})
    treatments = (UNTUNED_LABEL, *tuned)
    metric_names = _metric_order(metric for _, metric in ranked)
    datasets = sorted({dataset for dataset, _ in ranked})

    wins: dict[str, dict[str, int]] = {
        m: {t: 0 for t in treatments} for m in metric_names
    }
    for (dataset, metric), table in ranked.items():
        for treatment in table.winners():
            wins[metric][treatment] += 1
    totals = {"untuned": 0, "tuned": 0, "tie": 0}
    for metric in metric_names:
        untuned_wins = wins[metric][UNTUNED_LABEL]
        tuned_wins = max(wins[metric][t] for t in tuned) if tuned else 0
        if untuned_wins > tuned_wins:
            totals["untuned"] += 1
        elif tuned_wins > untuned_wins:
            totals["tuned"] += 1
        else:
            totals["tie"] += 1
    return WinTable(
        treatments=treatments,
        metrics=metric_names,
        wins=wins,
        totals=totals,
        n_datasets=len(datasets),
    )


def win_table_csv(table: WinTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "treatment", "wins"])
    for metric in table.metrics:
        for treatment in table.treatments:
            writer.writerow([metric, treatment, table.wins[metric][treatment]])
    for key in ("untuned", "tuned", "tie"):
        writer.writerow(["total", key, table.totals[key]])
    return buf.getvalue()


def win_table_text(table: WinTable, title: str = "") -> str:
    """Fixed-width block: treatment rows, metric columns, totals last."""
    width = max(len(t) for t in table.treatments + ("treatment",)) + 2
    col = max(max(len(m) for m in table.metrics) + 2, 6)
    lines = []
    if title:
        lines.append(title)
    header = "treatment".ljust(width) + "".join(m.rjust(col) for m in table.metrics)
    lines.append(header)
    for treatment in table.treatments:
        row = treatment.ljust(width) + "".join(
            str(table.wins[m][treatment]).rjust(col) for m in table.metrics
        )
        lines.append(row)
    lines.append(
        "total: untuned={untuned} tuned={tuned} tie={tie}".format(**table.totals)
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Cross-algorithm best-of table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BestOfTable:
    datasets: tuple[str, ...]
    metrics: tuple[str, ...]
    algorithms: tuple[str, ...]
    values: Mapping[tuple[str, str, str], float]  # (dataset, metric, algorithm)
    best: Mapping[tuple[str, str], tuple[str, ...]]  # winners per (dataset, metric)
    wins: Mapping[str, int]  # algorithm -> win count


def _direction_minimizes(metric: str) -> bool:
    if metric in MINIMIZED:
        return MINIMIZED[metric]
    if metric == "loss":
        return True
    raise ValueError(f"unknown metric direction: {metric!r}")


def best_of(
    results: Mapping[tuple[str, str, str], Mapping[str, float]],
) -> BestOfTable:
    """Reduce (dataset, algorithm, treatment) summaries to the best value
    per algorithm and mark the winning algorithm(s) per (dataset, metric).

    Ties credit every tied algorithm. Missing grid cells are an error."""
    if not results:
        raise ValueError("empty result grid")
    datasets = tuple(sorted({d for d, _, _ in results}))
    algorithms = tuple(sorted({a for _, a, _ in results}))
    treatments = tuple(sorted({t for _, _, t in results}))
    missing = [
        (d, a, t)
        for d in datasets
        for a in algorithms
        for t in treatments
        if (d, a, t) not in results
    ]
    if missing:
        raise ValueError(f"missing cells: {missing}")
    metric_names = _metric_order(
        name for cell in results.values() for name in cell
    )
    values: dict[tuple[str, str, str], float] = {}
    best: dict[tuple[str, str], tuple[str, ...]] = {}
    wins = {a: 0 for a in algorithms}
    for dataset in datasets:
        for metric in metric_names:
            minimize = _direction_minimizes(metric)
            for algorithm in algorithms:
                cell_values = [
                    results[(dataset, algorithm, t)][metric] for t in treatments
                ]
                values[(dataset, metric, algorithm)] = (
                    min(cell_values) if minimize else max(cell_values)
                )
            per_alg = {a: values[(dataset, metric, a)] for a in algorithms}
            target = min(per_alg.values()) if minimize else max(per_alg.values())
            winners = tuple(a for a in algorithms if per_alg[a] == target)
            best[(dataset, metric)] = winners
            for algorithm in winners:
                wins[algorithm] += 1
    return BestOfTable(
        datasets=datasets,
        metrics=metric_names,
        algorithms=algorithms,
        values=values,
        best=best,
        wins=wins,
    )


def best_of_csv(table: BestOfTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", "metric", *table.algorithms, "best"])
    for dataset in table.datasets:
        for metric in table.metrics:
            row = [dataset, metric]
            row.extend(
                f"{table.values[(dataset, metric, a)]:.6f}"
                for a in table.algorithms
            )
            row.append("|".join(table.best[(dataset, metric)]))
            writer.writerow(row)
    writer.writerow(["wins", "", *[table.wins[a] for a in table.algorithms], ""])
    return buf.getvalue()


def best_of_text(table: BestOfTable, title: str = "") -> str:
    key_w = max(
        [len("dataset") + len("metric") + 2]
        + [len(d) + len(m) + 2 for d in table.datasets for m in table.metrics]
    )
    col = max(max(len(a) for a in table.algorithms) + 2, 12)
    lines = []
    if title:
        lines.append(title)
    lines.append(
        "dataset/metric".ljust(key_w)
        + "".join(a.rjust(col) for a in table.algorithms)
        + "  best"
    )
    for dataset in table.datasets:
        for metric in table.metrics:
            key = f"{dataset} {metric}".ljust(key_w)
            cells = "".join(
                f"{table.values[(dataset, metric, a)]:.4f}".rjust(col)
                for a in table.algorithms
            )
            lines.append(key + cells + "  " + "|".join(table.best[(dataset, metric)]))
    lines.append(
        "wins".ljust(key_w)
        + "".join(str(table.wins[a]).rjust(col) for a in table.algorithms)
    )
    return "\n".join(lines) + "\n"

"""Trace corpus data model: datasets, call graphs, partitions, synthetic generators.

A dataset is a set of classes, a set of business use cases, and a list of
runtime traces. Each trace belongs to one use case and records an ordered
sequence of (caller, callee) class pairs. Everything downstream (the
partitioning algorithms and the quality metrics) consumes this one format.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)


class ValidationError(ValueError):
    """A corpus file or in-memory structure violates a dataset invariant."""


@dataclass(frozen=True)
class Trace:
    """One recorded execution of a business use case."""

    use_case: str
    calls: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class TraceDataset:
    """An immutable trace corpus.

    `classes` and `use_cases` keep their load order; canonical serialization
    sorts them (see `canonical_json`).
    """

    classes: tuple[str, ...]
    use_cases: tuple[str, ...]
    traces: tuple[Trace, ...]

    def validate(self) -> None:
        """Raise ValidationError naming the first violated invariant."""
        if len(self.classes) < 2:
            raise ValidationError("dataset needs at least 2 classes")
        if len(set(self.classes)) != len(self.classes):
            raise ValidationError("duplicate class identifier in 'classes'")
        if len(set(self.use_cases)) != len(self.use_cases):
            raise ValidationError("duplicate use-case identifier in 'use_cases'")
        if not self.traces:
            raise ValidationError("dataset needs at least 1 trace")
        known_classes = set(self.classes)
        known_use_cases = set(self.use_cases)
        for i, trace in enumerate(self.traces):
            if trace.use_case not in known_use_cases:
                raise ValidationError(
                    f"trace {i}: unknown use case {trace.use_case!r}"
                )
            if not trace.calls:
                raise ValidationError(f"trace {i}: empty call list")
            for caller, callee in trace.calls:
                if caller not in known_classes:
                    raise ValidationError(f"trace {i}: unknown class {caller!r}")
                if callee not in known_classes:
                    raise ValidationError(f"trace {i}: unknown class {callee!r}")

    def total_calls(self, include_self: bool = False) -> int:
        """Number of call occurrences across all traces."""
        if include_self:
            return sum(len(t.calls) for t in self.traces)
        return sum(
            1 for t in self.traces for a, b in t.calls if a != b
        )


@dataclass(frozen=True)
class CallGraph:
    """Aggregated runtime-call weights between classes.

    `directed_weight[(a, b)]` counts a -> b call occurrences; `edge_weight`
    collapses direction onto sorted pairs. Self-calls are dropped at
    construction time.
    """

    nodes: tuple[str, ...]
    directed_weight: Mapping[tuple[str, str], int]
    edge_weight: Mapping[tuple[str, str], int]
    dropped_self_calls: int = 0

    def weight(self, a: str, b: str) -> int:
        """Undirected call count between two classes."""
        key = (a, b) if a <= b else (b, a)
        return self.edge_weight.get(key, 0)

    def total_directed_weight(self) -> int:
        return sum(self.directed_weight.values())


@dataclass(frozen=True)
class Partition:
    """Assignment of every class to exactly one cluster index in 0..k-1."""

    assignment: Mapping[str, int]
    k: int = field(default=0)

    @staticmethod
    def from_assignment(assignment: Mapping[str, int]) -> "Partition":
        """Build a canonical partition: cluster indices are renumbered so
        clusters are contiguous, non-empty, and ordered by their
        lexicographically smallest member."""
        if not assignment:
            raise ValidationError("partition assignment is empty")
        members: dict[int, list[str]] = {}
        for cls, idx in assignment.items():
            members.setdefault(idx, []).append(cls)
        ordered = sorted(members.values(), key=lambda group: min(group))
        remap = {cls: new_idx for new_idx, group in enumerate(ordered) for cls in group}
        return Partition(assignment=dict(sorted(remap.items())), k=len(ordered))

    @staticmethod
    def from_clusters(clusters: Iterable[Iterable[str]]) -> "Partition":
        assignment: dict[str, int] = {}
        for idx, group in enumerate(clusters):
            group = list(group)
            if not group:
                raise ValidationError("empty cluster in partition")
            for cls in group:
                if cls in assignment:
                    raise ValidationError(f"class {cls!r} assigned twice")
                assignment[cls] = idx
        return Partition.from_assignment(assignment)

    def clusters(self) -> list[list[str]]:
        """Clusters as sorted member lists, ordered by first member."""
        groups: list[list[str]] = [[] for _ in range(self.k)]
        for cls, idx in self.assignment.items():
            groups[idx].append(cls)
        for group in groups:
            group.sort()
        return groups

    def validate_against(self, ds: TraceDataset) -> None:
        """Check the partition is a total function over the dataset classes."""
        assigned = set(self.assignment)
        expected = set(ds.classes)
        if assigned != expected:
            missing = sorted(expected - assigned)
            extra = sorted(assigned - expected)
            raise ValidationError(
                f"partition/class mismatch (missing={missing[:3]}, extra={extra[:3]})"
            )
        used = set(self.assignment.values())
        if used != set(range(self.k)):
            raise ValidationError("cluster indices are not contiguous 0..K-1")


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def load_dataset(path: str | Path) -> TraceDataset:
    """Load and validate a trace-corpus JSON file.

    Raises json.JSONDecodeError on malformed JSON and ValidationError on the
    first violated dataset invariant.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    for key in ("classes", "use_cases", "traces"):
        if key not in raw:
            raise ValidationError(f"missing top-level key {key!r}")
    traces = []
    for i, entry in enumerate(raw["traces"]):
        if "use_case" not in entry or "calls" not in entry:
            raise ValidationError(f"trace {i}: missing 'use_case' or 'calls'")
        calls = []
        for call in entry["calls"]:
            if not isinstance(call, list) or len(call) != 2:
                raise ValidationError(f"trace {i}: call is not a [caller, callee] pair")
            calls.append((str(call[0]), str(call[1])))
        traces.append(Trace(use_case=str(entry["use_case"]), calls=tuple(calls)))
    ds = TraceDataset(
        classes=tuple(str(c) for c in raw["classes"]),
        use_cases=tuple(str(u) for u in raw["use_cases"]),
        traces=tuple(traces),
    )
    ds.validate()
    return ds


def canonical_json(ds: TraceDataset) -> str:
    """Canonical serialization: sorted keys, sorted class and use-case lists,
    traces kept in order. Reproducible byte-for-byte."""
    doc = {
        "classes": sorted(ds.classes),
        "use_cases": sorted(ds.use_cases),
        "traces": [
            {"use_case": t.use_case, "calls": [[a, b] for a, b in t.calls]}
            for t in ds.traces
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_dataset(ds: TraceDataset, path: str | Path) -> None:
    """Write the canonical JSON form of a dataset."""
    Path(path).write_text(canonical_json(ds), encoding="utf-8")


# ---------------------------------------------------------------------------
# Derived structures
# ---------------------------------------------------------------------------

def build_call_graph(ds: TraceDataset) -> CallGraph:
    """Aggregate per-pair call counts across all traces.

    Self-calls neither couple nor cohere distinct classes; they are dropped
    and the drop count is logged.
    """
    directed: dict[tuple[str, str], int] = {}
    dropped = 0
    for trace in ds.traces:
        for caller, callee in trace.calls:
            if caller == callee:
                dropped += 1
                continue
            key = (caller, callee)
            directed[key] = directed.get(key, 0) + 1
    undirected: dict[tuple[str, str], int] = {}
    for (a, b), count in directed.items():
        key = (a, b) if a <= b else (b, a)
        undirected[key] = undirected.get(key, 0) + count
    if dropped:
        logger.info("build_call_graph: dropped %d self-call(s)", dropped)
    return CallGraph(
        nodes=tuple(ds.classes),
        directed_weight=directed,
        edge_weight=undirected,
        dropped_self_calls=dropped,
    )


def call_graph_csv(graph: CallGraph) -> str:
    """CSV export, one `caller,callee,count` row per directed pair."""
    lines = ["caller,callee,count"]
    for (caller, callee) in sorted(graph.directed_weight):
        lines.append(f"{caller},{callee},{graph.directed_weight[(caller, callee)]}")
    return "\n".join(lines) + "\n"


def cooccurrence_matrix(ds: TraceDataset) -> np.ndarray:
    """Jaccard similarity of trace participation, aligned to `ds.classes`.

    Entry (a, b) is |T(a) & T(b)| / |T(a) | T(b)| where T(x) is the set of
    traces in which x appears as caller or callee. The diagonal is 1 for
    classes seen in at least one trace, 0 otherwise.
    """
    index = {cls: i for i, cls in enumerate(ds.classes)}
    participation: list[set[int]] = [set() for _ in ds.classes]
    for t_idx, trace in enumerate(ds.traces):
        for caller, callee in trace.calls:
            participation[index[caller]].add(t_idx)
            participation[index[callee]].add(t_idx)
    n = len(ds.classes)
    sim = np.zeros((n, n), dtype=float)
    for i in range(n):
        if participation[i]:
            sim[i, i] = 1.0
        for j in range(i + 1, n):
            union = len(participation[i] | participation[j])
            if union:
                value = len(participation[i] & participation[j]) / union
                sim[i, j] = value
                sim[j, i] = value
    return sim


# ---------------------------------------------------------------------------
# Synthetic corpora
# ---------------------------------------------------------------------------

def _group_of(i: int, n_classes: int, n_groups: int) -> int:
    # Contiguous balanced blocks over the lexicographic class order.
    return i * n_groups // n_classes


def generate_synthetic(
    seed: int,
    n_classes: int,
    n_use_cases: int,
    modularity: float,
) -> TraceDataset:
    """Generate a deterministic corpus with tunable planted structure.

    Classes are split into contiguous groups, one home group per use case.
    Each call stays inside the home group with probability `modularity` and
    is drawn uniformly over all distinct class pairs otherwise. At
    modularity=1 each use case touches exactly one group, so inter-group edge
    weight is exactly zero; at modularity=0 calls are uniform over all pairs.
    """
    if n_classes < 2:
        raise ValueError("n_classes must be >= 2")
    if n_use_cases < 1:
        raise ValueError("n_use_cases must be >= 1")
    if not 0.0 <= modularity <= 1.0:
        raise ValueError("modularity must be in [0, 1]")
    rng = random.Random(seed)
    classes = [f"C{i:03d}" for i in range(n_classes)]
    use_cases = [f"uc{j:02d}" for j in range(n_use_cases)]
    n_groups = min(n_use_cases, n_classes)
    groups: list[list[str]] = [[] for _ in range(n_groups)]
    for i, cls in enumerate(classes):
        groups[_group_of(i, n_classes, n_groups)].append(cls)

    def mixed_call(intended: tuple[str, str]) -> tuple[str, str]:
        # Keep the intended in-group call with probability `modularity`.
        if rng.random() < modularity:
            return intended
        a, b = rng.sample(classes, 2)
        return a, b

    traces: list[Trace] = []
    for u, use_case in enumerate(use_cases):
        home = groups[u % n_groups]
        # Tour trace: walks the whole home group so that at modularity=1 all
        # in-group pairs share at least one trace.
        walk = home if len(home) > 1 else home * 2
        tour = [
            mixed_call((walk[i], walk[i + 1]))
            for i in range(len(walk) - 1)
        ]
        traces.append(Trace(use_case=use_case, calls=tuple(tour)))
        for _ in range(3):
            length = rng.randint(2, 6)
            calls = []
            for _ in range(length):
                if len(home) > 1:
                    intended = tuple(rng.sample(home, 2))
                else:
                    intended = (home[0], home[0])
                calls.append(mixed_call(intended))
            traces.append(Trace(use_case=use_case, calls=tuple(calls)))
    ds = TraceDataset(
        classes=tuple(classes), use_cases=tuple(use_cases), traces=tuple(traces)
    )
    ds.validate()
    return ds


def planted_partition(n_classes: int, n_use_cases: int) -> Partition:
    """Ground-truth group assignment matching `generate_synthetic`."""
    n_groups = min(n_use_cases, n_classes)
    assignment = {
        f"C{i:03d}": _group_of(i, n_classes, n_groups) for i in range(n_classes)
    }
    return Partition.from_assignment(assignment)


# ---------------------------------------------------------------------------
# Partition I/O
# ---------------------------------------------------------------------------

def partition_json(p: Partition) -> str:
    """Serialize as {"clusters": [...]} with canonical ordering."""
    return json.dumps({"clusters": p.clusters()}, indent=2) + "\n"


def save_partition(p: Partition, path: str | Path) -> None:
    Path(path).write_text(partition_json(p), encoding="utf-8")


def load_partition(path: str | Path) -> Partition:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if "clusters" not in raw:
        raise ValidationError("missing top-level key 'clusters'")
    return Partition.from_clusters(raw["clusters"])

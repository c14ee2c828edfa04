"""Partition-quality metrics and the scalar loss driving the tuners.

Five scores per partition:

* bcp: mean entropy (bits) of the use-case touch distribution per cluster;
  lower means cleaner business separation.
* icp: fraction of runtime calls crossing cluster boundaries; lower is less
  inter-service traffic.
* sm:  structural modularity, cohesion minus coupling over distinct linked
  class pairs; higher is better.
* mq:  modular quality, the sum of per-cluster factors 2*mu / (2*mu + inter)
  over directed call weights; higher is better.
* ifn: mean number of externally-called classes per cluster; lower means a
  smaller service API surface.

The loss is a signed weighted sum over (bcp, icp, sm, mq, ifn); default
weights are +1 for minimized metrics and -1 for maximized ones, so smaller
loss is always better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import CallGraph, Partition, TraceDataset, build_call_graph

METRIC_NAMES = ("bcp", "icp", "sm", "mq", "ifn")

# Direction per metric: True when smaller values are better.
MINIMIZED = {"bcp": True, "icp": True, "sm": False, "mq": False, "ifn": True}

DEFAULT_WEIGHTS = (1.0, 1.0, -1.0, -1.0, 1.0)


@dataclass(frozen=True)
class MetricVector:
    """The five quality scores of one partition."""

    bcp: float
    icp: float
    sm: float
    mq: float
    ifn: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.bcp, self.icp, self.sm, self.mq, self.ifn)

    def csv_row(self) -> str:
        """Fixed-order CSV row `bcp,icp,sm,mq,ifn` with 6 decimal places."""
        return ",".join(f"{v:.6f}" for v in self.as_tuple())

    @staticmethod
    def csv_header() -> str:
        return ",".join(METRIC_NAMES)


@dataclass(frozen=True)
class LossSpec:
    """Signed weights over (bcp, icp, sm, mq, ifn)."""

    weights: tuple[float, float, float, float, float] = DEFAULT_WEIGHTS


def _check(ds: TraceDataset, p: Partition) -> None:
    p.validate_against(ds)


def _touch_counts(ds: TraceDataset, p: Partition) -> list[dict[str, int]]:
    """Per cluster: use case -> number of member classes it touches."""
    touched: dict[str, set[str]] = {}
    for trace in ds.traces:
        seen = touched.setdefault(trace.use_case, set())
        for caller, callee in trace.calls:
            seen.add(caller)
            seen.add(callee)
    counts: list[dict[str, int]] = [{} for _ in range(p.k)]
    for use_case, classes in touched.items():
        for cls in classes:
            bucket = counts[p.assignment[cls]]
            bucket[use_case] = bucket.get(use_case, 0) + 1
    return counts


def bcp(ds: TraceDataset, p: Partition) -> float:
    """Mean per-cluster entropy of use-case touch counts, in bits."""
    _check(ds, p)
    total = 0.0
    for bucket in _touch_counts(ds, p):
        mass = sum(bucket.values())
        if mass == 0:
            continue
        entropy = 0.0
        for count in bucket.values():
            q = count / mass
            entropy -= q * math.log2(q)
        total += entropy
    return total / p.k


def icp(ds: TraceDataset, p: Partition) -> float:
    """Fraction of non-self call occurrences that cross clusters."""
    _check(ds, p)
    total = 0
    crossing = 0
    for trace in ds.traces:
        for caller, callee in trace.calls:
            if caller == callee:
                continue
            total += 1
            if p.assignment[caller] != p.assignment[callee]:
                crossing += 1
    if total == 0:
        raise ValueError("empty call set: dataset has no non-self calls")
    return crossing / total


def _linked_pairs(graph: CallGraph, p: Partition) -> tuple[list[int], dict[tuple[int, int], int]]:
    """Distinct linked class pairs, split into intra- and inter-cluster."""
    intra = [0] * p.k
    inter: dict[tuple[int, int], int] = {}
    for (a, b) in graph.edge_weight:
        ca, cb = p.assignment[a], p.assignment[b]
        if ca == cb:
            intra[ca] += 1
        else:
            key = (ca, cb) if ca < cb else (cb, ca)
            inter[key] = inter.get(key, 0) + 1
    return intra, inter


def sm(ds: TraceDataset, p: Partition) -> float:
    """Structural modularity: mean cohesion minus mean pairwise coupling.

    Cohesion of cluster i is mu_i / N_i^2 over distinct linked pairs;
    coupling of clusters i, j is sigma_ij / (2 * N_i * N_j). The coupling
    term is zero for single-cluster partitions.
    """
    _check(ds, p)
    graph = build_call_graph(ds)
    intra, inter = _linked_pairs(graph, p)
    sizes = [0] * p.k
    for cls in ds.classes:
        sizes[p.assignment[cls]] += 1
    cohesion = sum(
        intra[i] / (sizes[i] ** 2) for i in range(p.k) if sizes[i] > 1
    ) / p.k
    if p.k == 1:
        return cohesion
    coupling = sum(
        count / (2.0 * sizes[i] * sizes[j]) for (i, j), count in inter.items()
    ) / (p.k * (p.k - 1) / 2.0)
    return cohesion - coupling


def mq(ds: TraceDataset, p: Partition) -> float:
    """Modular quality: sum over clusters of 2*mu_i / (2*mu_i + inter_i)
    on directed call weights; a cluster with no incident calls scores 0."""
    _check(ds, p)
    graph = build_call_graph(ds)
    intra = [0] * p.k
    incident = [0] * p.k
    for (a, b), weight in graph.directed_weight.items():
        ca, cb = p.assignment[a], p.assignment[b]
        incident[ca] += weight
        incident[cb] += weight
        if ca == cb:
            intra[ca] += weight
    total = 0.0
    for i in range(p.k):
        # incident counts intra calls twice, so incident == 2*mu + inter.
        if incident[i] > 0:
            total += 2.0 * intra[i] / incident[i]
    return total


def ifn(ds: TraceDataset, p: Partition) -> float:
    """Mean count per cluster of member classes called from outside."""
    _check(ds, p)
    graph = build_call_graph(ds)
    interfaces: set[str] = set()
    for (caller, callee) in graph.directed_weight:
        if p.assignment[caller] != p.assignment[callee]:
            interfaces.add(callee)
    return len(interfaces) / p.k


def evaluate(ds: TraceDataset, p: Partition) -> MetricVector:
    """All five metrics; component-equal to the scalar operations."""
    return MetricVector(
        bcp=bcp(ds, p), icp=icp(ds, p), sm=sm(ds, p), mq=mq(ds, p), ifn=ifn(ds, p)
    )


def loss(m: MetricVector, spec: LossSpec | None = None) -> float:
    """Signed weighted sum of the metric vector, smaller is better."""
    spec = spec or LossSpec()
    values = m.as_tuple()
    if not all(math.isfinite(v) for v in values):
        raise ValueError("non-finite metric value")
    if not all(math.isfinite(w) for w in spec.weights):
        raise ValueError("non-finite loss weight")
    return sum(w * v for w, v in zip(spec.weights, values))

"""Four partitioning strategies behind one dispatch interface.

* mono2micro: average-linkage agglomerative clustering on Jaccard
  co-occurrence distance, cut at a requested cluster count.
* mem: maximum-coupling spanning forest (Kruskal) over the call graph,
  min-cut by deleting the weakest tree edges, with a size cap enforced by
  recursive splitting.
* bunch: restart hill climbing that maximizes modular quality (MQ) over
  single-class moves.
* fosci: trace reduction, threshold-stopped clustering into functional
  atoms, then NSGA-II over atom-to-cluster assignments with a knee-point
  pick from the final front.

All four are deterministic for a fixed (dataset, parameters, seed).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .corpus import (
    Partition,
    Trace,
    TraceDataset,
    build_call_graph,
    cooccurrence_matrix,
)


class Algorithm(str, Enum):
    MONO2MICRO = "mono2micro"
    MEM = "mem"
    BUNCH = "bunch"
    FOSCI = "fosci"


REQUIRED_PARAMS: dict[Algorithm, tuple[str, ...]] = {
    Algorithm.MONO2MICRO: ("n_clusters",),
    Algorithm.MEM: ("n_partitions", "max_partition_size"),
    Algorithm.BUNCH: ("n_partitions", "init_population", "neighbor_fraction"),
    Algorithm.FOSCI: (
        "n_clusters",
        "nsga_iterations",
        "population_size",
        "parent_size",
        "stop_threshold",
    ),
}

# Hill-climbing step cap per restart; bounds desk-scale runtime.
DEFAULT_BUNCH_BUDGET = 1000


@dataclass(frozen=True)
class PartitionerConfig:
    """One concrete parameterization of one algorithm."""

    algorithm: Algorithm
    params: Mapping[str, float]
    seed: int = 0


def default_params(algorithm: Algorithm, ds: TraceDataset) -> dict[str, float]:
    """Pinned off-the-shelf settings for the untuned treatment."""
    if algorithm is Algorithm.MONO2MICRO:
        return {"n_clusters": 5}
    if algorithm is Algorithm.MEM:
        return {"n_partitions": 5, "max_partition_size": len(ds.classes)}
    if algorithm is Algorithm.BUNCH:
        return {"n_partitions": 5, "init_population": 10, "neighbor_fraction": 1.0}
    if algorithm is Algorithm.FOSCI:
        return {
            "n_clusters": 5,
            "nsga_iterations": 50,
            "population_size": 20,
            "parent_size": 10,
            "stop_threshold": 0.5,
        }
    raise ValueError(f"unknown algorithm: {algorithm}")


# ---------------------------------------------------------------------------
# mono2micro: hierarchical clustering on Jaccard distance
# ---------------------------------------------------------------------------

def partition_mono2micro(ds: TraceDataset, n_clusters: int, seed: int = 0) -> Partition:
    """Average-linkage clustering on 1 - Jaccard(co-occurrence), cut at
    `n_clusters`. Deterministic; classes are processed in lexicographic
    order so linkage ties break the same way every run. `seed` is accepted
    for interface uniformity and unused."""
    n = len(ds.classes)
    if not 2 <= n_clusters <= n:
        raise ValueError(f"n_clusters must be in [2, {n}], got {n_clusters}")
    order = sorted(ds.classes)
    perm = [ds.classes.index(c) for c in order]
    sim = cooccurrence_matrix(ds)[np.ix_(perm, perm)]
    dist = 1.0 - sim
    np.fill_diagonal(dist, 0.0)
    merges = linkage(squareform(dist, checks=False), method="average")
    labels = fcluster(merges, t=n_clusters, criterion="maxclust")
    return Partition.from_assignment(
        {cls: int(label) for cls, label in zip(order, labels)}
    )


# ---------------------------------------------------------------------------
# MEM: maximum spanning forest and min-cut
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, items: Sequence[str]):
        self.parent = {item: item for item in items}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # Deterministic: smaller name becomes the root.
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _components(nodes: Sequence[str], edges: Sequence[tuple[int, str, str]]) -> list[list[str]]:
    uf = _UnionFind(nodes)
    for _, a, b in edges:
        uf.union(a, b)
    groups: dict[str, list[str]] = {}
    for node in nodes:
        groups.setdefault(uf.find(node), []).append(node)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def _split_oversized(
    nodes: list[str], edges: list[tuple[int, str, str]], max_size: int
) -> list[list[str]]:
    """Recursively delete the lowest-weight internal tree edge until every
    component fits under `max_size`."""
    if len(nodes) <= max_size:
        return [sorted(nodes)]
    cut = min(edges)  # (weight, a, b): lowest weight, then lexicographic pair
    remaining = [e for e in edges if e != cut]
    halves = _components(nodes, remaining)
    node_side = {node: i for i, side in enumerate(halves) for node in side}
    out: list[list[str]] = []
    for i, side in enumerate(halves):
        side_edges = [e for e in remaining if node_side[e[1]] == i]
        out.extend(_split_oversized(side, side_edges, max_size))
    return out


def partition_mem(
    ds: TraceDataset,
    n_partitions: int,
    max_partition_size: int,
    seed: int = 0,
) -> Partition:
    """Min-cut over a maximum-coupling spanning tree of the call graph.

    Kruskal runs on edge weights in descending order; components left
    disconnected by real edges are joined by zero-weight connector edges so
    the weakest cuts fall on them first. The `n_partitions - 1` lowest
    weight tree edges are deleted, oversized components are recursively
    split, and classes with no calls at all become trailing singleton
    clusters. `seed` is accepted for interface uniformity and unused.
    """
    n = len(ds.classes)
    if not 2 <= n_partitions <= n:
        raise ValueError(f"n_partitions must be in [2, {n}], got {n_partitions}")
    if max_partition_size < 2:
        raise ValueError("max_partition_size must be >= 2")
    if max_partition_size < math.ceil(n / n_partitions):
        raise ValueError(
            "infeasible size constraint: "
            f"{n_partitions} partitions of <= {max_partition_size} classes "
            f"cannot cover {n} classes"
        )
    graph = build_call_graph(ds)
    degree: dict[str, int] = {c: 0 for c in ds.classes}
    for (a, b), w in graph.edge_weight.items():
        degree[a] += w
        degree[b] += w
    isolated = sorted(c for c in ds.classes if degree[c] == 0)
    active = sorted(c for c in ds.classes if degree[c] > 0)

    clusters: list[list[str]] = []
    if active:
        ranked = sorted(
            ((w, a, b) for (a, b), w in graph.edge_weight.items()),
            key=lambda e: (-e[0], e[1], e[2]),
        )
        uf = _UnionFind(active)
        tree: list[tuple[int, str, str]] = []
        for w, a, b in ranked:
            if uf.union(a, b):
                tree.append((w, a, b))
        # Zero-weight connectors between leftover components, chained over
        # their smallest members in lexicographic order.
        reps = sorted({uf.find(c) for c in active})
        rep_min = {r: min(c for c in active if uf.find(c) == r) for r in reps}
        anchors = sorted(rep_min.values())
        for left, right in zip(anchors, anchors[1:]):
            uf.union(left, right)
            tree.append((0, left, right))
        tree.sort()
        cuts = min(n_partitions - 1, len(tree))
        kept = tree[cuts:]
        node_comp: dict[str, int] = {}
        comps = _components(active, kept)
        for i, comp in enumerate(comps):
            for node in comp:
                node_comp[node] = i
        for i, comp in enumerate(comps):
            comp_edges = [e for e in kept if node_comp[e[1]] == i]
            clusters.extend(_split_oversized(list(comp), comp_edges, max_partition_size))
    clusters.extend([c] for c in isolated)
    return Partition.from_clusters(clusters)


# ---------------------------------------------------------------------------
# Bunch: restart hill climbing on MQ
# ---------------------------------------------------------------------------

@dataclass
class BunchResult:
    partition: Partition
    best_mq: float
    initial_mqs: list[float] = field(default_factory=list)


class _MqState:
    """Incremental MQ bookkeeping for single-class moves.

    All counters are integers, so cluster factors are always recomputed
    exactly; the per-cluster identity `incident == 2*intra + inter` turns
    each factor into 2*mu/degw.
    """

    def __init__(self, weights: np.ndarray, labels: list[int], max_k: int):
        self.w = weights
        self.deg = weights.sum(axis=1)
        n = weights.shape[0]
        self.labels = labels
        self.max_k = max_k
        self.k = max(labels) + 1
        self.size = [0] * (max_k + 1)
        self.mu = [0] * (max_k + 1)
        self.degw = [0] * (max_k + 1)
        self.member_w = np.zeros((n, max_k + 1), dtype=np.int64)
        for c, lab in enumerate(labels):
            self.size[lab] += 1
            self.member_w[:, lab] += weights[:, c]
        for c, lab in enumerate(labels):
            self.degw[lab] += int(self.deg[c])
        for c in range(n):
            for d in range(c + 1, n):
                if labels[c] == labels[d]:
                    self.mu[labels[c]] += int(weights[c, d])

    @staticmethod
    def _cf(mu: int, degw: int) -> float:
        return 2.0 * mu / degw if degw > 0 else 0.0

    def mq(self) -> float:
        return sum(self._cf(self.mu[i], self.degw[i]) for i in range(self.k))

    def peek_move(self, c: int, target: int, current_mq: float) -> float:
        """MQ after moving class c to `target` (may equal self.k = fresh)."""
        a = self.labels[c]
        deg_c = int(self.deg[c])
        mu_a = self.mu[a] - int(self.member_w[c, a])
        degw_a = self.degw[a] - deg_c
        if target == self.k:
            mu_t_old, degw_t_old = 0, 0
            mu_t = 0
            degw_t = deg_c
        else:
            mu_t_old, degw_t_old = self.mu[target], self.degw[target]
            mu_t = mu_t_old + int(self.member_w[c, target])
            degw_t = degw_t_old + deg_c
        return (
            current_mq
            - self._cf(self.mu[a], self.degw[a])
            - self._cf(mu_t_old, degw_t_old)
            + self._cf(mu_a, degw_a)
            + self._cf(mu_t, degw_t)
        )

    def apply_move(self, c: int, target: int) -> None:
        a = self.labels[c]
        deg_c = int(self.deg[c])
        if target == self.k:
            self.k += 1
        self.mu[a] -= int(self.member_w[c, a])
        self.degw[a] -= deg_c
        self.size[a] -= 1
        self.mu[target] += int(self.member_w[c, target])
        self.degw[target] += deg_c
        self.size[target] += 1
        self.member_w[:, a] -= self.w[:, c]
        self.member_w[:, target] += self.w[:, c]
        self.labels[c] = target
        if self.size[a] == 0:
            last = self.k - 1
            if a != last:
                for idx, lab in enumerate(self.labels):
                    if lab == last:
                        self.labels[idx] = a
                self.size[a] = self.size[last]
                self.mu[a] = self.mu[last]
                self.degw[a] = self.degw[last]
                self.member_w[:, a] = self.member_w[:, last]
            self.size[last] = 0
            self.mu[last] = 0
            self.degw[last] = 0
            self.member_w[:, last] = 0
            self.k -= 1


def _symmetric_weights(ds: TraceDataset, order: list[str]) -> np.ndarray:
    graph = build_call_graph(ds)
    index = {c: i for i, c in enumerate(order)}
    w = np.zeros((len(order), len(order)), dtype=np.int64)
    for (a, b), count in graph.edge_weight.items():
        w[index[a], index[b]] = count
        w[index[b], index[a]] = count
    return w


def bunch_search(
    ds: TraceDataset,
    n_partitions: int,
    init_population: int,
    neighbor_fraction: float,
    seed: int = 0,
    budget: int = DEFAULT_BUNCH_BUDGET,
) -> BunchResult:
    """Steepest-ascent hill climbing over single-class moves, restarted from
    `init_population` random assignments; returns the best-MQ partition."""
    n = len(ds.classes)
    if n_partitions < 2:
        raise ValueError("n_partitions must be >= 2")
    if init_population < 2:
        raise ValueError("init_population must be >= 2")
    if not 0.0 <= neighbor_fraction <= 1.0:
        raise ValueError("neighbor_fraction must be in [0, 1]")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    order = sorted(ds.classes)
    weights = _symmetric_weights(ds, order)
    rng = random.Random(seed)
    cap = min(n_partitions, n)

    best_labels: list[int] | None = None
    best_mq = -math.inf
    initial_mqs: list[float] = []
    for _ in range(init_population):
        raw = [rng.randrange(cap) for _ in range(n)]
        # Compact labels to 0..K-1 in order of first appearance.
        remap: dict[int, int] = {}
        labels = [remap.setdefault(lab, len(remap)) for lab in raw]
        state = _MqState(weights, labels, cap)
        current = state.mq()
        initial_mqs.append(current)
        for _ in range(budget):
            moves: list[tuple[int, int]] = []
            allow_fresh = state.k < cap
            for c in range(n):
                lab = state.labels[c]
                moves.extend((c, t) for t in range(state.k) if t != lab)
                if allow_fresh:
                    moves.append((c, state.k))
            if not moves:
                break
            sample_size = max(1, math.ceil(neighbor_fraction * len(moves)))
            if sample_size < len(moves):
                chosen = sorted(rng.sample(range(len(moves)), sample_size))
                moves = [moves[i] for i in chosen]
            best_gain_mq = -math.inf
            best_move: tuple[int, int] | None = None
            for c, t in moves:
                candidate = state.peek_move(c, t, current)
                if candidate > best_gain_mq + 1e-12:
                    best_gain_mq = candidate
                    best_move = (c, t)
            if best_move is None or best_gain_mq <= current + 1e-12:
                break
            state.apply_move(*best_move)
            current = state.mq()
        if current > best_mq:
            best_mq = current
            best_labels = list(state.labels)
    assert best_labels is not None
    partition = Partition.from_assignment(
        {cls: best_labels[i] for i, cls in enumerate(order)}
    )
    return BunchResult(partition=partition, best_mq=best_mq, initial_mqs=initial_mqs)


def partition_bunch(
    ds: TraceDataset,
    n_partitions: int,
    init_population: int,
    neighbor_fraction: float,
    seed: int = 0,
    budget: int = DEFAULT_BUNCH_BUDGET,
) -> Partition:
    return bunch_search(
        ds, n_partitions, init_population, neighbor_fraction, seed, budget
    ).partition


# ---------------------------------------------------------------------------
# FoSCI: functional atoms merged by NSGA-II
# ---------------------------------------------------------------------------

@dataclass
class FosciResult:
    partition: Partition
    atoms: list[list[str]]
    front_genomes: list[tuple[int, ...]]
    front_objectives: list[tuple[float, float]]  # (icp, sm) per front member
    knee_index: int


def reduce_traces(ds: TraceDataset) -> TraceDataset:
    """Drop traces whose call multiset duplicates an earlier trace."""
    seen: set[tuple] = set()
    kept: list[Trace] = []
    for trace in ds.traces:
        counts: dict[tuple[str, str], int] = {}
        for call in trace.calls:
            counts[call] = counts.get(call, 0) + 1
        key = tuple(sorted(counts.items()))
        if key in seen:
            continue
        seen.add(key)
        kept.append(trace)
    return TraceDataset(classes=ds.classes, use_cases=ds.use_cases, traces=tuple(kept))


def functional_atoms(ds: TraceDataset, stop_threshold: float) -> list[list[str]]:
    """Threshold-stopped agglomerative clustering into functional atoms.

    Merging continues while the smallest average-linkage distance is below
    `stop_threshold`; atoms are returned ordered by smallest member.
    """
    if stop_threshold <= 0:
        raise ValueError("stop_threshold must be positive")
    order = sorted(ds.classes)
    n = len(order)
    perm = [ds.classes.index(c) for c in order]
    dist = 1.0 - cooccurrence_matrix(ds)[np.ix_(perm, perm)]
    np.fill_diagonal(dist, 0.0)
    merges = linkage(squareform(dist, checks=False), method="average")
    uf = _UnionFind(order)
    for row in merges:
        if row[2] >= stop_threshold:
            break
        # Linkage row ids >= n refer to merged clusters; union by any member.
        members = []
        for node_id in (int(row[0]), int(row[1])):
            while node_id >= n:
                node_id = int(merges[node_id - n][0])
            members.append(order[node_id])
        uf.union(members[0], members[1])
    groups: dict[str, list[str]] = {}
    for cls in order:
        groups.setdefault(uf.find(cls), []).append(cls)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def _dominates(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[0] <= b[0] and a[1] <= b[1] and (a[0] < b[0] or a[1] < b[1])


def _non_dominated_fronts(objs: list[tuple[float, float]]) -> list[list[int]]:
    n = len(objs)
    dominated_by = [0] * n
    dominates_list: list[list[int]] = [[] for _ in range(n)]
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if _dominates(objs[p], objs[q]):
                dominates_list[p].append(q)
            elif _dominates(objs[q], objs[p]):
                dominated_by[p] += 1
    fronts: list[list[int]] = []
    current = [p for p in range(n) if dominated_by[p] == 0]
    while current:
        fronts.append(current)
        nxt: list[int] = []
        for p in current:
            for q in dominates_list[p]:
                dominated_by[q] -= 1
                if dominated_by[q] == 0:
                    nxt.append(q)
        current = sorted(nxt)
    return fronts


def _crowding(front: list[int], objs: list[tuple[float, float]]) -> dict[int, float]:
    distance = {i: 0.0 for i in front}
    for dim in range(2):
        ranked = sorted(front, key=lambda i: (objs[i][dim], i))
        distance[ranked[0]] = math.inf
        distance[ranked[-1]] = math.inf
        span = objs[ranked[-1]][dim] - objs[ranked[0]][dim]
        if span <= 0:
            continue
        for pos in range(1, len(ranked) - 1):
            gap = objs[ranked[pos + 1]][dim] - objs[ranked[pos - 1]][dim]
            distance[ranked[pos]] += gap / span
    return distance


class _AtomObjectives:
    """ICP and SM evaluated on atom-level aggregates of the full dataset."""

    def __init__(self, ds: TraceDataset, atoms: list[list[str]]):
        graph = build_call_graph(ds)
        atom_of = {cls: i for i, atom in enumerate(atoms) for cls in atom}
        n_atoms = len(atoms)
        self.sizes = np.array([len(a) for a in atoms], dtype=float)
        self.directed = np.zeros((n_atoms, n_atoms), dtype=float)
        self.pairs = np.zeros((n_atoms, n_atoms), dtype=float)
        self.pairs_in = np.zeros(n_atoms, dtype=float)
        for (a, b), w in graph.directed_weight.items():
            self.directed[atom_of[a], atom_of[b]] += w
        for (a, b) in graph.edge_weight:
            ia, ib = atom_of[a], atom_of[b]
            if ia == ib:
                self.pairs_in[ia] += 1
            else:
                self.pairs[ia, ib] += 1
                self.pairs[ib, ia] += 1
        self.total_calls = float(graph.total_directed_weight())
        if self.total_calls == 0:
            raise ValueError("empty call set: no calls between distinct classes")

    def icp_sm(self, genome: tuple[int, ...]) -> tuple[float, float]:
        labels = np.asarray(genome)
        used, compact = np.unique(labels, return_inverse=True)
        k = len(used)
        onehot = np.zeros((len(genome), k))
        onehot[np.arange(len(genome)), compact] = 1.0
        cluster_dw = onehot.T @ self.directed @ onehot
        crossing = cluster_dw.sum() - np.trace(cluster_dw)
        icp_val = crossing / self.total_calls
        sizes = onehot.T @ self.sizes
        cluster_pairs = onehot.T @ self.pairs @ onehot
        mu = onehot.T @ self.pairs_in + np.diag(cluster_pairs) / 2.0
        cohesion = float(
            sum(mu[i] / sizes[i] ** 2 for i in range(k) if sizes[i] > 1)
        ) / k
        if k == 1:
            return icp_val, cohesion
        coupling = 0.0
        for i in range(k):
            for j in range(i + 1, k):
                coupling += cluster_pairs[i, j] / (2.0 * sizes[i] * sizes[j])
        coupling /= k * (k - 1) / 2.0
        return icp_val, cohesion - coupling


def fosci_search(
    ds: TraceDataset,
    n_clusters: int,
    nsga_iterations: int,
    population_size: int,
    parent_size: int,
    stop_threshold: float,
    seed: int = 0,
) -> FosciResult:
    """Full FoSCI pipeline; keeps the final front for inspection."""
    if n_clusters < 2:
        raise ValueError("n_clusters must be >= 2")
    if nsga_iterations < 1:
        raise ValueError("nsga_iterations must be >= 1")
    if population_size < 5:
        raise ValueError("population_size must be >= 5")
    if parent_size < 5:
        raise ValueError("parent_size must be >= 5")
    if parent_size > population_size:
        raise ValueError("parent_size must not exceed population_size")
    reduced = reduce_traces(ds)
    atoms = functional_atoms(reduced, stop_threshold)
    if len(atoms) < n_clusters:
        raise ValueError(
            f"threshold too coarse: {len(atoms)} atoms < {n_clusters} clusters"
        )
    objective = _AtomObjectives(ds, atoms)
    n_atoms = len(atoms)
    rng = random.Random(seed)
    memo: dict[tuple[int, ...], tuple[float, float]] = {}

    def score(genome: tuple[int, ...]) -> tuple[float, float]:
        # Internally both objectives are minimized: (icp, -sm).
        if genome not in memo:
            icp_val, sm_val = objective.icp_sm(genome)
            memo[genome] = (icp_val, -sm_val)
        return memo[genome]

    population = [
        tuple(rng.randrange(n_clusters) for _ in range(n_atoms))
        for _ in range(population_size)
    ]
    for _ in range(nsga_iterations):
        objs = [score(g) for g in population]
        fronts = _non_dominated_fronts(objs)
        rank = {i: r for r, front in enumerate(fronts) for i in front}
        crowd: dict[int, float] = {}
        for front in fronts:
            crowd.update(_crowding(front, objs))

        def tournament() -> int:
            i = rng.randrange(len(population))
            j = rng.randrange(len(population))
            if rank[i] != rank[j]:
                return i if rank[i] < rank[j] else j
            if crowd[i] != crowd[j]:
                return i if crowd[i] > crowd[j] else j
            return i

        pool = [population[tournament()] for _ in range(parent_size)]
        offspring: list[tuple[int, ...]] = []
        for _ in range(population_size):
            p1 = pool[rng.randrange(len(pool))]
            p2 = pool[rng.randrange(len(pool))]
            child = [
                p1[g] if rng.random() < 0.5 else p2[g] for g in range(n_atoms)
            ]
            for g in range(n_atoms):
                if rng.random() < 1.0 / n_atoms:
                    child[g] = rng.randrange(n_clusters)
            offspring.append(tuple(child))
        combined = population + offspring
        objs = [score(g) for g in combined]
        fronts = _non_dominated_fronts(objs)
        survivors: list[int] = []
        for front in fronts:
            if len(survivors) + len(front) <= population_size:
                survivors.extend(front)
                continue
            crowd = _crowding(front, objs)
            ordered = sorted(front, key=lambda i: (-crowd[i], i))
            survivors.extend(ordered[: population_size - len(survivors)])
            break
        population = [combined[i] for i in survivors]

    objs = [score(g) for g in population]
    front = _non_dominated_fronts(objs)[0]
    front_genomes = [population[i] for i in front]
    front_internal = [objs[i] for i in front]
    # Knee point: min distance to the ideal corner after min-max scaling.
    lo = [min(o[d] for o in front_internal) for d in range(2)]
    hi = [max(o[d] for o in front_internal) for d in range(2)]
    best_idx = 0
    best_dist = math.inf
    for i, obj in enumerate(front_internal):
        scaled = [
            (obj[d] - lo[d]) / (hi[d] - lo[d]) if hi[d] > lo[d] else 0.0
            for d in range(2)
        ]
        dist = math.hypot(*scaled)
        if dist < best_dist:
            best_dist = dist
            best_idx = i
    knee = front_genomes[best_idx]
    clusters: dict[int, list[str]] = {}
    for atom_idx, cluster in enumerate(knee):
        clusters.setdefault(cluster, []).extend(atoms[atom_idx])
    partition = Partition.from_clusters(clusters.values())
    return FosciResult(
        partition=partition,
        atoms=atoms,
        front_genomes=front_genomes,
        front_objectives=[(o[0], -o[1]) for o in front_internal],
        knee_index=best_idx,
    )


def partition_fosci(
    ds: TraceDataset,
    n_clusters: int,
    nsga_iterations: int,
    population_size: int,
    parent_size: int,
    stop_threshold: float,
    seed: int = 0,
) -> Partition:
    return fosci_search(
        ds,
        n_clusters,
        nsga_iterations,
        population_size,
        parent_size,
        stop_threshold,
        seed,
    ).partition


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def run_partitioner(ds: TraceDataset, cfg: PartitionerConfig) -> Partition:
    """Validate the config and dispatch to the matching algorithm."""
    try:
        algorithm = Algorithm(cfg.algorithm)
    except ValueError:
        raise ValueError(f"unknown algorithm: {cfg.algorithm!r}") from None
    for name in REQUIRED_PARAMS[algorithm]:
        if name not in cfg.params:
            raise ValueError(
                f"missing required parameter {name!r} for algorithm {algorithm.value!r}"
            )
    params = dict(cfg.params)
    if algorithm is Algorithm.MONO2MICRO:
        return partition_mono2micro(ds, int(params["n_clusters"]), cfg.seed)
    if algorithm is Algorithm.MEM:
        return partition_mem(
            ds,
            int(params["n_partitions"]),
            int(params["max_partition_size"]),
            cfg.seed,
        )
    if algorithm is Algorithm.BUNCH:
        return partition_bunch(
            ds,
            int(params["n_partitions"]),
            int(params["init_population"]),
            float(params["neighbor_fraction"]),
            cfg.seed,
            int(params.get("budget", DEFAULT_BUNCH_BUDGET)),
        )
    if algorithm is Algorithm.FOSCI:
        return partition_fosci(
            ds,
            int(params["n_clusters"]),
            int(params["nsga_iterations"]),
            int(params["population_size"]),
            int(params["parent_size"]),
            float(params["stop_threshold"]),
            cfg.seed,
        )
    raise ValueError(f"unknown algorithm: {cfg.algorithm!r}")

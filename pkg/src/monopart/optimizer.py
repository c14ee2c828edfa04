"""Hyperparameter search: declarative spaces, random search, and TPE.

Both tuners minimize a scalar loss and evaluate the pinned default
configuration first, so the best trial can never be worse than the
untuned configuration. TPE (tree of Parzen estimators) splits past
trials into a best and a rest set at a loss quantile, fits per-dimension
kernel density estimators over each, and proposes the candidate with the
highest density ratio.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

from . import metrics
from .corpus import TraceDataset
from .metrics import LossSpec, MetricVector
from .partitioners import Algorithm, PartitionerConfig, run_partitioner

Params = dict[str, float]
Objective = Callable[[Params, int], tuple[float, "MetricVector | None"]]

DEFAULT_BUDGET = 100
DEFAULT_GAMMA = 0.25
DEFAULT_N_CANDIDATES = 24
DEFAULT_N_STARTUP = 20

_SQRT2 = math.sqrt(2.0)


class DimKind(str, Enum):
    INTEGER = "integer-range"
    REAL = "real-range"
    LOG_REAL = "log-real-range"


@dataclass(frozen=True)
class Dimension:
    """One named axis of a search space with inclusive bounds."""

    name: str
    kind: DimKind
    low: float
    high: float

    def __post_init__(self) -> None:
        if not self.low < self.high:
            raise ValueError(f"dimension {self.name!r}: low must be < high")
        if self.kind is DimKind.INTEGER:
            if self.low != int(self.low) or self.high != int(self.high):
                raise ValueError(f"dimension {self.name!r}: integer bounds required")
        if self.kind is DimKind.LOG_REAL and self.low <= 0:
            raise ValueError(f"dimension {self.name!r}: log range needs low > 0")

    def contains(self, value: float) -> bool:
        if self.kind is DimKind.INTEGER and value != int(value):
            return False
        return self.low <= value <= self.high

    def sample(self, rng: random.Random) -> float:
        if self.kind is DimKind.INTEGER:
            return rng.randint(int(self.low), int(self.high))
        if self.kind is DimKind.LOG_REAL:
            return math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        return rng.uniform(self.low, self.high)


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dimension, ...]

    def __post_init__(self) -> None:
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("duplicate dimension names")
        if not self.dims:
            raise ValueError("search space needs at least one dimension")

    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    def contains(self, params: Mapping[str, float]) -> bool:
        return all(d.name in params and d.contains(params[d.name]) for d in self.dims)


def sample_params(space: SearchSpace, rng: random.Random) -> Params:
    """Draw each dimension independently from `rng` (uniform per kind)."""
    return {d.name: d.sample(rng) for d in space.dims}


def sample_random(space: SearchSpace, rng_seed: int) -> Params:
    """One-shot uniform sample of the whole space from a fresh seed."""
    return sample_params(space, random.Random(rng_seed))


def search_space_for(algorithm: Algorithm, ds: TraceDataset) -> SearchSpace:
    """Bounded tuning ranges per algorithm.

    Open-ended count ranges are clipped to [2, min(20, n_classes)]; the
    clustering stop threshold lives in (0, 1] because Jaccard distances
    are bounded by 1.
    """
    n = len(ds.classes)
    count_high = min(20, n)
    if count_high < 3:
        raise ValueError("dataset too small to tune: needs >= 3 classes")
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.MONO2MICRO:
        dims = (Dimension("n_clusters", DimKind.INTEGER, 2, count_high),)
    elif algorithm is Algorithm.MEM:
        dims = (
            Dimension("n_partitions", DimKind.INTEGER, 2, count_high),
            Dimension("max_partition_size", DimKind.INTEGER, 2, n),
        )
    elif algorithm is Algorithm.BUNCH:
        dims = (
            Dimension("n_partitions", DimKind.INTEGER, 2, count_high),
            Dimension("init_population", DimKind.INTEGER, 2, 20),
            Dimension("neighbor_fraction", DimKind.REAL, 0.0, 1.0),
        )
    elif algorithm is Algorithm.FOSCI:
        dims = (
            Dimension("n_clusters", DimKind.INTEGER, 2, count_high),
            Dimension("nsga_iterations", DimKind.INTEGER, 1, 200),
            Dimension("population_size", DimKind.INTEGER, 5, 50),
            Dimension("parent_size", DimKind.INTEGER, 5, 50),
            Dimension("stop_threshold", DimKind.REAL, 0.0, 1.0),
        )
    else:
        raise ValueError(f"unknown algorithm: {algorithm!r}")
    return SearchSpace(dims=dims)


@dataclass(frozen=True)
class Trial:
    index: int
    params: Params
    loss: float
    metric_vector: MetricVector | None
    seed: int
    elapsed: float
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class TuneResult:
    best: Trial
    history: tuple[Trial, ...]
    budget: int


def make_objective(
    ds: TraceDataset,
    algorithm: Algorithm,
    spec: LossSpec | None = None,
) -> Objective:
    """Objective closure: params + trial seed -> (loss, metric vector).

    FoSCI's parent_size is clamped to population_size here so independently
    sampled values always form a runnable configuration.
    """
    spec = spec or LossSpec()
    algorithm = Algorithm(algorithm)

    def objective(params: Params, seed: int) -> tuple[float, MetricVector]:
        runnable = dict(params)
        if algorithm is Algorithm.FOSCI and "parent_size" in runnable:
            runnable["parent_size"] = min(
                runnable["parent_size"], runnable.get("population_size", math.inf)
            )
        cfg = PartitionerConfig(algorithm=algorithm, params=runnable, seed=seed)
        partition = run_partitioner(ds, cfg)
        vector = metrics.evaluate(ds, partition)
        return metrics.loss(vector, spec), vector

    return objective


def _run_trial(
    objective: Objective,
    index: int,
    params: Params,
    seed: int,
    trial_timeout: float | None,
) -> Trial:
    start = time.perf_counter()
    try:
        loss_value, vector = objective(params, seed)
    except Exception as exc:  # failed trials are penalized, not fatal
        elapsed = time.perf_counter() - start
        return Trial(
            index=index,
            params=dict(params),
            loss=math.inf,
            metric_vector=None,
            seed=seed,
            elapsed=elapsed,
            failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )
    elapsed = time.perf_counter() - start
    if trial_timeout is not None and elapsed > trial_timeout:
        return Trial(
            index=index,
            params=dict(params),
            loss=math.inf,
            metric_vector=None,
            seed=seed,
            elapsed=elapsed,
            failed=True,
            error=f"timeout: {elapsed:.1f}s > {trial_timeout:.1f}s",
        )
    return Trial(
        index=index,
        params=dict(params),
        loss=float(loss_value),
        metric_vector=vector,
        seed=seed,
        elapsed=elapsed,
    )


def _finish(history: list[Trial], budget: int) -> TuneResult:
    best = min(history, key=lambda t: (t.loss, t.index))
    return TuneResult(best=best, history=tuple(history), budget=budget)


def tune_random(
    objective: Objective,
    space: SearchSpace,
    defaults: Params,
    *,
    seed: int,
    budget: int = DEFAULT_BUDGET,
    trial_timeout: float | None = None,
) -> TuneResult:
    """Evaluate defaults, then `budget` uniform samples; keep the minimum."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    rng = random.Random(seed)
    history = [_run_trial(objective, 0, dict(defaults), rng.getrandbits(32), trial_timeout)]
    for index in range(1, budget + 1):
        params = sample_params(space, rng)
        history.append(
            _run_trial(objective, index, params, rng.getrandbits(32), trial_timeout)
        )
    return _finish(history, budget)


# ---------------------------------------------------------------------------
# TPE internals
# ---------------------------------------------------------------------------

def _norm_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / _SQRT2))


def split_history(history: Sequence[Trial], gamma: float) -> tuple[list[Trial], list[Trial]]:
    """Best/rest split at the gamma quantile of losses (ties by index)."""
    n_best = max(1, math.ceil(gamma * len(history)))
    ranked = sorted(history, key=lambda t: (t.loss, t.index))
    return list(ranked[:n_best]), list(ranked[n_best:])


class _Parzen1D:
    """Kernel density over one dimension: truncated Gaussians at each
    observation plus one uniform component, all equally weighted.

    Bandwidths follow the max-neighbor-gap rule: each kernel's sigma is the
    larger gap to its sorted neighbors (bounds act as outermost neighbors).
    Sigmas are clipped to [range / min(100, m + 1), range] for m kernels, so
    a small history keeps kernels wide (exploration) and the floor tightens
    as evidence accumulates; without the floor a tight early cluster traps
    all proposals in its own neighborhood. Integer dimensions discretize
    kernel mass over unit-width bins.
    """

    def __init__(self, dim: Dimension, values: Sequence[float]):
        self.dim = dim
        if dim.kind is DimKind.LOG_REAL:
            self.lo, self.hi = math.log(dim.low), math.log(dim.high)
            points = sorted(math.log(v) for v in values)
        else:
            self.lo, self.hi = float(dim.low), float(dim.high)
            points = sorted(float(v) for v in values)
        span = self.hi - self.lo
        min_sigma = span / min(100.0, len(points) + 1.0)
        self.mus = points
        self.sigmas: list[float] = []
        for i, mu in enumerate(points):
            left = points[i - 1] if i > 0 else self.lo
            right = points[i + 1] if i + 1 < len(points) else self.hi
            gap = max(mu - left, right - mu)
            self.sigmas.append(min(max(gap, min_sigma), span))

    def _to_internal(self, value: float) -> float:
        if self.dim.kind is DimKind.LOG_REAL:
            return math.log(value)
        return float(value)

    def _from_internal(self, x: float) -> float:
        if self.dim.kind is DimKind.INTEGER:
            return int(min(max(round(x), self.dim.low), self.dim.high))
        if self.dim.kind is DimKind.LOG_REAL:
            return math.exp(min(max(x, self.lo), self.hi))
        return min(max(x, self.lo), self.hi)

    def sample(self, rng: random.Random) -> float:
        pick = rng.randrange(len(self.mus) + 1)
        if pick == len(self.mus):  # uniform prior component
            if self.dim.kind is DimKind.INTEGER:
                return rng.randint(int(self.dim.low), int(self.dim.high))
            return self._from_internal(rng.uniform(self.lo, self.hi))
        mu, sigma = self.mus[pick], self.sigmas[pick]
        draw = mu
        for _ in range(100):
            draw = rng.gauss(mu, sigma)
            if self.lo <= draw <= self.hi:
                break
        return self._from_internal(draw)

    def logpdf(self, value: float) -> float:
        x = self._to_internal(value)
        span = self.hi - self.lo
        if self.dim.kind is DimKind.INTEGER:
            uniform = 1.0 / (self.dim.high - self.dim.low + 1)
        else:
            uniform = 1.0 / span
        total = uniform
        for mu, sigma in zip(self.mus, self.sigmas):
            if self.dim.kind is DimKind.INTEGER:
                z_mass = _norm_cdf((self.hi + 0.5 - mu) / sigma) - _norm_cdf(
                    (self.lo - 0.5 - mu) / sigma
                )
                bin_mass = _norm_cdf((x + 0.5 - mu) / sigma) - _norm_cdf(
                    (x - 0.5 - mu) / sigma
                )
                if z_mass > 0:
                    total += bin_mass / z_mass
            else:
                z_mass = _norm_cdf((self.hi - mu) / sigma) - _norm_cdf(
                    (self.lo - mu) / sigma
                )
                density = math.exp(-0.5 * ((x - mu) / sigma) ** 2) / (
                    sigma * math.sqrt(2.0 * math.pi)
                )
                if z_mass > 0:
                    total += density / z_mass
        return math.log(total / (len(self.mus) + 1))


def tune_tpe(
    objective: Objective,
    space: SearchSpace,
    defaults: Params,
    *,
    seed: int,
    budget: int = DEFAULT_BUDGET,
    gamma: float = DEFAULT_GAMMA,
    n_candidates: int = DEFAULT_N_CANDIDATES,
    n_startup: int = DEFAULT_N_STARTUP,
    trial_timeout: float | None = None,
) -> TuneResult:
    """Sequential TPE: defaults first, random startup phase, then density-
    ratio proposals. The startup phase consumes randomness exactly like
    tune_random, so the first n_startup trials match it seed-for-seed."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    rng = random.Random(seed)
    history = [_run_trial(objective, 0, dict(defaults), rng.getrandbits(32), trial_timeout)]
    for index in range(1, budget + 1):
        if len(history) < n_startup:
            params = sample_params(space, rng)
        else:
            best, rest = split_history(history, gamma)
            good = {
                d.name: _Parzen1D(d, [t.params[d.name] for t in best])
                for d in space.dims
            }
            bad = {
                d.name: _Parzen1D(d, [t.params[d.name] for t in rest])
                for d in space.dims
            }
            candidates = [
                {d.name: good[d.name].sample(rng) for d in space.dims}
                for _ in range(n_candidates)
            ]
            best_score = -math.inf
            params = candidates[0]
            for cand in candidates:
                score = sum(
                    good[name].logpdf(value) - bad[name].logpdf(value)
                    for name, value in cand.items()
                )
                if score > best_score:
                    best_score = score
                    params = cand
        history.append(
            _run_trial(objective, index, params, rng.getrandbits(32), trial_timeout)
        )
    return _finish(history, budget)


# ---------------------------------------------------------------------------
# Trial history export
# ---------------------------------------------------------------------------

TRIALS_CSV_HEADER = "index,algorithm,param_json,loss,bcp,icp,sm,mq,ifn,seed,elapsed_ms"


def trials_to_csv(history: Sequence[Trial], algorithm: Algorithm | str) -> str:
    """Render a trial history as CSV (schema per TRIALS_CSV_HEADER)."""
    name = algorithm.value if isinstance(algorithm, Algorithm) else str(algorithm)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRIALS_CSV_HEADER.split(","))
    for trial in history:
        if trial.metric_vector is None:
            metric_cells = ["nan"] * 5
        else:
            metric_cells = trial.metric_vector.csv_row().split(",")
        loss_cell = f"{trial.loss:.6f}" if math.isfinite(trial.loss) else "inf"
        writer.writerow(
            [
                trial.index,
                name,
                json.dumps(trial.params, sort_keys=True),
                loss_cell,
                *metric_cells,
                trial.seed,
                round(trial.elapsed * 1000),
            ]
        )
    return buf.getvalue()

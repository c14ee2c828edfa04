"""Acceptance gate: seven end-to-end checks, one pass/fail line each.

Each test prints `criterion N (<name>): PASS|FAIL` and enforces its runtime
budget. Tests 2, 6, and 7 share one full experiment run over the shipped
fixture corpora (all four algorithms, three treatments, repeats=5,
budget=30). Golden CSVs live in tests/golden/; regenerate them by running
pytest with MONOPART_REGEN_GOLDEN=1 after an intentional behavior change.
"""

from __future__ import annotations

import csv
import math
import os
import random
import statistics
import time
from pathlib import Path

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from _oracles import ORACLES, random_corpus, random_partition
from monopart.corpus import generate_synthetic, planted_partition
from monopart.experiment import ExperimentConfig, run_experiment
from monopart.metrics import evaluate
from monopart.optimizer import (
    DimKind,
    Dimension,
    SearchSpace,
    tune_random,
    tune_tpe,
)
from monopart.partitioners import Algorithm, partition_mem, partition_mono2micro
from monopart.stats import SampleSet, scott_knott

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"
GOLDEN_NAMES = ("ranks.csv", "wins.csv", "best.csv", "samples.csv")


def stamp(criterion: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" [{detail}]" if detail else ""
    print(f"criterion {criterion} ({name}): {status}{suffix}", flush=True)
    assert ok, f"criterion {criterion} ({name}) failed {suffix}"


@pytest.fixture(scope="module")
def full_grid(tmp_path_factory):
    """One experiment over both shipped corpora and all four algorithms."""
    out = tmp_path_factory.mktemp("acceptance") / "report"
    cfg = ExperimentConfig(
        datasets=(
            str(FIXTURES / "planted_a.json"),
            str(FIXTURES / "planted_b.json"),
        ),
        algorithms=tuple(Algorithm),
        output_dir=str(out),
        repeats=5,
        budget=30,
        seed=7,
    )
    start = time.perf_counter()
    report = run_experiment(cfg)
    elapsed = time.perf_counter() - start
    return cfg, report, out, elapsed


def test_criterion_1_metric_oracle_equivalence():
    start = time.perf_counter()
    rng = random.Random(12345)
    worst = 0.0
    for _ in range(50):
        ds = random_corpus(rng)
        partition = random_partition(rng, ds)
        vector = evaluate(ds, partition)
        got = dict(zip(("bcp", "icp", "sm", "mq", "ifn"), vector.as_tuple()))
        for metric, oracle in ORACLES.items():
            gap = abs(got[metric] - oracle(ds, partition))
            worst = max(worst, gap)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    stamp(1, "metric oracle equivalence", ok,
          f"50 corpora, max |gap| {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_tuned_never_worse(full_grid):
    cfg, report, _, elapsed = full_grid
    violations = []
    checked = 0
    for (dataset, algorithm, treatment), cell in report.cells.items():
        if treatment not in ("random", "hyperopt"):
            continue
        for sample in cell.samples:
            checked += 1
            if not sample.loss <= sample.default_loss:
                violations.append((dataset, algorithm, treatment, sample.repeat))
    ok = (
        not violations
        and not report.failed_cells
        and checked == 2 * 4 * 2 * cfg.repeats
        and elapsed < 600.0
    )
    stamp(2, "tuned never worse than defaults", ok,
          f"{checked} tuned repeats, {len(violations)} violations, "
          f"grid ran in {elapsed:.0f}s")


def test_criterion_3_tpe_sanity_on_quadratic():
    start = time.perf_counter()
    space = SearchSpace((Dimension("x", DimKind.REAL, 0.0, 10.0),))

    def quadratic(params, seed):
        return (params["x"] - 3.0) ** 2, None

    random_best, tpe_best = [], []
    for seed in range(30):
        random_best.append(
            tune_random(quadratic, space, {"x": 0.0}, seed=seed,
                        budget=100).best.loss
        )
        tpe_best.append(
            tune_tpe(quadratic, space, {"x": 0.0}, seed=seed,
                     budget=100).best.loss
        )
    random_median = statistics.median(random_best)
    tpe_median = statistics.median(tpe_best)
    elapsed = time.perf_counter() - start
    ok = (
        tpe_median <= random_median
        and tpe_median < 0.25
        and random_median < 0.25
        and elapsed < 30.0
    )
    stamp(3, "guided tuner beats random on the quadratic", ok,
          f"medians: tpe {tpe_median:.2e} vs random {random_median:.2e}, "
          f"{elapsed:.1f}s")


def test_criterion_4_ranking_correctness():
    start = time.perf_counter()
    # (a) identical distributions share rank 1 in >= 95/100 repetitions
    shared = 0
    for rep in range(100):
        rng = np.random.default_rng(rep)
        a = SampleSet("a", tuple(rng.normal(0.0, 1.0, 30)))
        b = SampleSet("b", tuple(rng.normal(0.0, 1.0, 30)))
        if scott_knott([a, b], seed=rep).ranks == {"a": 1, "b": 1}:
            shared += 1

    # (b) means 0 vs 10 (sigma 0.1, n 30) always split
    splits = 0
    for rep in range(100):
        rng = np.random.default_rng(1000 + rep)
        lo = SampleSet("lo", tuple(rng.normal(0.0, 0.1, 30)))
        hi = SampleSet("hi", tuple(rng.normal(10.0, 0.1, 30)))
        if scott_knott([lo, hi], seed=rep).ranks == {"lo": 1, "hi": 2}:
            splits += 1

    # (c) direction duality and permutation invariance on 200 random inputs
    rng = random.Random(99)
    property_failures = 0
    for _ in range(200):
        samples = []
        for i in range(rng.randint(2, 5)):
            center = rng.uniform(0.0, 5.0)
            spread = rng.uniform(0.01, 1.0)
            values = tuple(
                rng.gauss(center, spread) for _ in range(rng.randint(4, 9))
            )
            samples.append(SampleSet(f"s{i}", values))
        negated = [
            SampleSet(s.label, tuple(-v for v in s.values)) for s in samples
        ]
        up = scott_knott(samples, "maximize", seed=5).ranks
        down = scott_knott(negated, "minimize", seed=5).ranks
        shuffled = samples[:]
        rng.shuffle(shuffled)
        base = scott_knott(samples, "minimize", seed=5).ranks
        perm = scott_knott(shuffled, "minimize", seed=5).ranks
        if up != down or base != perm:
            property_failures += 1

    elapsed = time.perf_counter() - start
    ok = (
        shared >= 95
        and splits == 100
        and property_failures == 0
        and elapsed < 60.0
    )
    stamp(4, "rank grouping behaves correctly", ok,
          f"identical shared {shared}/100, separated split {splits}/100, "
          f"{property_failures} property failures, {elapsed:.1f}s")


def test_criterion_5_planted_structure_recovery():
    start = time.perf_counter()
    exact = 0
    purity_ok = True
    for seed in range(20):
        n_classes = 12 + 2 * (seed % 3)
        k = 3 + (seed % 2)
        ds = generate_synthetic(seed=seed, n_classes=n_classes,
                                n_use_cases=k, modularity=1.0)
        truth = planted_partition(n_classes, k)
        order = sorted(ds.classes)
        truth_labels = [truth.assignment[c] for c in order]
        recovered = (
            partition_mono2micro(ds, k),
            partition_mem(ds, k, n_classes),
        )
        if all(
            adjusted_rand_score(
                truth_labels, [p.assignment[c] for c in order]
            ) == 1.0
            for p in recovered
        ):
            exact += 1
        vector = evaluate(ds, truth)
        purity_ok = purity_ok and vector.icp == 0.0 and vector.ifn == 0.0
    elapsed = time.perf_counter() - start
    ok = exact == 20 and purity_ok and elapsed < 30.0
    stamp(5, "planted structure recovered exactly", ok,
          f"{exact}/20 seeds ARI=1, planted ICP=IFN=0: {purity_ok}, "
          f"{elapsed:.1f}s")


def test_criterion_6_report_protocol_shape(full_grid):
    cfg, report, out, elapsed = full_grid
    if os.environ.get("MONOPART_REGEN_GOLDEN"):
        for name in GOLDEN_NAMES:
            (GOLDEN / name).write_bytes((out / name).read_bytes())

    mismatched = [
        name
        for name in GOLDEN_NAMES
        if (out / name).read_bytes() != (GOLDEN / name).read_bytes()
    ]

    # win-count table shape: every metric x three treatments, per algorithm
    shape_ok = True
    for table in report.win_tables.values():
        shape_ok = shape_ok and table.metrics == ("bcp", "icp", "sm", "mq", "ifn")
        shape_ok = shape_ok and set(table.treatments) == {
            "untuned", "random", "hyperopt"
        }
        shape_ok = shape_ok and sum(table.totals.values()) == 5
    shape_ok = shape_ok and len(report.win_tables) == 4

    # cross-algorithm table shape: all four algorithms plus a wins tally row
    best_lines = (out / "best.csv").read_text(encoding="utf-8").strip().split("\n")
    header = best_lines[0].split(",")
    shape_ok = shape_ok and header == [
        "dataset", "metric", "bunch", "fosci", "mem", "mono2micro", "best"
    ]
    shape_ok = shape_ok and best_lines[-1].startswith("wins,")

    ok = not mismatched and shape_ok and elapsed < 900.0
    stamp(6, "report matches the published protocol shape", ok,
          f"golden files {'match' if not mismatched else mismatched}, "
          f"grid ran in {elapsed:.0f}s")


def test_criterion_7_reruns_are_byte_identical(full_grid):
    cfg, _, out, _ = full_grid

    def trials_without_timings(path: Path) -> list[list[str]]:
        with open(path, newline="", encoding="utf-8") as fh:
            return [row[:-1] for row in csv.reader(fh)]

    before = {name: (out / name).read_bytes() for name in GOLDEN_NAMES}
    trial_paths = sorted(out.glob("*/*/*/trials.csv"))
    trials_before = {p: trials_without_timings(p) for p in trial_paths}

    start = time.perf_counter()
    run_experiment(cfg)
    elapsed = time.perf_counter() - start

    unstable = [
        name
        for name in GOLDEN_NAMES
        if (out / name).read_bytes() != before[name]
    ]
    trials_unstable = [
        str(p) for p in trial_paths if trials_without_timings(p) != trials_before[p]
    ]
    ok = not unstable and not trials_unstable and elapsed < 900.0
    stamp(7, "identical config reruns byte-identically", ok,
          f"{len(GOLDEN_NAMES)} report CSVs + {len(trial_paths)} trial logs "
          f"(timing column excluded), rerun {elapsed:.0f}s")

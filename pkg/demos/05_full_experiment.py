"""Run the complete benchmarking protocol on the shipped fixture corpora.

One call fans out over every (dataset, algorithm, treatment) cell, repeats
each cell with derived seeds, ranks the treatments per metric, and writes
the cross-algorithm comparison tables. This demo uses a deliberately small
grid (two algorithms, three repeats, budget 8) so it finishes in seconds;
scale `repeats` and `budget` up for real studies.

    python3 demos/05_full_experiment.py
"""

import tempfile
from pathlib import Path

from monopart import Algorithm, ExperimentConfig, run_experiment

root = Path(__file__).resolve().parent.parent
out = Path(tempfile.mkdtemp(prefix="monopart_demo_")) / "report"

cfg = ExperimentConfig(
    datasets=(
        str(root / "fixtures" / "planted_a.json"),
        str(root / "fixtures" / "planted_b.json"),
    ),
    algorithms=(Algorithm.MONO2MICRO, Algorithm.BUNCH),
    output_dir=str(out),
    repeats=3,
    budget=8,
    seed=99,
)

report = run_experiment(cfg)

print(f"cells run: {len(report.cells)}  "
      f"(2 datasets x 2 algorithms x 3 treatments)")
print(f"failed cells: {len(report.failed_cells)}")
print(f"rank tables: {len(report.ranks)}")
print()

# summary.txt is the human-readable digest; the CSVs next to it carry the
# full per-trial history, the rank detail, and the comparison tables.
print((out / "summary.txt").read_text(encoding="utf-8"))

print("files written:")
for path in sorted(out.rglob("*.csv"))[:6]:
    print(f"    {path.relative_to(out)}")
print("    ...")
print(f"full report under {out}")

"""Build a trace corpus by hand and score two candidate decompositions.

Run from the repository root:

    python3 demos/01_corpus_and_metrics.py
"""

from monopart import (
    DEFAULT_WEIGHTS,
    METRIC_NAMES,
    Partition,
    Trace,
    TraceDataset,
    evaluate,
    loss,
)

# ---------------------------------------------------------------------------
# A toy webshop monolith: six classes, three business use cases, and a few
# recorded executions per use case. Each trace is the sequence of
# (caller, callee) method-level calls observed at runtime.
# ---------------------------------------------------------------------------

store = TraceDataset(
    classes=("Auth", "Session", "Catalog", "Search", "Cart", "Billing"),
    use_cases=("login", "browse", "checkout"),
    traces=(
        Trace("login", (("Auth", "Session"), ("Session", "Auth"))),
        Trace("login", (("Auth", "Session"),)),
        Trace("browse", (("Catalog", "Search"), ("Search", "Catalog"))),
        Trace("browse", (("Search", "Catalog"), ("Catalog", "Catalog"))),
        Trace("checkout", (("Cart", "Billing"), ("Billing", "Cart"))),
        Trace("checkout", (("Cart", "Billing"), ("Cart", "Session"))),
    ),
)
store.validate()

print(f"corpus: {len(store.classes)} classes, "
      f"{len(store.use_cases)} use cases, {len(store.traces)} traces")

# ---------------------------------------------------------------------------
# Candidate A groups classes along use-case lines; candidate B splits the
# session pair across services. Lower bcp/icp/ifn is better, higher sm/mq is
# better, and `loss` folds all five into one signed sum to minimize.
# ---------------------------------------------------------------------------

by_feature = Partition.from_clusters([
    ("Auth", "Session"),
    ("Catalog", "Search"),
    ("Cart", "Billing"),
])

scrambled = Partition.from_clusters([
    ("Auth", "Search"),
    ("Session", "Catalog"),
    ("Cart", "Billing"),
])

print()
print(f"{'partition':<12}" + "".join(f"{name:>10}" for name in METRIC_NAMES)
      + f"{'loss':>10}")
for label, partition in (("by_feature", by_feature), ("scrambled", scrambled)):
    vector = evaluate(store, partition)
    row = "".join(f"{value:>10.4f}" for value in vector.as_tuple())
    print(f"{label:<12}{row}{loss(vector):>10.4f}")

print()
print(f"loss weights over {METRIC_NAMES}: {DEFAULT_WEIGHTS}")
print("the feature-aligned split wins on every axis: only the one checkout")
print("call into Session crosses a service boundary, use cases stay almost")
print("entirely inside one service, and cohesion beats coupling.")

"""Dataset loading, validation, call graphs, partitions, and synthesis."""

from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np
import pytest

from monopart.corpus import (
    Partition,
    Trace,
    TraceDataset,
    ValidationError,
    build_call_graph,
    call_graph_csv,
    canonical_json,
    cooccurrence_matrix,
    generate_synthetic,
    load_dataset,
    load_partition,
    partition_json,
    planted_partition,
    save_dataset,
    save_partition,
)
from monopart.metrics import evaluate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def tiny_dataset() -> TraceDataset:
    return TraceDataset(
        classes=("A", "B", "C", "D"),
        use_cases=("u1", "u2"),
        traces=(
            Trace(use_case="u1", calls=(("A", "B"), ("B", "A"), ("A", "A"))),
            Trace(use_case="u1", calls=(("B", "C"),)),
            Trace(use_case="u2", calls=(("C", "D"), ("D", "C"), ("C", "D"))),
        ),
    )


def test_fixtures_load_and_validate():
    for name in ("sample_store.json", "planted_a.json", "planted_b.json"):
        ds = load_dataset(FIXTURES / name)
        assert len(ds.classes) >= 2
        assert ds.traces


def test_roundtrip_is_canonical(tmp_path):
    ds = tiny_dataset()
    path = tmp_path / "tiny.json"
    save_dataset(ds, path)
    again = load_dataset(path)
    assert again == TraceDataset(
        classes=tuple(sorted(ds.classes)),
        use_cases=tuple(sorted(ds.use_cases)),
        traces=ds.traces,
    )
    # a second save must produce identical bytes
    save_dataset(again, tmp_path / "tiny2.json")
    assert (tmp_path / "tiny.json").read_bytes() == (tmp_path / "tiny2.json").read_bytes()


def test_canonical_json_sorts_lists():
    ds = TraceDataset(
        classes=("B", "A"),
        use_cases=("z", "a"),
        traces=(Trace(use_case="z", calls=(("B", "A"),)),),
    )
    doc = json.loads(canonical_json(ds))
    assert doc["classes"] == ["A", "B"]
    assert doc["use_cases"] == ["a", "z"]
    assert doc["traces"] == [{"use_case": "z", "calls": [["B", "A"]]}]


def test_validation_messages():
    with pytest.raises(ValidationError, match="at least 2 classes"):
        TraceDataset(classes=("A",), use_cases=("u",), traces=()).validate()
    with pytest.raises(ValidationError, match="duplicate class"):
        TraceDataset(
            classes=("A", "A"),
            use_cases=("u",),
            traces=(Trace("u", (("A", "A"),)),),
        ).validate()
    with pytest.raises(ValidationError, match="at least 1 trace"):
        TraceDataset(classes=("A", "B"), use_cases=("u",), traces=()).validate()
    with pytest.raises(ValidationError, match="unknown use case"):
        TraceDataset(
            classes=("A", "B"),
            use_cases=("u",),
            traces=(Trace("nope", (("A", "B"),)),),
        ).validate()
    with pytest.raises(ValidationError, match="empty call list"):
        TraceDataset(
            classes=("A", "B"), use_cases=("u",), traces=(Trace("u", ()),)
        ).validate()
    with pytest.raises(ValidationError, match="unknown class 'X'"):
        TraceDataset(
            classes=("A", "B"),
            use_cases=("u",),
            traces=(Trace("u", (("A", "X"),)),),
        ).validate()


def test_load_dataset_schema_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"classes": ["A", "B"], "use_cases": ["u"]}')
    with pytest.raises(ValidationError, match="missing top-level key 'traces'"):
        load_dataset(bad)
    bad.write_text(
        '{"classes": ["A", "B"], "use_cases": ["u"],'
        ' "traces": [{"use_case": "u", "calls": [["A"]]}]}'
    )
    with pytest.raises(ValidationError, match="caller, callee"):
        load_dataset(bad)


def test_total_calls_counts_self_separately():
    ds = tiny_dataset()
    assert ds.total_calls(include_self=True) == 7
    assert ds.total_calls() == 6


def test_call_graph_weights_and_self_call_drop():
    graph = build_call_graph(tiny_dataset())
    assert graph.dropped_self_calls == 1
    assert graph.directed_weight[("A", "B")] == 1
    assert graph.directed_weight[("B", "A")] == 1
    assert graph.directed_weight[("C", "D")] == 2
    assert graph.weight("A", "B") == 2
    assert graph.weight("B", "A") == 2
    assert graph.weight("C", "D") == 3
    assert graph.weight("A", "D") == 0
    assert graph.total_directed_weight() == 6


def test_call_graph_csv_layout():
    text = call_graph_csv(build_call_graph(tiny_dataset()))
    lines = text.splitlines()
    assert lines[0] == "caller,callee,count"
    assert lines[1:] == sorted(lines[1:])
    assert "C,D,2" in lines


def test_cooccurrence_jaccard_values():
    # A,B share trace 0; B also in trace 1 with C; C,D share trace 2.
    ds = tiny_dataset()
    sim = cooccurrence_matrix(ds)
    idx = {c: i for i, c in enumerate(ds.classes)}
    assert sim[idx["A"], idx["B"]] == pytest.approx(1 / 2)  # {0} vs {0,1}
    assert sim[idx["B"], idx["C"]] == pytest.approx(1 / 3)  # {0,1} vs {1,2}
    assert sim[idx["A"], idx["C"]] == 0.0
    assert sim[idx["C"], idx["D"]] == pytest.approx(1 / 2)  # {1,2} vs {2}
    assert np.allclose(sim, sim.T)
    assert np.all(np.diag(sim) == 1.0)


def test_cooccurrence_diagonal_zero_for_unreferenced():
    ds = TraceDataset(
        classes=("A", "B", "Ghost"),
        use_cases=("u",),
        traces=(Trace("u", (("A", "B"),)),),
    )
    sim = cooccurrence_matrix(ds)
    assert sim[2, 2] == 0.0


def test_partition_canonical_form():
    p = Partition.from_assignment({"D": 9, "B": 9, "A": 4, "C": 7})
    # clusters ordered by smallest member: {A}, {B,D}, {C}
    assert p.clusters() == [["A"], ["B", "D"], ["C"]]
    assert p.k == 3
    assert p.assignment == {"A": 0, "B": 1, "C": 2, "D": 1}
    # same content via from_clusters, different order, same canonical result
    q = Partition.from_clusters([["D", "B"], ["C"], ["A"]])
    assert q == p


def test_partition_rejects_duplicates_and_empty():
    with pytest.raises(ValidationError, match="assigned twice"):
        Partition.from_clusters([["A", "B"], ["B"]])
    with pytest.raises(ValidationError, match="empty cluster"):
        Partition.from_clusters([["A"], []])
    with pytest.raises(ValidationError, match="empty"):
        Partition.from_assignment({})


def test_partition_validate_against():
    ds = tiny_dataset()
    good = Partition.from_clusters([["A", "B"], ["C", "D"]])
    good.validate_against(ds)
    with pytest.raises(ValidationError, match="missing"):
        Partition.from_clusters([["A", "B"], ["C"]]).validate_against(ds)
    with pytest.raises(ValidationError, match="extra"):
        Partition.from_clusters([["A", "B"], ["C", "D", "E"]]).validate_against(ds)


def test_partition_json_roundtrip(tmp_path):
    p = Partition.from_clusters([["B", "A"], ["C"]])
    path = tmp_path / "p.json"
    save_partition(p, path)
    doc = json.loads(path.read_text())
    assert doc == {"clusters": [["A", "B"], ["C"]]}
    assert load_partition(path) == p
    assert partition_json(p).endswith("\n")


def test_synthetic_determinism_and_shape():
    a = generate_synthetic(seed=5, n_classes=10, n_use_cases=3, modularity=0.6)
    b = generate_synthetic(seed=5, n_classes=10, n_use_cases=3, modularity=0.6)
    assert canonical_json(a) == canonical_json(b)
    c = generate_synthetic(seed=6, n_classes=10, n_use_cases=3, modularity=0.6)
    assert canonical_json(a) != canonical_json(c)
    assert a.classes == tuple(f"C{i:03d}" for i in range(10))
    assert a.use_cases == ("uc00", "uc01", "uc02")
    # 1 tour + 3 extra traces per use case
    assert len(a.traces) == 12
    a.validate()


def test_synthetic_planted_structure_is_clean():
    for seed in range(5):
        ds = generate_synthetic(seed=seed, n_classes=9, n_use_cases=3, modularity=1.0)
        planted = planted_partition(9, 3)
        v = evaluate(ds, planted)
        assert v.icp == 0.0
        assert v.ifn == 0.0
        # every group internally connected in trace participation
        sim = cooccurrence_matrix(ds)
        for cluster in planted.clusters():
            ids = [ds.classes.index(c) for c in cluster]
            for i in ids:
                assert any(sim[i, j] > 0 for j in ids if j != i)


def test_synthetic_modularity_zero_mixes_groups():
    ds = generate_synthetic(seed=1, n_classes=12, n_use_cases=3, modularity=0.0)
    planted = planted_partition(12, 3)
    assert evaluate(ds, planted).icp > 0.2


def test_planted_partition_blocks():
    p = planted_partition(10, 3)
    sizes = sorted(len(c) for c in p.clusters())
    assert sum(sizes) == 10
    assert p.k == 3
    assert sizes == [3, 3, 4]
    # contiguous blocks over sorted class names
    for cluster in p.clusters():
        ids = sorted(int(c[1:]) for c in cluster)
        assert ids == list(range(ids[0], ids[-1] + 1))


def test_synthetic_argument_validation():
    with pytest.raises(ValueError, match="n_classes"):
        generate_synthetic(seed=0, n_classes=1, n_use_cases=1, modularity=0.5)
    with pytest.raises(ValueError, match="n_use_cases"):
        generate_synthetic(seed=0, n_classes=4, n_use_cases=0, modularity=0.5)
    with pytest.raises(ValueError, match="modularity"):
        generate_synthetic(seed=0, n_classes=4, n_use_cases=2, modularity=1.5)


def test_more_use_cases_than_classes():
    ds = generate_synthetic(seed=0, n_classes=3, n_use_cases=5, modularity=1.0)
    ds.validate()
    assert planted_partition(3, 5).k == 3


def test_partition_order_insensitive_to_input_dict_order():
    rng = random.Random(0)
    for _ in range(20):
        items = [("A", 2), ("B", 0), ("C", 2), ("D", 1)]
        rng.shuffle(items)
        p = Partition.from_assignment(dict(items))
        assert p.clusters() == [["A", "C"], ["B"], ["D"]]

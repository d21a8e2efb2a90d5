"""Classification tree: splits, schedule, certification, determinism."""

import json

import pytest

from hbk import maps
from hbk.catalog import prime_knot
from hbk.classify import (ClassTree, ClassifyError, Evaluator, certify_all,
                          certify_leaf, run_schedule)
from hbk.diagrams import Diagram, assign_crossings


def small_world():
    tref = prime_knot("3_1")
    fig8 = prime_knot("4_1")
    return {tref.diagram_id(): tref, fig8.diagram_id(): fig8}


def test_split_by_ks_s3():
    # trefoil-complement vs figure-8: ks over S3 differ (4 vs 3, by the
    # brute-force orbit count exercised in the invariants tests)
    world = small_world()
    ev = Evaluator(world)
    tree = ClassTree(sorted(world))
    values = {i: ev.value(i, "ks:S3") for i in world}
    assert len(set(map(str, values.values()))) == 2
    children = tree.split(0, "ks:S3", values)
    assert len(children) == 2
    tree.check_partition()
    assert all(tree.nodes[c].status == "final" for c in children)


def test_split_no_progress_flagged():
    d1 = prime_knot("3_1")
    d2 = prime_knot("3_1").mirror()
    world = {d1.diagram_id(): d1, d2.diagram_id(): d2}
    ev = Evaluator(world)
    tree = ClassTree(sorted(world))
    values = {i: ev.value(i, "ks:S3") for i in world}
    assert tree.split(0, "ks:S3", values) == []
    assert any("no-progress" in a for a in tree.nodes[0].annotations)


def test_split_missing_values_error():
    world = small_world()
    tree = ClassTree(sorted(world))
    with pytest.raises(ClassifyError, match="missing invariant values"):
        tree.split(0, "ks:S3", {})


def test_empty_input_tree():
    tree = ClassTree([])
    assert tree.nodes[0].status == "final"
    assert tree.leaves()[0].diagram_ids == []


def test_run_schedule_and_json_determinism():
    world = small_world()
    outputs = []
    for _ in range(2):
        ev = Evaluator(world)
        tree = ClassTree(sorted(world))
        run_schedule(tree, ["ks:S3", "ks:A4"], ev)
        certify_all(tree, ev, depth=4, max_crossings=6, mode="hk",
                    max_nodes=2000)
        outputs.append(tree.to_json())
    assert outputs[0] == outputs[1]
    round_trip = ClassTree.from_json(outputs[0])
    assert round_trip.to_json() == outputs[0]


def test_leaf_count_monotone():
    world = small_world()
    ev = Evaluator(world)
    tree = ClassTree(sorted(world))
    counts = [len(tree.leaves())]
    for desc in ("ks:S3", "ks:A4"):
        for leaf in list(tree.open_leaves()):
            values = {i: ev.value(i, desc) for i in leaf.diagram_ids}
            tree.split(leaf.node_id, desc, values)
        counts.append(len(tree.leaves()))
    assert counts == sorted(counts)


def test_certify_merges_ih_pair():
    theta = next(assign_crossings(maps.theta_map()))
    hand = Diagram.from_map(maps.handcuff_map(), [])
    world = {theta.diagram_id(): theta, hand.diagram_id(): hand}
    ev = Evaluator(world)
    tree = ClassTree(sorted(world))
    run_schedule(tree, ["ks:S3"], ev)
    leaf = tree.open_leaves()[0]
    certify_leaf(tree, leaf.node_id, ev, depth=3, max_crossings=2, mode="hk")
    assert tree.nodes[leaf.node_id].status == "final"
    assert len(tree.nodes[leaf.node_id].clusters) == 1


def test_certify_honest_on_graph_mode():
    # in graph mode theta and handcuff stay unmerged: hard leaf
    theta = next(assign_crossings(maps.theta_map()))
    hand = Diagram.from_map(maps.handcuff_map(), [])
    world = {theta.diagram_id(): theta, hand.diagram_id(): hand}
    ev = Evaluator(world)
    tree = ClassTree(sorted(world))
    run_schedule(tree, ["ks:S3"], ev)
    leaf = tree.open_leaves()[0]
    certify_leaf(tree, leaf.node_id, ev, depth=3, max_crossings=3,
                 mode="graph", max_nodes=3000)
    assert tree.nodes[leaf.node_id].status == "hard"
    assert len(tree.nodes[leaf.node_id].clusters) == 2


def test_singleton_final_immediately():
    d = prime_knot("3_1")
    world = {d.diagram_id(): d}
    ev = Evaluator(world)
    tree = ClassTree(sorted(world))
    run_schedule(tree, ["ks:S3"], ev)
    # root stays a single open leaf (no progress possible on one diagram)
    certify_all(tree, ev, depth=2, max_crossings=4)
    assert all(l.status in ("final",) for l in tree.leaves())


def test_graph_only_invariants_guarded():
    world = small_world()
    ev = Evaluator(world)
    assert ev.value(sorted(world)[0], "spine") == "l0b0c1"
    with pytest.raises(ClassifyError):
        ev.value(sorted(world)[0], "nonsense:S3")

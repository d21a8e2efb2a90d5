"""The dynamic classification tree: split diagram sets by successively
stronger invariants, then certify leaves by bounded move search.

Nodes hold diagram id sets; children partition their parent by invariant
value.  A leaf is closed as soon as it is a singleton; leaves that no
scheduled invariant splits stay open and are handed to the certifier, which
merges diagrams connected by verified move traces.  Leaves whose diagrams
remain in several unmerged clusters carry the "hard" status: same values of
every computed invariant, equivalence unproven.

Everything is deterministic for a fixed schedule and budgets: diagrams are
keyed by canonical-code ids, children by the JSON form of the invariant
value, and tree files serialize with sorted keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from . import invariants as inv
from . import rewrite
from .diagrams import Diagram
from .groups import GroupError, group_from_name
from .presentation import (Presentation, PeripheralSystem, rank_upper_bound,
                           tietze_simplify, wirtinger)


class ClassifyError(RuntimeError):
    pass


# ============================================================
# Invariant evaluation with per-diagram caching
# ============================================================


class Evaluator:
    """Computes invariant values for diagrams, caching presentations.

    Descriptors: ``ks:<group>``, ``gimage:<group>``, ``spine`` (abstract
    spine-graph signature, a spatial-graph invariant used in graph mode).
    Values are JSON-encodable and mirror-stable.
    """

    def __init__(self, diagrams: Dict[str, Diagram],
                 order_budget: int = 200_000):
        self.diagrams = diagrams
        self.order_budget = order_budget
        self._simplified: Dict[str, Tuple[Presentation, PeripheralSystem]] = {}
        self._values: Dict[Tuple[str, str], object] = {}

    def presentation(self, diagram_id: str) -> Tuple[Presentation, PeripheralSystem]:
        if diagram_id not in self._simplified:
            d = self.diagrams[diagram_id]
            pres, peri = wirtinger(d)
            res = tietze_simplify(pres, peri.meridians + peri.longitudes)
            n_mer = len(peri.meridians)
            peri2 = PeripheralSystem(res.words[:n_mer], res.words[n_mer:])
            self._simplified[diagram_id] = (res.presentation, peri2)
        return self._simplified[diagram_id]

    def rank_bound(self, diagram_id: str) -> int:
        return self.presentation(diagram_id)[0].n_gens

    def value(self, diagram_id: str, descriptor: str) -> object:
        key = (diagram_id, descriptor)
        if key in self._values:
            return self._values[key]
        if descriptor == "spine":
            out = self._spine_signature(diagram_id)
        elif descriptor.startswith("ks:"):
            group = group_from_name(descriptor[3:], self.order_budget)
            pres, _ = self.presentation(diagram_id)
            out = inv.ks_cached(pres, group)
        elif descriptor.startswith("gimage:"):
            group = group_from_name(descriptor[7:], self.order_budget)
            pres, peri = self.presentation(diagram_id)
            out = list(inv.g_image(pres, peri, group))
        elif descriptor.startswith("constituent:"):
            out = self._constituents(diagram_id, descriptor[len("constituent:"):])
        else:
            raise ClassifyError(f"unknown invariant descriptor {descriptor!r}")
        self._values[key] = out
        return out

    def _constituents(self, diagram_id: str, group_name: str) -> List[List[int]]:
        """Sorted (component count, ks) pairs of the spine-edge deletions.

        A spatial-graph invariant (deletion commutes with graph moves);
        not used in handlebody-knot mode, where the spine may change.
        """
        from .diagrams import DiagramError, delete_spine_edge, spine_edges
        from .presentation import tietze_simplify as simp
        from .presentation import wirtinger_link

        d = self.diagrams[diagram_id]
        group = group_from_name(group_name, self.order_budget)
        out: List[List[int]] = []
        for e in spine_edges(d):
            if e.closed:
                continue
            try:
                sub = delete_spine_edge(d, e.index)
            except DiagramError:
                continue  # loop edges are skipped
            pres, _ = wirtinger_link(sub)
            pres = simp(pres).presentation
            out.append([sub.component_count(), inv.ks_cached(pres, group)])
        return sorted(out)

    def _spine_signature(self, diagram_id: str) -> str:
        """Loop count of the abstract spine graph (theta vs handcuff etc.)."""
        from .diagrams import spine_edges

        d = self.diagrams[diagram_id]
        if d.map.n_darts == 0:
            return "circle"
        vert_of: Dict[int, int] = {}
        for vid, cyc in enumerate(d.map.vertices()):
            if len(cyc) == 3:
                for dart in cyc:
                    vert_of[dart] = vid
        loops = 0
        bars = 0
        closed = 0
        for e in spine_edges(d):
            if e.closed:
                closed += 1
            elif vert_of[e.start] == vert_of[e.end]:
                loops += 1
            else:
                bars += 1
        return f"l{loops}b{bars}c{closed}"


# ============================================================
# Tree structure
# ============================================================


@dataclass
class ClassNode:
    node_id: int
    diagram_ids: List[str]
    split_by: Optional[str] = None
    children: Dict[str, int] = field(default_factory=dict)
    status: str = "open"            # open | final | hard
    annotations: List[str] = field(default_factory=list)
    clusters: List[List[str]] = field(default_factory=list)

    def is_leaf(self) -> bool:
        return not self.children


class ClassTree:
    def __init__(self, diagram_ids: Sequence[str]):
        ids = sorted(diagram_ids)
        self.nodes: Dict[int, ClassNode] = {0: ClassNode(0, ids)}
        self._next = 1
        if not ids:
            self.nodes[0].status = "final"

    def leaves(self) -> List[ClassNode]:
        return [n for n in self.nodes.values() if n.is_leaf()]

    def open_leaves(self) -> List[ClassNode]:
        return [n for n in self.leaves() if n.status == "open"]

    def check_partition(self) -> None:
        for node in self.nodes.values():
            if node.children:
                combined = sorted(
                    i for c in node.children.values()
                    for i in self.nodes[c].diagram_ids)
                if combined != sorted(node.diagram_ids):
                    raise ClassifyError(
                        f"children of node {node.node_id} do not partition it")
        root_ids = sorted(self.nodes[0].diagram_ids)
        leaf_ids = sorted(i for n in self.leaves() for i in n.diagram_ids)
        if root_ids != leaf_ids:
            raise ClassifyError("leaves do not partition the root set")

    def split(self, node_id: int, descriptor: str,
              values: Dict[str, object]) -> List[int]:
        """Split an open leaf by invariant values; returns new child ids.

        Certified clusters (move-equivalent diagrams) travel together: their
        representative's value stands for every member.
        """
        node = self.nodes[node_id]
        if not node.is_leaf() or node.status != "open":
            raise ClassifyError(f"node {node_id} is not an open leaf")
        cluster_of: Dict[str, List[str]] = {}
        for cluster in node.clusters or [[i] for i in node.diagram_ids]:
            for i in cluster:
                cluster_of[i] = cluster
        missing = [i for i in node.diagram_ids
                   if min(cluster_of[i]) not in values]
        if missing:
            raise ClassifyError(
                f"missing invariant values for: {', '.join(missing)}")
        groups: Dict[str, List[str]] = {}
        group_clusters: Dict[str, List[List[str]]] = {}
        for cluster in node.clusters or [[i] for i in node.diagram_ids]:
            key = json.dumps(values[min(cluster)], sort_keys=True)
            groups.setdefault(key, []).extend(cluster)
            group_clusters.setdefault(key, []).append(sorted(cluster))
        if len(groups) == 1:
            node.annotations.append(f"no-progress: {descriptor}")
            return []
        node.split_by = descriptor
        out = []
        for key in sorted(groups):
            child = ClassNode(self._next, sorted(groups[key]))
            child.clusters = sorted(group_clusters[key])
            if len(child.clusters) == 1:
                child.status = "final"
            self.nodes[self._next] = child
            node.children[key] = self._next
            out.append(self._next)
            self._next += 1
        self.check_partition()
        return out

    # ---------------- persistence ----------------

    def to_json(self) -> str:
        payload = {
            "nodes": {
                str(n.node_id): {
                    "diagram_ids": n.diagram_ids,
                    "split_by": n.split_by,
                    "children": n.children,
                    "status": n.status,
                    "annotations": n.annotations,
                    "clusters": n.clusters,
                } for n in self.nodes.values()
            }
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "ClassTree":
        payload = json.loads(text)
        tree = ClassTree([])
        tree.nodes = {}
        for key, rec in payload["nodes"].items():
            node = ClassNode(int(key), list(rec["diagram_ids"]),
                             rec["split_by"], dict(rec["children"]),
                             rec["status"], list(rec["annotations"]),
                             [list(c) for c in rec["clusters"]])
            tree.nodes[int(key)] = node
        tree._next = 1 + max(tree.nodes) if tree.nodes else 1
        return tree


# ============================================================
# Schedule runner and leaf certification
# ============================================================


def run_schedule(tree: ClassTree, schedule: Sequence[str],
                 evaluator: Evaluator) -> ClassTree:
    """Apply each invariant to every open leaf, skipping no-progress splits.

    Budget failures (group too large) tag the leaf and move on; afterwards
    every leaf is final (singleton) or still open for certification.
    """
    if not schedule:
        raise ClassifyError("empty schedule")
    for descriptor in schedule:
        for leaf in list(tree.open_leaves()):
            clusters = leaf.clusters or [[i] for i in leaf.diagram_ids]
            values: Dict[str, object] = {}
            try:
                for cluster in clusters:
                    values[min(cluster)] = evaluator.value(min(cluster),
                                                           descriptor)
            except GroupError as exc:
                leaf.annotations.append(f"budget: {descriptor}: {exc}")
                continue
            tree.split(leaf.node_id, descriptor, values)
    return tree


def certify_leaf(tree: ClassTree, node_id: int, evaluator: Evaluator,
                 depth: int, max_crossings: int, mode: str = "hk",
                 max_nodes: int = 20000) -> None:
    """Merge a leaf's diagrams by verified move traces (mirror allowed).

    Leaves that collapse to one cluster become final; others are tagged
    hard ("same invariants, equivalence unproven").
    """
    leaf = tree.nodes[node_id]
    if not leaf.is_leaf():
        raise ClassifyError(f"node {node_id} is not a leaf")
    if leaf.status == "final" and len(leaf.clusters) == 1:
        return
    start = leaf.clusters or [[i] for i in sorted(leaf.diagram_ids)]
    parent = {min(c): min(c) for c in start}
    members = {min(c): sorted(c) for c in start}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    budget_hits = 0
    reps = sorted(parent)
    for a_idx in range(len(reps)):
        for b_idx in range(a_idx + 1, len(reps)):
            a, b = reps[a_idx], reps[b_idx]
            if find(a) == find(b):
                continue
            da, db = evaluator.diagrams[a], evaluator.diagrams[b]
            try:
                trace = rewrite.search_equivalence(
                    da, db, depth=depth, max_crossings=max_crossings,
                    mode=mode, allow_mirror=True, max_nodes=max_nodes)
            except rewrite.SearchBudget:
                budget_hits += 1
                trace = None
            if trace is not None:
                parent[find(a)] = find(b)
    clusters: Dict[str, List[str]] = {}
    for rep in reps:
        clusters.setdefault(find(rep), []).extend(members[rep])
    leaf.clusters = sorted(sorted(c) for c in clusters.values())
    if budget_hits:
        leaf.annotations.append(f"certify budget exhausted on {budget_hits} pairs")
    if len(leaf.clusters) == 1:
        leaf.status = "final"
    else:
        leaf.status = "hard"
        leaf.annotations.append(
            f"{len(leaf.clusters)} clusters with equal invariants, "
            "equivalence unproven")


def certify_all(tree: ClassTree, evaluator: Evaluator, depth: int,
                max_crossings: int, mode: str = "hk",
                max_nodes: int = 20000,
                statuses: Tuple[str, ...] = ("open", "hard")) -> None:
    for leaf in tree.leaves():
        if leaf.status in statuses or not leaf.clusters:
            certify_leaf(tree, leaf.node_id, evaluator, depth,
                         max_crossings, mode, max_nodes)

"""Knot and spatial-graph diagrams: maps with over/under data at crossings.

A :class:`Diagram` is a combinatorial map whose 4-valent vertices are
crossings.  The crossing data is the set ``under`` of darts lying on
understrands: each 4-valent rotation (d1, d2, d3, d4) contributes exactly
one opposite pair, either {d1, d3} or {d2, d4}.  Trivalent vertices are the
spine vertices of the (genus-two) spatial graph.

Strand tracing: a strand entering a crossing at dart d leaves at sigma^2(d);
trivalent vertices join all three incident edges.  ``circles`` counts
crossingless unknotted circles drawn beside the map (the crossingless unknot
itself is ``Diagram.unknot()``); they arise when a move removes the last
crossing of a closed component.

The text format (".hbk") is:

    hbk 1
    V <d1> <d2> <d3>          trivalent vertex, darts counterclockwise
    X <d1> <d2> <d3> <d4>     crossing, counterclockwise, (d1,d3) passes under
    E <da> <db>               edge pairs
    O                         one crossingless circle (optional lines)

Lines starting with ``#`` are comments.  Every dart appears exactly once in
a V/X line and exactly once in an E line.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .maps import (CanonicalCode, CombinatorialMap, MapError, perm_invert,
                   _min_code, _root_candidates)


class DiagramError(ValueError):
    """Raised for invalid diagrams or malformed .hbk input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


_EMPTY_MAP = CombinatorialMap((0,), (0,))


@dataclass(frozen=True)
class Diagram:
    """A diagram: map + understrand darts + optional crossingless circles."""

    map: CombinatorialMap
    under: FrozenSet[int]
    circles: int = 0

    def __post_init__(self):
        if self.circles < 0:
            raise DiagramError("negative circle count")
        under = self.under
        sigma = self.map.sigma
        seen: Set[int] = set()
        for cyc in self.map.vertices():
            if len(cyc) == 4:
                inside = [d for d in cyc if d in under]
                if len(inside) != 2 or sigma[sigma[inside[0]]] != inside[1]:
                    raise DiagramError(
                        f"crossing {min(cyc)} needs exactly one opposite "
                        "understrand pair")
                seen.update(inside)
            elif len(cyc) == 3:
                if any(d in under for d in cyc):
                    raise DiagramError(
                        f"trivalent vertex {min(cyc)} cannot carry a marker")
            else:
                raise DiagramError(f"vertex of degree {len(cyc)}")
        if seen != set(under):
            raise DiagramError("under markers on unknown darts")

    # ---------------- constructors ----------------

    @staticmethod
    def unknot(circles: int = 1) -> "Diagram":
        return Diagram(_EMPTY_MAP, frozenset(), circles)

    @staticmethod
    def from_map(m: CombinatorialMap, under: Sequence[int], circles: int = 0) -> "Diagram":
        return Diagram(m, frozenset(under), circles)

    # ---------------- structure ----------------

    @property
    def n_crossings(self) -> int:
        return sum(1 for c in self.map.vertices() if len(c) == 4)

    def crossings(self) -> List[List[int]]:
        return [c for c in self.map.vertices() if len(c) == 4]

    def spine_vertices(self) -> List[List[int]]:
        return [c for c in self.map.vertices() if len(c) == 3]

    def is_under(self, dart: int) -> bool:
        return dart in self.under

    def strand_exit(self, enter: int) -> int:
        """Dart where the strand entering a crossing at ``enter`` leaves."""
        s = self.map.sigma
        return s[s[enter]]

    def component_count(self) -> int:
        """Connected components of the spatial graph (plus loose circles)."""
        n = self.map.n_darts
        parent = list(range(n + 1))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a: int, b: int) -> None:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for d in range(1, n + 1):
            union(d, self.map.alpha[d])
        for cyc in self.map.vertices():
            if len(cyc) == 4:
                union(cyc[0], self.strand_exit(cyc[0]))
                union(cyc[1], self.strand_exit(cyc[1]))
            else:
                union(cyc[0], cyc[1])
                union(cyc[0], cyc[2])
        comps = {find(d) for d in range(1, n + 1)}
        return len(comps) + self.circles

    def mirror(self) -> "Diagram":
        """The mirror diagram: reversed rotations, same understrand pairs."""
        return Diagram(self.map.mirror(), self.under, self.circles)

    def relabel(self, perm: Sequence[int]) -> "Diagram":
        return Diagram(self.map.relabel(perm),
                       frozenset(perm[d] for d in self.under), self.circles)

    # ---------------- canonical code ----------------

    def canonical(self) -> CanonicalCode:
        """Canonical code including crossing data; see maps.canonical_code."""
        if self.map.n_darts == 0:
            base = (0, self.circles)
            return CanonicalCode(base, base)
        comps = self.map.connected_components()
        if len(comps) == 1:
            code = self._component_code(self.map, self.under)
            mcode = self._component_code(self.map.mirror(), self.under)
        else:
            subs = []
            for comp in comps:
                sub, subunder = _subdiagram(self.map, self.under, comp)
                subs.append((self._component_code(sub, subunder),
                             self._component_code(sub.mirror(), subunder)))
            code = tuple(x for c, _ in sorted(subs) for x in c)
            mcode = tuple(x for _, mc in sorted(subs, key=lambda t: t[1]) for x in mc)
        return CanonicalCode(code + (self.circles,), mcode + (self.circles,))

    @staticmethod
    def _component_code(m: CombinatorialMap, under: FrozenSet[int]) -> Tuple[int, ...]:
        best: Optional[Tuple[int, ...]] = None
        for root in _root_candidates(m):
            code = _diagram_code_from_root(m, under, root)
            if best is None or code < best:
                best = code
        assert best is not None
        return best

    def canonical_key(self, up_to_mirror: bool = False) -> Tuple[int, ...]:
        return self.canonical().key(up_to_mirror)

    def diagram_id(self) -> str:
        """Stable hex id: hash of the oriented canonical code."""
        data = ",".join(map(str, self.canonical().code)).encode()
        return hashlib.sha256(data).hexdigest()[:16]

    # ---------------- text codec ----------------

    def to_hbk(self, comment: Optional[str] = None) -> str:
        lines = ["hbk 1"]
        if comment:
            for part in comment.splitlines():
                lines.append(f"# {part}")
        for cyc in self.map.vertices():
            if len(cyc) == 3:
                k = min(range(3), key=lambda i: cyc[i])
                rot = cyc[k:] + cyc[:k]
                lines.append("V " + " ".join(map(str, rot)))
            else:
                unders = [d for d in cyc if d in self.under]
                k = cyc.index(min(unders))
                rot = cyc[k:] + cyc[:k]
                lines.append("X " + " ".join(map(str, rot)))
        for d in range(1, self.map.n_darts + 1):
            if d < self.map.alpha[d]:
                lines.append(f"E {d} {self.map.alpha[d]}")
        lines.extend(["O"] * self.circles)
        return "\n".join(lines) + "\n"

    def to_code_string(self) -> str:
        """One-line .hbk (';'-separated), used in JSON-lines streams."""
        return ";".join(l for l in self.to_hbk().splitlines()
                        if l and not l.startswith("#"))

    @staticmethod
    def from_hbk(text: str) -> "Diagram":
        if ";" in text and "\n" not in text.strip():
            text = text.replace(";", "\n")
        lines = text.splitlines()
        vertex_cycles: List[List[int]] = []
        under: Set[int] = set()
        pairs: List[Tuple[int, int]] = []
        circles = 0
        seen_header = False
        dart_vertex_line: Dict[int, int] = {}
        dart_edge_line: Dict[int, int] = {}
        for ln, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if not seen_header:
                if parts != ["hbk", "1"]:
                    raise DiagramError("expected header 'hbk 1'", ln)
                seen_header = True
                continue
            tag = parts[0]
            try:
                darts = [int(x) for x in parts[1:]]
            except ValueError:
                raise DiagramError(f"bad dart number in {line!r}", ln) from None
            if tag == "V" or tag == "X":
                want = 3 if tag == "V" else 4
                if len(darts) != want:
                    raise DiagramError(
                        f"{tag} line needs {want} darts, got {len(darts)}", ln)
                for d in darts:
                    if d in dart_vertex_line:
                        raise DiagramError(f"dart {d} appears in two vertex lines", ln)
                    dart_vertex_line[d] = ln
                vertex_cycles.append(darts)
                if tag == "X":
                    under.update((darts[0], darts[2]))
            elif tag == "E":
                if len(darts) != 2:
                    raise DiagramError("E line needs two darts", ln)
                for d in darts:
                    if d in dart_edge_line:
                        raise DiagramError(f"dart {d} appears in two E lines", ln)
                    dart_edge_line[d] = ln
                pairs.append((darts[0], darts[1]))
            elif tag == "O":
                if darts:
                    raise DiagramError("O line takes no darts", ln)
                circles += 1
            else:
                raise DiagramError(f"unknown line tag {tag!r}", ln)
        if not seen_header:
            raise DiagramError("missing 'hbk 1' header", None)
        vdarts = set(dart_vertex_line)
        edarts = set(dart_edge_line)
        if vdarts != edarts:
            missing = sorted(vdarts.symmetric_difference(edarts))
            raise DiagramError(f"unpaired dart {missing[0]}",
                               dart_vertex_line.get(missing[0],
                                                    dart_edge_line.get(missing[0])))
        n = len(vdarts)
        if vdarts and vdarts != set(range(1, n + 1)):
            # relabel arbitrary dart names to 1..n
            order = {d: i for i, d in enumerate(sorted(vdarts), start=1)}
            vertex_cycles = [[order[d] for d in cyc] for cyc in vertex_cycles]
            pairs = [(order[a], order[b]) for a, b in pairs]
            under = {order[d] for d in under}
        try:
            m = CombinatorialMap.from_cycles(vertex_cycles, pairs) if n else _EMPTY_MAP
        except MapError as exc:
            raise DiagramError(str(exc), None) from None
        return Diagram(m, frozenset(under), circles)


def _subdiagram(m: CombinatorialMap, under: FrozenSet[int],
                darts: Sequence[int]) -> Tuple[CombinatorialMap, FrozenSet[int]]:
    relabel = {d: i for i, d in enumerate(sorted(darts), start=1)}
    n = len(darts)
    sigma = [0] * (n + 1)
    alpha = [0] * (n + 1)
    for d in darts:
        sigma[relabel[d]] = relabel[m.sigma[d]]
        alpha[relabel[d]] = relabel[m.alpha[d]]
    sub = CombinatorialMap(tuple(sigma), tuple(alpha))
    return sub, frozenset(relabel[d] for d in under if d in relabel)


def _diagram_code_from_root(m: CombinatorialMap, under: FrozenSet[int],
                            root: int) -> Tuple[int, ...]:
    """Map BFS code extended with the understrand bit of each dart."""
    n = m.n_darts
    sigma, alpha = m.sigma, m.alpha
    new = [0] * (n + 1)
    order = [0] * (n + 1)
    new[root] = 1
    order[1] = root
    cnt = 1
    head = 1
    while head <= cnt:
        u = order[head]
        head += 1
        for v in (sigma[u], alpha[u]):
            if not new[v]:
                cnt += 1
                new[v] = cnt
                order[cnt] = v
    if cnt != n:
        raise MapError("disconnected map")
    out = [n]
    for lbl in range(1, n + 1):
        out.append(new[sigma[order[lbl]]])
    for lbl in range(1, n + 1):
        out.append(new[alpha[order[lbl]]])
    for lbl in range(1, n + 1):
        out.append(1 if order[lbl] in under else 0)
    return tuple(out)


def diagrams_equal(a: Diagram, b: Diagram, up_to_mirror: bool = False) -> bool:
    return a.canonical_key(up_to_mirror) == b.canonical_key(up_to_mirror)


# ============================================================
# Crossing assignment
# ============================================================


def assign_crossings(m: CombinatorialMap, up_to_mirror: bool = True) -> Iterator[Diagram]:
    """All over/under assignments of a map's 4-valent vertices.

    Each crossing picks one of its two opposite dart pairs as the
    understrand: 2^c diagrams for c crossings.  With ``up_to_mirror`` the
    assignment x and its all-crossings flip are the two projections of a
    mirror pair, so one representative per {x, ~x} orbit is emitted:
    2^(c-1) diagrams for c >= 1, matching the reference bookkeeping of
    908 * 2^6 diagrams at seven crossings.
    """
    cross = sorted((c for c in m.vertices() if len(c) == 4),
                   key=lambda c: c[0])
    c = len(cross)
    for bits in range(1 << c):
        if up_to_mirror and c >= 1:
            flipped = (1 << c) - 1 - bits
            if flipped < bits:
                continue
        under: List[int] = []
        for i, cyc in enumerate(cross):
            if (bits >> i) & 1:
                under.extend((cyc[1], cyc[3]))
            else:
                under.extend((cyc[0], cyc[2]))
        yield Diagram(m, frozenset(under))


# ============================================================
# Strand structure (shared by the Wirtinger construction and rewriting)
# ============================================================


@dataclass(frozen=True)
class SpineEdge:
    """A maximal strand of the spatial graph, walked dart by dart.

    ``passes`` lists (enter_dart, exit_dart) for each crossing traversed, in
    walk order.  For an open edge the walk starts and ends at trivalent
    darts; a closed strand (knot component) starts at its minimal dart and
    ``closed`` is True.
    """

    index: int
    start: int
    end: int
    passes: Tuple[Tuple[int, int], ...]
    closed: bool


def spine_edges(d: Diagram) -> List[SpineEdge]:
    """Decompose the diagram into spatial-graph edges (deterministic order)."""
    m = d.map
    tri_darts = sorted(dd for cyc in m.vertices() if len(cyc) == 3 for dd in cyc)
    visited: Set[int] = set()
    edges: List[SpineEdge] = []

    def walk(start: int, closed: bool) -> SpineEdge:
        passes: List[Tuple[int, int]] = []
        cur = start
        while True:
            visited.add(cur)
            far = m.alpha[cur]
            visited.add(far)
            if far in tri_set:
                return SpineEdge(len(edges), start, far, tuple(passes), False)
            exit_ = d.strand_exit(far)
            passes.append((far, exit_))
            if closed and exit_ == start:
                return SpineEdge(len(edges), start, start, tuple(passes), True)
            cur = exit_

    tri_set = set(tri_darts)
    for start in tri_darts:
        if start in visited:
            continue
        edges.append(walk(start, closed=False))
    # remaining strands are closed (no trivalent vertex on them)
    for dart in range(1, m.n_darts + 1):
        if dart not in visited:
            edges.append(walk(dart, closed=True))
    return edges


def delete_spine_edge(d: Diagram, edge_index: int) -> Diagram:
    """The diagram of the spatial subgraph with one spine edge removed.

    Crossings along the deleted strand are smoothed into through-strands of
    the other strand; the trivalent endpoints dissolve, joining their two
    remaining legs.  The result may be disconnected (e.g. the two loops of
    a handcuff) or contain crossingless circles.
    """
    edges = spine_edges(d)
    if not 0 <= edge_index < len(edges):
        raise DiagramError(f"no spine edge {edge_index}")
    e = edges[edge_index]
    m = d.map
    sigma, alpha = m.sigma, m.alpha

    through: Dict[int, int] = {}        # wired-through darts at dead vertices
    dead_darts: Set[int] = set()

    vert_of = m.dart_vertex()
    vertices = m.vertices()
    if not e.closed and vert_of[e.start] == vert_of[e.end]:
        raise DiagramError("cannot delete a spine loop edge")

    # collect all darts on the strand's own map edges
    walk = [e.start] if not e.closed else []
    for enter, exit_ in e.passes:
        walk.extend((enter, exit_))
    if not e.closed:
        walk.append(e.end)
    # consecutive (cur, far) pairs along the walk are alpha partners
    for i in range(0, len(walk), 2):
        dead_darts.update((walk[i], alpha[walk[i]]))

    own_pass_darts = {x for enter, exit_ in e.passes for x in (enter, exit_)}
    for enter, _exit in e.passes:
        v = vert_of[enter]
        o1, o2 = sigma[enter], sigma[sigma[sigma[enter]]]
        if o1 not in own_pass_darts:   # self-crossings die entirely
            through[o1] = o2
            through[o2] = o1
        dead_darts.update(vertices[v])
    if not e.closed:
        for endpoint in (e.start, e.end):
            v = vert_of[endpoint]
            legs = [x for x in vertices[v] if x != endpoint]
            through[legs[0]] = legs[1]
            through[legs[1]] = legs[0]
            dead_darts.update(vertices[v])

    survivors = [x for x in range(1, m.n_darts + 1) if x not in dead_darts]
    relabel = {x: i for i, x in enumerate(survivors, start=1)}
    new_sigma = [0] * (len(survivors) + 1)
    new_alpha = [0] * (len(survivors) + 1)
    for x in survivors:
        new_sigma[relabel[x]] = relabel[sigma[x]]

    circles = d.circles
    resolved: Set[int] = set()
    used_through: Set[int] = set()
    for x in survivors:
        if x in resolved:
            continue
        y = alpha[x]
        while y in dead_darts:
            used_through.add(y)
            y2 = through[y]
            used_through.add(y2)
            y = alpha[y2]
        new_alpha[relabel[x]] = relabel[y]
        new_alpha[relabel[y]] = relabel[x]
        resolved.update((x, y))
    # leftover through-wires form closed loops: components that lost every
    # crossing (and edge chains entirely between dead vertices)
    for z in sorted(through):
        if z in used_through:
            continue
        w = z
        while True:
            used_through.add(w)
            w2 = through[w]
            used_through.add(w2)
            w = alpha[w2]
            if w == z:
                break
        circles += 1

    new_under = frozenset(relabel[x] for x in d.under if x in relabel)
    return Diagram(CombinatorialMap(tuple(new_sigma), tuple(new_alpha)),
                   new_under, circles)


# ============================================================
# JSON-lines stream records
# ============================================================


def diagram_record(d: Diagram, tags: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    return {"id": d.diagram_id(), "code": d.to_code_string(),
            "tags": dict(tags or {})}


def write_jsonl(path, records: Iterator[Dict[str, object]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path) -> List[Dict[str, object]]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def record_diagram(rec: Dict[str, object]) -> Diagram:
    return Diagram.from_hbk(str(rec["code"]))

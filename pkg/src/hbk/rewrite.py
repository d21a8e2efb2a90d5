"""Local rewriting on diagrams: generalized Reidemeister moves, the IH-move,
and the crossing-reducing filter patterns.

Rules are data.  A rule file holds two partial diagrams over a shared
boundary interface:

    RULE <name> <crossing delta> <graph|hk>
    BOUNDARY <b1> <b2> ...
    LHS
    V/X/E lines
    RHS
    V/X/E lines

Pattern darts are positive integers.  Boundary darts are the strand ends of
the patch: each appears in V/X lines (a slot at a pattern vertex) or as a
loose end of an E line; in the RHS each boundary dart occurs exactly once
and names where the corresponding external edge reattaches.  A match embeds
the LHS into a diagram respecting rotations, internal edges and understrand
markers; faces of the matched patch are forced by those constraints, so a
matched bigon or monogon is automatically empty.

Applying a rule removes the matched vertices, instantiates the RHS with
fresh darts and reconnects the boundary by wire tracing; a wire loop that
closes without touching any dart becomes a crossingless circle.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .diagrams import Diagram, DiagramError
from .maps import CombinatorialMap

RULES_DIR = Path(__file__).parent / "rules"


class RewriteError(ValueError):
    """Malformed rule files, stale sites, or invalid applications."""


# ============================================================
# Patterns and rules
# ============================================================


@dataclass(frozen=True)
class Pattern:
    """A partial diagram: vertices with rotations, internal edges, markers."""

    vertices: Tuple[Tuple[str, Tuple[int, ...]], ...]  # ("V"|"X", darts ccw)
    edges: Tuple[Tuple[int, int], ...]

    def darts_at_vertices(self) -> List[int]:
        return [d for _, rot in self.vertices for d in rot]

    def under_darts(self) -> Set[int]:
        out: Set[int] = set()
        for kind, rot in self.vertices:
            if kind == "X":
                out.update((rot[0], rot[2]))
        return out

    def mirrored(self) -> "Pattern":
        # reverse rotations; keep the same understrand pair of each crossing
        verts = []
        for kind, rot in self.vertices:
            rev = (rot[0],) + tuple(reversed(rot[1:]))
            verts.append((kind, rev))
        return Pattern(tuple(verts), self.edges)


@dataclass(frozen=True)
class RewriteRule:
    name: str
    effect: int
    mode: str                     # "graph" | "hk"
    boundary: Tuple[int, ...]
    lhs: Pattern
    rhs: Pattern

    def __post_init__(self):
        if self.mode not in ("graph", "hk"):
            raise RewriteError(f"rule {self.name}: bad mode {self.mode!r}")
        for side, pat in (("LHS", self.lhs), ("RHS", self.rhs)):
            at_vertices = pat.darts_at_vertices()
            if len(set(at_vertices)) != len(at_vertices):
                raise RewriteError(f"rule {self.name}: repeated dart in {side}")
            edge_darts = [d for e in pat.edges for d in e]
            if len(set(edge_darts)) != len(edge_darts):
                raise RewriteError(f"rule {self.name}: repeated dart in {side} edges")
        lhs_crossings = sum(1 for k, _ in self.lhs.vertices if k == "X")
        rhs_crossings = sum(1 for k, _ in self.rhs.vertices if k == "X")
        if rhs_crossings - lhs_crossings != self.effect:
            raise RewriteError(f"rule {self.name}: effect does not match patterns")

    def inverse(self) -> "RewriteRule":
        return RewriteRule(self.name + "^-1", -self.effect, self.mode,
                           self.boundary, self.rhs, self.lhs)

    def mirrored(self) -> "RewriteRule":
        return RewriteRule(self.name + "~", self.effect, self.mode,
                           self.boundary, self.lhs.mirrored(), self.rhs.mirrored())


def parse_rule(text: str, name_hint: str = "") -> RewriteRule:
    name = name_hint
    effect = 0
    mode = "graph"
    boundary: Tuple[int, ...] = ()
    sections: Dict[str, List[Tuple[str, List[int]]]] = {"LHS": [], "RHS": []}
    current: Optional[str] = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "RULE":
            if len(parts) != 4:
                raise RewriteError(f"line {ln}: RULE needs name, effect, mode")
            name, effect, mode = parts[1], int(parts[2]), parts[3]
        elif tag == "BOUNDARY":
            boundary = tuple(int(x) for x in parts[1:])
        elif tag in ("LHS", "RHS"):
            current = tag
        elif tag in ("V", "X", "E"):
            if current is None:
                raise RewriteError(f"line {ln}: {tag} before LHS/RHS")
            sections[current].append((tag, [int(x) for x in parts[1:]]))
        else:
            raise RewriteError(f"line {ln}: unknown tag {tag!r}")

    def build(items: List[Tuple[str, List[int]]]) -> Pattern:
        verts = []
        edges = []
        for tag, darts in items:
            if tag == "V":
                if len(darts) != 3:
                    raise RewriteError(f"rule {name}: V needs 3 darts")
                verts.append(("V", tuple(darts)))
            elif tag == "X":
                if len(darts) != 4:
                    raise RewriteError(f"rule {name}: X needs 4 darts")
                verts.append(("X", tuple(darts)))
            else:
                if len(darts) != 2:
                    raise RewriteError(f"rule {name}: E needs 2 darts")
                edges.append((darts[0], darts[1]))
        return Pattern(tuple(verts), tuple(edges))

    rule = RewriteRule(name, effect, mode, boundary,
                       build(sections["LHS"]), build(sections["RHS"]))
    _check_rule_shape(rule)
    return rule


def _check_rule_shape(rule: RewriteRule) -> None:
    bset = set(rule.boundary)
    lhs_at_v = set(rule.lhs.darts_at_vertices())
    lhs_edge = {d for e in rule.lhs.edges for d in e}
    for b in bset:
        if b not in lhs_at_v and b not in lhs_edge:
            raise RewriteError(f"rule {rule.name}: boundary dart {b} unused in LHS")
    internal = (lhs_at_v | lhs_edge) - bset
    for d in internal:
        if d not in lhs_at_v:
            raise RewriteError(
                f"rule {rule.name}: internal LHS dart {d} not at a vertex")
    rhs_at_v = set(rule.rhs.darts_at_vertices())
    rhs_edge = {d for e in rule.rhs.edges for d in e}
    for b in bset:
        if (b in rhs_at_v) + sum(d == b for e in rule.rhs.edges for d in e) != 1:
            raise RewriteError(
                f"rule {rule.name}: boundary dart {b} must occur once in RHS")
    for d in (rhs_at_v | rhs_edge) - bset:
        if d not in rhs_at_v:
            raise RewriteError(
                f"rule {rule.name}: internal RHS dart {d} not at a vertex")
    # the LHS constraint graph must be connected or matching cannot seed it
    all_darts = sorted(lhs_at_v | lhs_edge)
    if all_darts:
        nbr: Dict[int, List[int]] = {d: [] for d in all_darts}
        for _, rot in rule.lhs.vertices:
            for i, p in enumerate(rot):
                nbr[p].append(rot[(i + 1) % len(rot)])
                nbr[rot[(i + 1) % len(rot)]].append(p)
        for x, y in rule.lhs.edges:
            nbr[x].append(y)
            nbr[y].append(x)
        stack, comp = [all_darts[0]], {all_darts[0]}
        while stack:
            for q in nbr[stack.pop()]:
                if q not in comp:
                    comp.add(q)
                    stack.append(q)
        if len(comp) != len(all_darts):
            raise RewriteError(f"rule {rule.name}: LHS pattern is disconnected")


# ============================================================
# Matching
# ============================================================

Match = Tuple[Tuple[int, int], ...]   # sorted (pattern dart -> diagram dart)


def find_matches(d: Diagram, rule: RewriteRule) -> List[Match]:
    """All embeddings of the rule's LHS into ``d``, in deterministic order.

    Images of pattern darts sitting at pattern vertices are pairwise
    distinct.  A vertex-free boundary dart only names the far end of an
    interface edge; its image may coincide with another image (the interface
    edge may close up onto the patch, as around a loop).
    """
    pat = rule.lhs
    n = d.map.n_darts
    if n == 0:
        return []
    sigma, alpha = d.map.sigma, d.map.alpha

    deg = [0] * (n + 1)
    for cyc in d.map.vertices():
        for dart in cyc:
            deg[dart] = len(cyc)

    pat_sigma: Dict[int, int] = {}
    pat_kind: Dict[int, str] = {}
    for kind, rot in pat.vertices:
        for i, p in enumerate(rot):
            pat_sigma[p] = rot[(i + 1) % len(rot)]
            pat_kind[p] = kind
    pat_alpha: Dict[int, int] = {}
    for a, b in pat.edges:
        pat_alpha[a] = b
        pat_alpha[b] = a
    pat_under = pat.under_darts()

    all_pat_darts = sorted(set(pat_sigma) | set(pat_alpha))
    if not all_pat_darts:
        return []
    # loose darts: vertex-free with a vertex-borne alpha partner; exempt
    # from injectivity (unless the whole pattern is vertex-free)
    loose = {p for p in all_pat_darts
             if p not in pat_kind and p in pat_alpha and pat_alpha[p] in pat_kind}
    anchor = all_pat_darts[0]

    matches: List[Match] = []
    for target in range(1, n + 1):
        f: Dict[int, int] = {anchor: target}
        used = set() if anchor in loose else {target}
        queue = [anchor]
        ok = True
        while queue and ok:
            p = queue.pop()
            img = f[p]
            neighbors: List[Tuple[int, int]] = []
            if p in pat_kind:
                if deg[img] != (3 if pat_kind[p] == "V" else 4):
                    ok = False
                    break
                if pat_kind[p] == "X" and ((p in pat_under) != (img in d.under)):
                    ok = False
                    break
                neighbors.append((pat_sigma[p], sigma[img]))
            if p in pat_alpha:
                neighbors.append((pat_alpha[p], alpha[img]))
            for q, imq in neighbors:
                if q in f:
                    if f[q] != imq:
                        ok = False
                        break
                elif q in loose:
                    f[q] = imq
                    queue.append(q)
                else:
                    if imq in used:
                        ok = False
                        break
                    f[q] = imq
                    used.add(imq)
                    queue.append(q)
        if not ok or len(f) != len(all_pat_darts):
            continue
        # final verification over all constraints
        good = True
        for p in all_pat_darts:
            if p in pat_kind:
                if deg[f[p]] != (3 if pat_kind[p] == "V" else 4):
                    good = False
                    break
                if pat_sigma[p] in f and f[pat_sigma[p]] != sigma[f[p]]:
                    good = False
                    break
                if pat_kind[p] == "X" and ((p in pat_under) != (f[p] in d.under)):
                    good = False
                    break
            if p in pat_alpha and f[pat_alpha[p]] != alpha[f[p]]:
                good = False
                break
        if good:
            matches.append(tuple(sorted(f.items())))
    # dedupe identical mappings (cannot normally occur, but keep stable)
    out: List[Match] = []
    seen: Set[Match] = set()
    for mt in matches:
        if mt not in seen:
            seen.add(mt)
            out.append(mt)
    return out


# ============================================================
# Application
# ============================================================


def apply_rule(d: Diagram, rule: RewriteRule, site: Match) -> Diagram:
    """Rewrite ``d`` at ``site``; raises on stale sites."""
    current = find_matches(d, rule)
    if site not in current:
        raise RewriteError(f"stale site for rule {rule.name}")
    f = dict(site)
    n = d.map.n_darts
    sigma, alpha = d.map.sigma, d.map.alpha

    lhs_vertex_darts = set(rule.lhs.darts_at_vertices())
    removed = {f[p] for p in lhs_vertex_darts}

    bset = set(rule.boundary)
    lhs_alpha: Dict[int, int] = {}
    for x, y in rule.lhs.edges:
        lhs_alpha[x] = y
        lhs_alpha[y] = x

    # the leg of a boundary dart: the patch dart its interface edge attaches
    # to (itself when at a vertex; its alpha partner when vertex-free); in a
    # pure-edge pattern the dart itself survives and anchors directly
    leg: Dict[int, Optional[int]] = {}
    for b in bset:
        if b in lhs_vertex_darts:
            leg[b] = b
        elif b in lhs_alpha and lhs_alpha[b] in lhs_vertex_darts:
            leg[b] = lhs_alpha[b]
        else:
            leg[b] = None  # pure-edge boundary: f[b] survives

    # anchors: where each boundary dart's external edge attaches on the
    # surviving diagram side; None when it attaches to another boundary wire
    anchor: Dict[int, Optional[int]] = {}
    diag_link: Dict[int, int] = {}
    leg_img = {f[leg[b]]: b for b in bset if leg[b] is not None}
    for b in bset:
        if leg[b] is None:
            anchor[b] = f[b]
            continue
        a = alpha[f[leg[b]]]
        if a in removed:
            b2 = leg_img.get(a)
            if b2 is None:
                raise RewriteError(
                    f"rule {rule.name}: interface edge buried in the patch")
            anchor[b] = None
            diag_link[b] = b2
        else:
            anchor[b] = a

    # --- instantiate RHS -------------------------------------------------
    survivors = [dart for dart in range(1, n + 1) if dart not in removed]
    relabel = {dart: i for i, dart in enumerate(survivors, start=1)}
    next_dart = len(survivors)

    # edges consumed by the patch: any edge at a removed vertex dies with it,
    # and an LHS E line matched onto surviving darts (vertex-free boundary)
    # is consumed as well
    consumed_pairs: Set[FrozenSet[int]] = set()
    for a, b in rule.lhs.edges:
        consumed_pairs.add(frozenset((f[a], f[b])))

    new_sigma: Dict[int, int] = {}
    new_alpha: Dict[int, int] = {}
    new_under: Set[int] = set()
    for dart in survivors:
        s = sigma[dart]
        assert s not in removed, "survivor rotation hit a removed dart"
        new_sigma[relabel[dart]] = relabel[s]
        if dart in d.under:
            new_under.add(relabel[dart])
        partner = alpha[dart]
        if partner not in removed and \
                frozenset((dart, partner)) not in consumed_pairs:
            new_alpha[relabel[dart]] = relabel[partner]

    rhs_dart_id: Dict[int, int] = {}
    plug: Dict[int, int] = {}       # boundary dart -> its plug dart id
    for kind, rot in rule.rhs.vertices:
        ids = []
        for p in rot:
            next_dart += 1
            ids.append(next_dart)
            if p in bset:
                plug[p] = next_dart
            else:
                rhs_dart_id[p] = next_dart
        for i, did in enumerate(ids):
            new_sigma[did] = ids[(i + 1) % len(ids)]
        if kind == "X":
            new_under.update((ids[0], ids[2]))

    rhs_link: Dict[int, int] = {}   # boundary dart -> boundary dart (RHS E wire)
    for a, b in rule.rhs.edges:
        if a in bset and b in bset:
            rhs_link[a] = b
            rhs_link[b] = a
        elif a in bset:
            plug[a] = rhs_dart_id[b]
        elif b in bset:
            plug[b] = rhs_dart_id[a]
        else:
            new_alpha[rhs_dart_id[a]] = rhs_dart_id[b]
            new_alpha[rhs_dart_id[b]] = rhs_dart_id[a]

    # --- wire tracing -----------------------------------------------------
    # nodes: ("D", b) diagram side, ("R", b) rule side of each connector.
    # D(b) joins R(b) through the connector; D(b) wires to the real anchor or
    # to D(b2); R(b) wires to the real plug or to R(b2).
    circles = d.circles

    def wire_of(node):
        side, b = node
        if side == "D":
            if anchor[b] is not None:
                return ("real", relabel[anchor[b]])
            return ("node", ("D", diag_link[b]))
        if b in plug:
            return ("real", plug[b])
        return ("node", ("R", rhs_link[b]))

    visited: Set[Tuple[str, int]] = set()

    def trace(start_node) -> int:
        """Follow wires from one side of a connector to a real dart."""
        node = start_node
        while True:
            visited.add(node)
            kind, payload = wire_of(node)
            if kind == "real":
                return payload
            # passing through connector payload: enter its other side
            visited.add(payload)
            node = (("R", payload[1]) if payload[0] == "D" else ("D", payload[1]))

    for b in sorted(bset):
        for side in ("D", "R"):
            node = (side, b)
            if node in visited:
                continue
            kind, payload = wire_of(node)
            if kind == "real":
                visited.add(node)
                other = trace(("R", b) if side == "D" else ("D", b))
                new_alpha[payload] = other
                new_alpha[other] = payload
    # untouched connector nodes now form closed wire loops: circles
    remaining = {("D", b) for b in bset} | {("R", b) for b in bset}
    remaining -= visited
    while remaining:
        node = min(remaining)
        cur = node
        while True:
            remaining.discard(cur)
            other_side = ("R", cur[1]) if cur[0] == "D" else ("D", cur[1])
            remaining.discard(other_side)
            kind, payload = wire_of(other_side)
            assert kind == "node", "wire loop touched a real dart"
            cur = payload
            if cur == node:
                break
        circles += 1

    total = next_dart
    sig = [0] * (total + 1)
    alp = [0] * (total + 1)
    for k, v in new_sigma.items():
        sig[k] = v
    for k, v in new_alpha.items():
        alp[k] = v
    if any(x == 0 for x in sig[1:]) or any(x == 0 for x in alp[1:]):
        raise RewriteError(f"rule {rule.name}: incomplete rewrite result")
    try:
        result = Diagram(CombinatorialMap(tuple(sig), tuple(alp)),
                         frozenset(new_under), circles)
    except (DiagramError, ValueError) as exc:
        raise RewriteError(f"rule {rule.name} produced invalid diagram: {exc}")
    return result


# ============================================================
# Rule sets
# ============================================================


def load_rules(directory: Optional[Path] = None) -> Dict[str, RewriteRule]:
    """Load all ``*.rule`` files from a directory (default: shipped rules)."""
    directory = Path(directory) if directory else RULES_DIR
    rules: Dict[str, RewriteRule] = {}
    for path in sorted(directory.glob("*.rule")):
        rule = parse_rule(path.read_text(), name_hint=path.stem)
        if rule.name in rules:
            raise RewriteError(f"duplicate rule name {rule.name}")
        rules[rule.name] = rule
    if not rules:
        raise RewriteError(f"no rule files found in {directory}")
    return rules


def with_mirrors(rules: Sequence[RewriteRule]) -> List[RewriteRule]:
    """Each rule followed by its mirror, deduplicated by pattern equality."""
    out: List[RewriteRule] = []
    seen = set()
    for rule in rules:
        for var in (rule, rule.mirrored()):
            key = (var.lhs, var.rhs, var.boundary, var.effect, var.mode)
            if key not in seen:
                seen.add(key)
                out.append(var)
    return out


FILTER_RULE_NAMES = ("r1a", "r1b", "r2a", "r4o", "r4u", "r5a", "r5b",
                     "loop_o", "loop_u", "c01x_a", "c01x_b")
FLIP_RULE_NAMES = ("flip_a", "flip_b")
MOVE_RULE_NAMES = ("r1a", "r1b", "r2a", "r3", "r4o", "r4u", "r5a", "r5b", "ih")


def filter_rules(rules: Optional[Dict[str, RewriteRule]] = None,
                 names: Sequence[str] = FILTER_RULE_NAMES) -> List[RewriteRule]:
    rules = rules or load_rules()
    return with_mirrors([rules[n] for n in names])


def flip_rules(rules: Optional[Dict[str, RewriteRule]] = None) -> List[RewriteRule]:
    rules = rules or load_rules()
    base = [rules[n] for n in FLIP_RULE_NAMES]
    return with_mirrors(base + [r.inverse() for r in base])


def move_rules(rules: Optional[Dict[str, RewriteRule]] = None,
               mode: str = "hk") -> List[RewriteRule]:
    """The searching move set: basic moves, their inverses and mirrors."""
    rules = rules or load_rules()
    base = [rules[n] for n in MOVE_RULE_NAMES
            if mode == "hk" or rules[n].mode == "graph"]
    return with_mirrors(base + [r.inverse() for r in base])


# ============================================================
# Reducibility filter and loop-flip normalization
# ============================================================


def is_reducible(d: Diagram, rules: Sequence[RewriteRule]) -> str:
    """"reducible" if some crossing-reducing rule matches, else "unknown"."""
    for rule in rules:
        if rule.effect >= 0:
            continue
        if find_matches(d, rule):
            return "reducible"
    return "unknown"


def flip_orbit(d: Diagram, flips: Sequence[RewriteRule],
               max_orbit: int = 4096) -> List[Diagram]:
    """Closure of ``d`` under the loop-flip rules (canonical-key dedup)."""
    seen: Dict[Tuple[int, ...], Diagram] = {d.canonical_key(): d}
    frontier = [d]
    while frontier:
        new: List[Diagram] = []
        for cur in frontier:
            for rule in flips:
                for site in find_matches(cur, rule):
                    try:
                        nxt = apply_rule(cur, rule, site)
                    except RewriteError:
                        continue
                    key = nxt.canonical_key()
                    if key not in seen:
                        if len(seen) >= max_orbit:
                            raise RewriteError("flip orbit exceeded budget")
                        seen[key] = nxt
                        new.append(nxt)
        frontier = new
    return [seen[k] for k in sorted(seen)]


def normalize_loop_flips(diagrams: Sequence[Diagram],
                         flips: Optional[Sequence[RewriteRule]] = None) -> List[Diagram]:
    """Keep one representative (minimal canonical code) per flip orbit.

    Orbits are computed by closing each diagram under the flip rules, so a
    representative is kept even when parts of the orbit are absent from the
    input; no orbit is dropped entirely.
    """
    flips = flip_rules() if flips is None else flips
    chosen: Dict[Tuple[int, ...], Diagram] = {}
    for d in diagrams:
        orbit = flip_orbit(d, flips)
        rep = orbit[0]  # minimal canonical key in the orbit
        key = rep.canonical_key()
        if key not in chosen:
            chosen[key] = rep
    return [chosen[k] for k in sorted(chosen)]


# ============================================================
# Move traces and bounded equivalence search
# ============================================================


@dataclass(frozen=True)
class MoveStep:
    rule: str
    site: Match


@dataclass(frozen=True)
class MoveTrace:
    start_code: Tuple[int, ...]
    end_code: Tuple[int, ...]
    steps: Tuple[MoveStep, ...]
    mirrored_target: bool = False

    def __len__(self) -> int:
        return len(self.steps)


def replay(d: Diagram, trace: MoveTrace,
           rules: Dict[str, RewriteRule]) -> Diagram:
    """Re-run a trace from ``d``; raises if any step fails to apply."""
    if d.canonical_key() != trace.start_code:
        raise RewriteError("trace does not start at this diagram")
    cur = d
    for step in trace.steps:
        cur = apply_rule(cur, rules[step.rule], step.site)
    if cur.canonical_key() != trace.end_code:
        raise RewriteError("trace replay reached a different diagram")
    return cur


class SearchBudget(RuntimeError):
    """Raised when the equivalence search exhausts its node budget."""


def search_equivalence(a: Diagram, b: Diagram, depth: int, max_crossings: int,
                       mode: str = "hk", allow_mirror: bool = False,
                       max_nodes: int = 20000,
                       rules: Optional[Dict[str, RewriteRule]] = None
                       ) -> Optional[MoveTrace]:
    """Search for a move trace from ``a`` to ``b`` within the given bounds.

    Bidirectional best-first over canonical codes (fewest crossings first):
    both endpoints expand until the frontiers meet, the b side seeded with
    the mirror as well when ``allow_mirror``.  Each side explores at most
    ``depth`` moves deep, so a found trace has at most twice that many
    steps.  Returns a replay-verified trace, ``None`` when the bounded
    search space is exhausted without success, and raises
    :class:`SearchBudget` when the node budget cuts the search short.
    """
    all_rules = rules or load_rules()
    moves = move_rules(all_rules, mode=mode)
    named = {r.name: r for r in moves}

    start_key = a.canonical_key()
    # side B states carry a flag: reached from mirror(b)?
    Parent = Optional[Tuple[Tuple[int, ...], str, Match]]
    seen_a: Dict[Tuple[int, ...], Parent] = {start_key: None}
    seen_b: Dict[Tuple[int, ...], Parent] = {}
    mirrored_of: Dict[Tuple[int, ...], bool] = {}
    diagram_of: Dict[Tuple[int, ...], Diagram] = {start_key: a}
    depth_of: Dict[Tuple[int, ...], int] = {start_key: 0}

    b_seeds = [(b, False)]
    if allow_mirror:
        mb = b.mirror()
        if mb.canonical_key() != b.canonical_key():
            b_seeds.append((mb, True))
    heap_a: List[Tuple[int, int, Tuple[int, ...]]] = [
        (a.n_crossings, 0, start_key)]
    heap_b: List[Tuple[int, int, Tuple[int, ...]]] = []
    for d0, is_mir in b_seeds:
        k0 = d0.canonical_key()
        if k0 not in seen_b:
            seen_b[k0] = None
            mirrored_of[k0] = is_mir
            diagram_of[k0] = d0
            depth_of[k0] = 0
            heap_b.append((d0.n_crossings, 0, k0))
    heapq.heapify(heap_b)

    def path_to_seed(side: Dict[Tuple[int, ...], Parent],
                     key: Tuple[int, ...]) -> List[Tuple[Tuple[int, ...], str, Match]]:
        """Steps from the side's seed down to ``key`` (seed-first order)."""
        chain: List[Tuple[Tuple[int, ...], str, Match]] = []
        cur = key
        while side[cur] is not None:
            parent, rule_name, site = side[cur]
            chain.append((cur, rule_name, site))
            cur = parent
        chain.reverse()
        return chain

    def build_trace(meet: Tuple[int, ...]) -> MoveTrace:
        steps: List[MoveStep] = []
        cur = a
        for _key, rule_name, site in path_to_seed(seen_a, meet):
            steps.append(MoveStep(rule_name, site))
            cur = apply_rule(cur, named[rule_name], site)
        # invert the b-side path, re-deriving each inverse application on
        # the concrete replayed diagram (sites are label-specific, and the
        # replayed diagram need not carry the b side's labels)
        chain = path_to_seed(seen_b, meet)
        mirrored = mirrored_of[meet]
        for key, _rule_name, _site in reversed(chain):
            parent_key = seen_b[key][0]
            found = None
            for rule in moves:
                for site in find_matches(cur, rule):
                    try:
                        out = apply_rule(cur, rule, site)
                    except RewriteError:
                        continue
                    if out.canonical_key() == parent_key:
                        found = (rule.name, site, out)
                        break
                if found:
                    break
            if found is None:
                raise RewriteError("could not invert a search step")
            steps.append(MoveStep(found[0], found[1]))
            cur = found[2]
        end_key = cur.canonical_key()
        trace = MoveTrace(start_key, end_key, tuple(steps), mirrored)
        replay(a, trace, named)   # verification
        return trace

    if start_key in seen_b:
        return MoveTrace(start_key, start_key, (),
                         mirrored_target=mirrored_of[start_key])

    nodes = 0
    while heap_a or heap_b:
        expand_a = bool(heap_a) and (not heap_b or len(heap_a) <= len(heap_b))
        heap = heap_a if expand_a else heap_b
        mine, other = (seen_a, seen_b) if expand_a else (seen_b, seen_a)
        _, dep, key = heapq.heappop(heap)
        if dep >= depth:
            continue
        cur = diagram_of[key]
        for rule in moves:
            if cur.n_crossings + rule.effect > max_crossings:
                continue
            for site in find_matches(cur, rule):
                try:
                    nxt = apply_rule(cur, rule, site)
                except RewriteError:
                    continue
                nkey = nxt.canonical_key()
                if nkey in mine:
                    continue
                nodes += 1
                if nodes > max_nodes:
                    raise SearchBudget(
                        f"equivalence search stopped after {max_nodes} nodes")
                mine[nkey] = (key, rule.name, site)
                if not expand_a:
                    mirrored_of[nkey] = mirrored_of[key]
                diagram_of[nkey] = nxt
                depth_of[nkey] = dep + 1
                if nkey in other:
                    return build_trace(nkey)
                heapq.heappush(heap, (nxt.n_crossings, dep + 1, nkey))
    return None

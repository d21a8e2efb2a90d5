"""Fundamental group presentations of diagram complements.

The Wirtinger construction assigns one generator per over-arc (a maximal
strand segment not interrupted by passing under a crossing and not passing
through a trivalent vertex), one conjugation relator per crossing and one
relator per trivalent vertex (the rotation-ordered product of the incident
arc generators, inverted when the arc is oriented outward).

Words are tuples of nonzero ints: letter ``+(i+1)`` is generator i, ``-(i+1)``
its inverse.  Tietze simplification only substitutes-and-deletes generators
that occur exactly once in some relator, so the presented group is
preserved and the generator count never grows; the count after
simplification is the rank upper bound used by the irreducibility test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .diagrams import Diagram, DiagramError, SpineEdge, spine_edges

Word = Tuple[int, ...]


@dataclass(frozen=True)
class Presentation:
    n_gens: int
    relators: Tuple[Word, ...]

    def __post_init__(self):
        for rel in self.relators:
            for letter in rel:
                if letter == 0 or abs(letter) > self.n_gens:
                    raise ValueError(f"letter {letter} out of range")

    def dump(self) -> str:
        lines = [f"gens {self.n_gens}"]
        for rel in self.relators:
            lines.append("rel " + " ".join(map(str, rel)))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PeripheralSystem:
    """Meridian words (one per spine edge) and longitude words (one per handle)."""

    meridians: Tuple[Word, ...]
    longitudes: Tuple[Word, ...]

    def dump(self) -> str:
        lines = []
        for i, w in enumerate(self.meridians):
            lines.append(f"mer {i}: " + " ".join(map(str, w)))
        for j, w in enumerate(self.longitudes):
            lines.append(f"lon {j}: " + " ".join(map(str, w)))
        return "\n".join(lines) + "\n"


# ============================================================
# Word utilities
# ============================================================


def free_reduce(word: Sequence[int]) -> Word:
    out: List[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == -w[-1]:
        w = w[1:-1]
    return tuple(w)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def canonical_relator(word: Word) -> Word:
    """Minimal rotation of the cyclically reduced word or its inverse."""
    w = cyclic_reduce(word)
    if not w:
        return w
    best = None
    for u in (w, invert_word(w)):
        for k in range(len(u)):
            rot = u[k:] + u[:k]
            if best is None or rot < best:
                best = rot
    return best


# ============================================================
# Wirtinger presentation
# ============================================================


def wirtinger(d: Diagram) -> Tuple[Presentation, PeripheralSystem]:
    """Presentation of the complement group with a peripheral system.

    Requires a connected, one-component diagram.  Crossing signs follow one
    fixed handedness convention (the other convention would present the
    isomorphic mirror-complement group); correctness is exercised by the
    move-invariance tests on the counting invariants.
    """
    return _wirtinger_impl(d, require_single=True)


def wirtinger_link(d: Diagram) -> Tuple[Presentation, PeripheralSystem]:
    """Wirtinger presentation without the one-component requirement.

    Used for constituent links of spatial graphs; split components
    contribute free factors (crossingless circles one free generator each).
    """
    return _wirtinger_impl(d, require_single=False)


def _wirtinger_impl(d: Diagram, require_single: bool) -> Tuple[Presentation, PeripheralSystem]:
    if d.map.n_darts == 0:
        if require_single and d.circles != 1:
            raise DiagramError("need a connected one-component diagram")
        n = d.circles
        return (Presentation(n, ()),
                PeripheralSystem(tuple((i + 1,) for i in range(n)),
                                 tuple(() for _ in range(n))))
    if require_single and d.component_count() != 1:
        raise DiagramError("need a connected one-component diagram")

    edges = spine_edges(d)
    sigma = d.map.sigma

    # --- arcs ---------------------------------------------------------
    # edge_arcs[e] lists the arc numbers of edge e in walk order; the maps
    # below give the walking strand's arc just before / after each pass.
    arc_count = 0
    edge_arcs: List[List[int]] = []
    pass_arc_before: Dict[int, int] = {}
    pass_arc_after: Dict[int, int] = {}

    for e in edges:
        n_under = sum(1 for enter, _ in e.passes if d.is_under(enter))
        if e.closed:
            n_arcs = max(n_under, 1)
        else:
            n_arcs = n_under + 1
        arcs = list(range(arc_count, arc_count + n_arcs))
        arc_count += n_arcs
        edge_arcs.append(arcs)

        # closed strands: arc s starts right after under pass number s;
        # before the first under pass the walker is on the last arc.
        cur = n_arcs - 1 if e.closed else 0
        seen_under = 0
        for enter, _exit in e.passes:
            pass_arc_before[enter] = arcs[cur]
            if d.is_under(enter):
                cur = seen_under if e.closed else cur + 1
                seen_under += 1
            pass_arc_after[enter] = arcs[cur]

    # --- crossing relators and signs ------------------------------------
    relators: List[Word] = []
    crossing_sign: Dict[int, int] = {}   # under enter dart -> +-1
    over_arc_at: Dict[int, int] = {}     # under enter dart -> over arc (1-based)
    over_edge_at: Dict[int, int] = {}    # under enter dart -> over edge index
    edge_of_enter: Dict[int, int] = {}
    for e in edges:
        for enter, _exit in e.passes:
            edge_of_enter[enter] = e.index
    for e in edges:
        for enter, _exit in e.passes:
            if not d.is_under(enter):
                continue
            cand_pos = sigma[enter]
            cand_neg = sigma[sigma[sigma[enter]]]
            if cand_pos in pass_arc_before:
                over_enter, sign = cand_pos, 1
            elif cand_neg in pass_arc_before:
                over_enter, sign = cand_neg, -1
            else:
                raise DiagramError("inconsistent strand structure at a crossing")
            crossing_sign[enter] = sign
            o = pass_arc_before[over_enter] + 1
            over_arc_at[enter] = o
            over_edge_at[enter] = edge_of_enter[over_enter]
            a_in = pass_arc_before[enter] + 1
            a_out = pass_arc_after[enter] + 1
            relators.append(free_reduce((-a_out, -sign * o, a_in, sign * o)))

    # --- vertex relators -------------------------------------------------
    endpoint: Dict[int, Tuple[int, int]] = {}  # trivalent dart -> (arc, sign)
    for e in edges:
        if e.closed:
            continue
        endpoint[e.start] = (edge_arcs[e.index][0] + 1, -1)   # oriented outward
        endpoint[e.end] = (edge_arcs[e.index][-1] + 1, +1)    # oriented inward
    for cyc in d.map.vertices():
        if len(cyc) != 3:
            continue
        word = tuple(endpoint[dart][1] * endpoint[dart][0] for dart in cyc)
        relators.append(free_reduce(word))

    pres = Presentation(arc_count, tuple(relators))

    # --- peripheral system ------------------------------------------------
    meridians = tuple((edge_arcs[e.index][0] + 1,) for e in edges)

    longitudes: List[Word] = []
    for cycle in _handle_cycles(d, edges):
        dirs = {eidx: direction for eidx, direction in cycle}
        word: List[int] = []
        self_writhe = 0
        for eidx, direction in cycle:
            e = edges[eidx]
            part: List[int] = []
            for enter, _exit in e.passes:
                if not d.is_under(enter):
                    continue
                part.append(crossing_sign[enter] * over_arc_at[enter])
                over_edge = over_edge_at[enter]
                if over_edge in dirs:
                    self_writhe += (crossing_sign[enter]
                                    * dirs[e.index] * dirs[over_edge])
            if direction < 0:
                part = list(invert_word(tuple(part)))
            word.extend(part)
        base = edge_arcs[cycle[0][0]][0] + 1
        if self_writhe > 0:
            word.extend([-base] * self_writhe)
        else:
            word.extend([base] * (-self_writhe))
        longitudes.append(free_reduce(tuple(word)))

    if d.circles:
        # loose circles: one free generator each, trivial longitude
        extra = tuple((arc_count + i + 1,) for i in range(d.circles))
        pres = Presentation(arc_count + d.circles, pres.relators)
        meridians = meridians + extra
        longitudes.extend(() for _ in range(d.circles))

    return pres, PeripheralSystem(meridians, tuple(longitudes))


Cycle = Tuple[Tuple[int, int], ...]   # ((edge index, +-1 direction), ...)


def _handle_cycles(d: Diagram, edges: Sequence[SpineEdge]) -> List[Cycle]:
    """Cycle basis of the spine graph as (edge, direction) sequences.

    Closed strands are their own handles.  Open edges span a multigraph on
    the trivalent vertices; each non-tree edge contributes its fundamental
    cycle through a deterministic spanning tree.
    """
    cycles: List[Cycle] = [((e.index, 1),) for e in edges if e.closed]
    open_edges = [e for e in edges if not e.closed]
    if not open_edges:
        return cycles

    vert_of: Dict[int, int] = {}
    for vid, cyc in enumerate(d.map.vertices()):
        if len(cyc) == 3:
            for dart in cyc:
                vert_of[dart] = vid
    nverts = 1 + max(vert_of.values())

    adj: Dict[int, List[Tuple[int, int, int]]] = {v: [] for v in range(nverts)}
    for e in open_edges:
        u, v = vert_of[e.start], vert_of[e.end]
        adj[u].append((v, e.index, +1))
        adj[v].append((u, e.index, -1))

    parent: Dict[int, Tuple[int, int, int]] = {}  # vertex -> (pvert, edge, dir)
    tree: Set[int] = set()
    visited: Set[int] = set()
    for root in range(nverts):
        if root in visited:
            continue
        visited.add(root)
        queue = [root]
        while queue:
            u = queue.pop(0)
            for v, eidx, direction in sorted(adj[u], key=lambda t: t[1]):
                if v not in visited:
                    visited.add(v)
                    parent[v] = (u, eidx, direction)
                    tree.add(eidx)
                    queue.append(v)

    def tree_path(v: int) -> List[Tuple[int, int]]:
        """Path v -> root as (edge, direction-of-travel-towards-root)."""
        out: List[Tuple[int, int]] = []
        while v in parent:
            pvert, eidx, direction = parent[v]
            out.append((eidx, -direction))
            v = pvert
        return out

    for e in open_edges:
        if e.index in tree:
            continue
        u, v = vert_of[e.start], vert_of[e.end]
        pu = tree_path(u)
        pv = tree_path(v)
        while pu and pv and pu[-1] == pv[-1]:
            pu.pop()
            pv.pop()
        cyc: List[Tuple[int, int]] = [(e.index, +1)]
        cyc.extend(pv)                                     # v -> meeting point
        cyc.extend((eidx, -direction) for eidx, direction in reversed(pu))
        cycles.append(tuple(cyc))
    return cycles


# ============================================================
# Tietze simplification
# ============================================================


@dataclass(frozen=True)
class TietzeResult:
    presentation: Presentation
    words: Tuple[Word, ...]
    exhausted: bool


def substitute(word: Sequence[int], gen: int, replacement: Word) -> Word:
    """Replace generator ``gen`` (1-based) by ``replacement`` everywhere."""
    out: List[int] = []
    for letter in word:
        if letter == gen:
            out.extend(replacement)
        elif letter == -gen:
            out.extend(invert_word(replacement))
        else:
            out.append(letter)
    return free_reduce(out)


def _cleanup(relators: List[Word]) -> List[Word]:
    seen: Set[Word] = set()
    out: List[Word] = []
    for rel in relators:
        red = cyclic_reduce(rel)
        if not red:
            continue
        key = canonical_relator(red)
        if key not in seen:
            seen.add(key)
            out.append(red)
    out.sort(key=lambda w: (len(w), w))
    return out


def tietze_simplify(p: Presentation, words: Sequence[Word] = (),
                    max_total_length: int = 100_000) -> TietzeResult:
    """Eliminate generators defined by a relator, deterministically.

    At each step the shortest relator containing a generator exactly once
    (ties by relator then generator order) defines that generator; it is
    substituted everywhere and dropped.  ``words`` are carried through the
    same substitutions.  Stops with ``exhausted=True`` when the total relator
    length would exceed the budget.
    """
    relators = _cleanup(list(p.relators))
    carried = [free_reduce(w) for w in words]
    n = p.n_gens

    while True:
        best: Optional[Tuple[int, int, int]] = None  # (len, relator idx, gen)
        for ri, rel in enumerate(relators):
            counts: Dict[int, int] = {}
            for letter in rel:
                counts[abs(letter)] = counts.get(abs(letter), 0) + 1
            for gen, cnt in sorted(counts.items()):
                if cnt == 1:
                    cand = (len(rel), ri, gen)
                    if best is None or cand < best:
                        best = cand
                    break
        if best is None:
            break
        _len, ri, gen = best
        rel = relators[ri]
        k = next(i for i, letter in enumerate(rel) if abs(letter) == gen)
        u, v = rel[:k], rel[k + 1:]
        # u x^e v = 1  =>  x^e = u^-1 v^-1
        repl = free_reduce(invert_word(u) + invert_word(v))
        if rel[k] < 0:
            repl = invert_word(repl)

        new_relators = [substitute(r, gen, repl)
                        for i, r in enumerate(relators) if i != ri]
        new_words = [substitute(w, gen, repl) for w in carried]
        if sum(len(r) for r in new_relators) > max_total_length:
            return TietzeResult(Presentation(n, tuple(relators)),
                                tuple(carried), True)

        def renumber(word: Word) -> Word:
            return tuple(letter - (1 if letter > gen else 0)
                         if letter > 0 else
                         letter + (1 if -letter > gen else 0)
                         for letter in word)

        relators = _cleanup([renumber(r) for r in new_relators])
        carried = [renumber(w) for w in new_words]
        n -= 1

    return TietzeResult(Presentation(n, tuple(relators)), tuple(carried), False)


def rank_upper_bound(p: Presentation) -> int:
    """Generator count after simplification; an upper bound for the rank."""
    return tietze_simplify(p).presentation.n_gens


# ============================================================
# Abelianization
# ============================================================


def _smith_diagonal(rows: List[List[int]]) -> List[int]:
    """Diagonal of the Smith normal form of a small integer matrix."""
    a = [row[:] for row in rows]
    m = len(a)
    n = len(a[0]) if a else 0
    diag: List[int] = []
    t = 0
    while t < m and t < n:
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (pivot is None or
                                abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        a[t], a[pi] = a[pi], a[t]
        for row in a:
            row[t], row[pj] = row[pj], row[t]
        while True:
            changed = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        changed = True
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    for i in range(m):
                        a[i][j] -= q * a[i][t]
                    if a[t][j]:
                        for i in range(m):
                            a[i][t], a[i][j] = a[i][j], a[i][t]
                        changed = True
            if not changed:
                break
        piv = abs(a[t][t])
        fix = False
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % piv:
                    a[t] = [x + y for x, y in zip(a[t], a[i])]
                    fix = True
                    break
            if fix:
                break
        if fix:
            continue
        diag.append(piv)
        t += 1
    return diag


def abelianization(p: Presentation) -> Tuple[int, List[int]]:
    """(free rank, torsion coefficients > 1) of the abelianized group."""
    if not p.relators:
        return p.n_gens, []
    rows = []
    for rel in p.relators:
        row = [0] * p.n_gens
        for letter in rel:
            row[abs(letter) - 1] += 1 if letter > 0 else -1
        rows.append(row)
    diag = _smith_diagonal(rows)
    nonzero = [x for x in diag if x != 0]
    free_rank = p.n_gens - len(nonzero)
    torsion = [x for x in nonzero if x > 1]
    return free_rank, torsion


# ============================================================
# Canonical key (used to cache invariant values across diagrams)
# ============================================================


def presentation_key(p: Presentation) -> Tuple:
    """A key equal for presentations differing by generator relabelling.

    For <= 6 generators the exact minimum over relabellings is taken;
    beyond that the sorted canonical relators are used as-is (still sound
    for caching, merely fewer collisions).
    """
    from itertools import permutations as _perms

    base = tuple(sorted(canonical_relator(r) for r in p.relators))
    if p.n_gens > 6:
        return (p.n_gens, base)
    best = None
    for perm in _perms(range(1, p.n_gens + 1)):
        mapped = []
        for rel in p.relators:
            mapped.append(canonical_relator(tuple(
                perm[letter - 1] if letter > 0 else -perm[-letter - 1]
                for letter in rel)))
        cand = tuple(sorted(mapped))
        if best is None or cand < best:
            best = cand
    return (p.n_gens, best)

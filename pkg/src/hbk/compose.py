"""Composite candidate diagrams: 2-sums (prime factors on a base graph) and
1-sums (bridge-joined genus-one handlebody-knots).

Both constructions are purely combinatorial splices.  A 2-sum cuts one map
edge of the base and one of the knot and cross-joins the four loose darts;
a 1-sum inserts a trivalent vertex on one edge of each operand and joins
them by a new bar edge (a bridge).  Crossing counts add by construction.

Orientation and chirality options are over-generated and deduplicated by
canonical code; the classification stage collapses what invertibility and
mirror symmetry identify.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import catalog
from .diagrams import Diagram, spine_edges
from .maps import CombinatorialMap


class ComposeError(ValueError):
    """Invalid sum sites or operands."""


@dataclass(frozen=True)
class SumSpec:
    kind: str                 # "one_sum" | "two_sum"
    left: str
    right: str
    site: int = 0
    orientation: int = 0
    left_mirrored: bool = False
    right_mirrored: bool = False

    def tags(self) -> Dict[str, object]:
        return {"sum": self.kind, "left": self.left, "right": self.right,
                "site": self.site, "orientation": self.orientation,
                "left_mirrored": self.left_mirrored,
                "right_mirrored": self.right_mirrored}


def _shift(d: Diagram, offset: int) -> Tuple[List[int], List[int], List[int]]:
    n = d.map.n_darts
    sigma = [0] * (offset + n + 1)
    alpha = [0] * (offset + n + 1)
    for k in range(1, n + 1):
        sigma[offset + k] = offset + d.map.sigma[k]
        alpha[offset + k] = offset + d.map.alpha[k]
    under = [offset + u for u in d.under]
    return sigma, alpha, under


def _merge(a: Diagram, b: Diagram) -> Tuple[List[int], List[int], List[int], int]:
    """Disjoint union arrays (1-indexed), b's darts shifted past a's."""
    na = a.map.n_darts
    sa, aa, ua = _shift(a, 0)
    sb, ab, ub = _shift(b, na)
    sigma = sa + sb[na + 1:]
    alpha = aa + ab[na + 1:]
    return sigma, alpha, ua + ub, na


def _site_edge(d: Diagram, site: int) -> Tuple[int, int]:
    """The first map edge of the chosen spine edge, as a dart pair."""
    edges = spine_edges(d)
    if not 0 <= site < len(edges):
        raise ComposeError(f"site {site} out of range (diagram has "
                           f"{len(edges)} spine edges)")
    start = edges[site].start
    return start, d.map.alpha[start]


def two_sum(base: Diagram, knot: Diagram, site: int = 0,
            orientation: int = 0) -> Diagram:
    """Splice ``knot`` into the chosen spine edge of ``base``.

    The knot must be a one-component knot diagram (no trivalent vertices);
    the base a genus-two spatial-graph diagram.  ``orientation`` picks one
    of the two ways of joining the cut ends.
    """
    if knot.map.n_darts == 0 or any(len(c) == 3 for c in knot.map.vertices()):
        raise ComposeError("second operand must be a knot diagram with crossings")
    if knot.component_count() != 1:
        raise ComposeError("second operand must have one component")
    x, y = _site_edge(base, site)
    d2v = base.map.dart_vertex()
    verts = base.map.vertices()
    if d2v[x] == d2v[y] and len(verts[d2v[x]]) == 4:
        raise ComposeError("loop site")

    # cut the knot at its minimal map edge
    u = 1
    v = knot.map.alpha[u]

    sigma, alpha, under, off = _merge(base, knot)
    uu, vv = off + u, off + v
    if orientation == 0:
        pairs = ((x, uu), (y, vv))
    else:
        pairs = ((x, vv), (y, uu))
    for p, q in pairs:
        alpha[p] = q
        alpha[q] = p
    return Diagram(CombinatorialMap(tuple(sigma), tuple(alpha)),
                   frozenset(under), base.circles)


def splice_knots(a: Diagram, b: Diagram, orientation: int = 0) -> Diagram:
    """Connected sum of two knot diagrams (cut one edge of each, cross-join)."""
    for k in (a, b):
        if k.map.n_darts == 0 or any(len(c) == 3 for c in k.map.vertices()):
            raise ComposeError("knot connected sum needs knot diagrams")
    x, y = 1, a.map.alpha[1]
    u, v = 1, b.map.alpha[1]
    sigma, alpha, under, off = _merge(a, b)
    uu, vv = off + u, off + v
    if orientation == 0:
        pairs = ((x, uu), (y, vv))
    else:
        pairs = ((x, vv), (y, uu))
    for p, q in pairs:
        alpha[p] = q
        alpha[q] = p
    return Diagram(CombinatorialMap(tuple(sigma), tuple(alpha)),
                   frozenset(under))


def _insert_vertex(sigma: List[int], alpha: List[int], x: int, y: int,
                   next_dart: int) -> Tuple[int, int]:
    """Subdivide edge (x, y) by a trivalent vertex; return (bar dart, next)."""
    p, q, r = next_dart + 1, next_dart + 2, next_dart + 3
    for extra in (0, 0, 0):
        sigma.append(0)
        alpha.append(0)
    sigma[p], sigma[q], sigma[r] = q, r, p
    alpha[x] = p
    alpha[p] = x
    alpha[q] = y
    alpha[y] = q
    return r, next_dart + 3


def one_sum(left: Diagram, right: Diagram, site_left: int = 0,
            site_right: int = 0) -> Diagram:
    """Join two genus-one diagrams by a bridge between new trivalent vertices.

    The right operand may be the crossingless unknot, giving a trivial
    handle (a loop at the new vertex).
    """
    if any(len(c) == 3 for c in left.map.vertices()):
        raise ComposeError("one_sum operands must be genus-one diagrams")
    if left.map.n_darts == 0:
        raise ComposeError("left operand must have at least one crossing")

    if right.map.n_darts == 0:
        if right.circles != 1:
            raise ComposeError("trivial operand must be a single circle")
        x, y = _site_edge(left, site_left)
        sigma = list(left.map.sigma)
        alpha = list(left.map.alpha)
        bar1, nxt = _insert_vertex(sigma, alpha, x, y, left.map.n_darts)
        # second vertex carries a loop
        p, q, r = nxt + 1, nxt + 2, nxt + 3
        sigma.extend([0, 0, 0])
        alpha.extend([0, 0, 0])
        sigma[p], sigma[q], sigma[r] = q, r, p
        alpha[bar1] = p
        alpha[p] = bar1
        alpha[q] = r
        alpha[r] = q
        return Diagram(CombinatorialMap(tuple(sigma), tuple(alpha)),
                       left.under, left.circles)

    if any(len(c) == 3 for c in right.map.vertices()):
        raise ComposeError("one_sum operands must be genus-one diagrams")
    x, y = _site_edge(left, site_left)
    u0, v0 = _site_edge(right, site_right)
    sigma, alpha, under, off = _merge(left, right)
    bar1, nxt = _insert_vertex(sigma, alpha, x, y, len(sigma) - 1)
    bar2, _ = _insert_vertex(sigma, alpha, off + u0, off + v0, nxt)
    alpha[bar1] = bar2
    alpha[bar2] = bar1
    return Diagram(CombinatorialMap(tuple(sigma), tuple(alpha)),
                   frozenset(under), left.circles + right.circles)


def find_bridge(d: Diagram) -> Optional[Tuple[int, int]]:
    """The unique bridge edge of a 1-sum output (None if no bridge)."""
    from .maps import edge_connectivity

    m = d.map
    d2v = m.dart_vertex()
    bridges = []
    for dart in range(1, m.n_darts + 1):
        mate = m.alpha[dart]
        if dart > mate:
            continue
        # remove the edge, test connectivity of the dart graph
        seen = {dart}
        stack = [dart]
        reach_mate = False
        while stack and not reach_mate:
            uu = stack.pop()
            nbrs = [m.sigma[uu]]
            if not (uu == dart and m.alpha[uu] == mate) and \
               not (uu == mate and m.alpha[uu] == dart):
                nbrs.append(m.alpha[uu])
            for w in nbrs:
                if w == mate:
                    reach_mate = True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if not reach_mate:
            bridges.append((dart, mate))
    if len(bridges) == 1:
        return bridges[0]
    return None


# ============================================================
# Candidate generation
# ============================================================


def _mirror_variants(name: str, d: Diagram) -> List[Tuple[str, bool, Diagram]]:
    out = [(name, False, d)]
    mir = d.mirror()
    from .diagrams import diagrams_equal
    if not diagrams_equal(d, mir):
        out.append((name, True, mir))
    return out


def generate_connectivity2_candidates(target: int = 7
                                      ) -> List[Tuple[Diagram, SumSpec]]:
    """2-sums of a base graph and a prime knot totalling ``target`` crossings.

    Variants: splice site (an arc of the base) and knot chirality, at most
    six per (base, knot) pair.  Base mirroring is omitted because the
    classification works up to mirror image, and the second splice
    orientation because prime knots up to five crossings are invertible;
    both would only add equivalent handlebody-knots.
    """
    out: List[Tuple[Diagram, SumSpec]] = []
    seen = set()
    for base_name in catalog.BASE_GRAPH_NAMES:
        cb = catalog.BASE_GRAPH_CROSSINGS[base_name]
        base = None
        for knot_name in sorted(catalog.PRIME_KNOTS):
            ck = sum(catalog.PRIME_KNOTS[knot_name])
            if cb + ck != target:
                continue
            if base is None:
                base = catalog.base_graph(base_name)
            knot0 = catalog.prime_knot(knot_name)
            for kname, kmir, knot in _mirror_variants(knot_name, knot0):
                for site in range(len(spine_edges(base))):
                    try:
                        d = two_sum(base, knot, site, 0)
                    except ComposeError:
                        continue
                    key = d.canonical_key()
                    if key in seen:
                        continue
                    seen.add(key)
                    spec = SumSpec("two_sum", base_name, kname, site,
                                   0, False, kmir)
                    out.append((d, spec))
    return out


def _genus_one_operands(max_crossings: int
                        ) -> List[Tuple[str, int, Diagram]]:
    """Genus-one handlebody-knots as knots: trivial, prime, and composite."""
    ops: List[Tuple[str, int, Diagram]] = [("0_1", 0, Diagram.unknot())]
    for name in sorted(catalog.PRIME_KNOTS):
        c = sum(catalog.PRIME_KNOTS[name])
        if c <= max_crossings:
            ops.append((name, c, catalog.prime_knot(name)))
    # composite knots: sums of two primes (crossing numbers add for these
    # alternating summands); chirality variants are distinct knots
    primes = [(n, sum(catalog.PRIME_KNOTS[n])) for n in sorted(catalog.PRIME_KNOTS)]
    for i, (n1, c1) in enumerate(primes):
        for n2, c2 in primes[i:]:
            if c1 + c2 > max_crossings:
                continue
            k1v = _mirror_variants(n1, catalog.prime_knot(n1))
            k2v = _mirror_variants(n2, catalog.prime_knot(n2))
            seen = set()
            for _, m1, k1 in k1v:
                for _, m2, k2 in k2v:
                    d = splice_knots(k1, k2)
                    key = d.canonical_key(up_to_mirror=True)
                    if key in seen:
                        continue
                    seen.add(key)
                    label = f"{n1}{'m' if m1 else ''}#{n2}{'m' if m2 else ''}"
                    ops.append((label, c1 + c2, d))
    return ops


def generate_connectivity1_candidates(target: int = 7
                                      ) -> List[Tuple[Diagram, SumSpec]]:
    """All 1-sums of genus-one handlebody-knots totalling ``target``
    crossings, operand chiralities over-generated, deduplicated."""
    ops = _genus_one_operands(target)
    out: List[Tuple[Diagram, SumSpec]] = []
    seen = set()
    for i, (n1, c1, d1) in enumerate(ops):
        for n2, c2, d2 in ops[i:]:
            if c1 + c2 != target:
                continue
            if c1 == 0 and c2 == 0:
                continue
            left, right = (d1, d2) if c1 >= c2 else (d2, d1)
            lname, rname = (n1, n2) if c1 >= c2 else (n2, n1)
            # the left operand's chirality is absorbed by the up-to-mirror
            # classification; the right operand's is relative and kept
            for _, rm, rv in (_mirror_variants(rname, right)
                              if right.map.n_darts else
                              [(rname, False, right)]):
                d = one_sum(left, rv)
                key = d.canonical_key()
                if key in seen:
                    continue
                seen.add(key)
                spec = SumSpec("one_sum", lname, rname, right_mirrored=rm)
                out.append((d, spec))
    return out

"""Genus-zero combinatorial maps: plane multigraphs encoded by dart permutations.

A map is stored as a pair of permutations on the dart set {1, .., n}
(index 0 is a dummy so arrays can be 1-indexed):

    sigma : vertex rotation; each cycle lists the darts around one vertex
            in counterclockwise order,
    alpha : fixed-point-free involution pairing darts into edges.

The face permutation is phi = sigma o alpha.  A connected map is spherical
(genus 0) iff V - E + F = 2.

This module provides

  * :class:`CombinatorialMap` with validity checks and a text codec,
  * canonical codes (lexicographically minimal traversal relabelling),
  * edge connectivity of the underlying multigraph,
  * :func:`enumerate_maps`, the generator of all 3-edge-connected spherical
    maps with two trivalent and ``n4`` quadrivalent vertices, one
    representative per isomorphism class (optionally per mirror pair),
  * :func:`enumerate_maps_bruteforce`, an independent oracle that enumerates
    raw rotation systems and filters, used by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple


class MapError(ValueError):
    """Raised for structurally invalid maps or malformed map text."""


# ============================================================
# Permutation helpers (1-indexed, dummy entry at index 0)
# ============================================================


def perm_compose(p: Sequence[int], q: Sequence[int]) -> List[int]:
    """Composition p o q (apply q first), for 1-indexed permutations."""
    n = len(p) - 1
    return [0] + [p[q[i]] for i in range(1, n + 1)]


def perm_invert(p: Sequence[int]) -> List[int]:
    """Inverse of a 1-indexed permutation."""
    n = len(p) - 1
    inv = [0] * (n + 1)
    for i in range(1, n + 1):
        inv[p[i]] = i
    return inv


def perm_cycles(p: Sequence[int]) -> List[List[int]]:
    """Cycle decomposition; each cycle starts at its minimum, cycles sorted."""
    n = len(p) - 1
    seen = [False] * (n + 1)
    cycles: List[List[int]] = []
    for i in range(1, n + 1):
        if seen[i]:
            continue
        cur: List[int] = []
        j = i
        while not seen[j]:
            seen[j] = True
            cur.append(j)
            j = p[j]
        cycles.append(cur)
    cycles.sort(key=lambda c: c[0])
    return cycles


def perm_num_cycles(p: Sequence[int]) -> int:
    """Number of cycles of a 1-indexed permutation."""
    n = len(p) - 1
    seen = [False] * (n + 1)
    cnt = 0
    for i in range(1, n + 1):
        if not seen[i]:
            cnt += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
    return cnt


def _cycles_str(cycles: Sequence[Sequence[int]]) -> str:
    return "".join("(" + ",".join(str(x) for x in c) + ")" for c in cycles)


# ============================================================
# CombinatorialMap
# ============================================================


@dataclass(frozen=True)
class CombinatorialMap:
    """Immutable map given by rotation ``sigma`` and edge involution ``alpha``.

    Both permutations are stored as tuples of images of 1..n with a dummy
    0 at index 0.  Vertices are the sigma-cycles, edges the alpha-pairs,
    faces the cycles of sigma o alpha.
    """

    sigma: Tuple[int, ...]
    alpha: Tuple[int, ...]

    def __post_init__(self):
        n = self.n_darts
        if len(self.alpha) != n + 1:
            raise MapError("sigma and alpha must act on the same darts")
        for d in range(1, n + 1):
            a = self.alpha[d]
            if a == d:
                raise MapError(f"alpha has a fixed point at dart {d}")
            if not 1 <= a <= n or self.alpha[a] != d:
                raise MapError(f"alpha is not an involution at dart {d}")
        img = set(self.sigma[1:])
        if img != set(range(1, n + 1)):
            raise MapError("sigma is not a permutation")

    @property
    def n_darts(self) -> int:
        return len(self.sigma) - 1

    @staticmethod
    def from_cycles(vertex_cycles: Sequence[Sequence[int]],
                    edge_pairs: Sequence[Tuple[int, int]]) -> "CombinatorialMap":
        """Build a map from explicit vertex rotations and edge pairs."""
        n = sum(len(c) for c in vertex_cycles)
        sigma = [0] * (n + 1)
        for cyc in vertex_cycles:
            for i, d in enumerate(cyc):
                if not 1 <= d <= n or sigma[d]:
                    raise MapError(f"bad or repeated dart {d} in vertex cycles")
                sigma[d] = cyc[(i + 1) % len(cyc)]
        alpha = [0] * (n + 1)
        for a, b in edge_pairs:
            if not (1 <= a <= n and 1 <= b <= n) or alpha[a] or alpha[b]:
                raise MapError(f"bad or repeated dart in edge pair ({a},{b})")
            alpha[a], alpha[b] = b, a
        return CombinatorialMap(tuple(sigma), tuple(alpha))

    # ---------------- basic structure ----------------

    def vertices(self) -> List[List[int]]:
        return perm_cycles(self.sigma)

    def n_vertices(self) -> int:
        return perm_num_cycles(self.sigma)

    def n_edges(self) -> int:
        return self.n_darts // 2

    def faces(self) -> List[List[int]]:
        return perm_cycles(perm_compose(self.sigma, self.alpha))

    def n_faces(self) -> int:
        return perm_num_cycles(perm_compose(self.sigma, self.alpha))

    def dart_vertex(self) -> List[int]:
        """dart -> vertex index (0-based, vertices ordered by minimal dart)."""
        d2v = [-1] * (self.n_darts + 1)
        for vid, cyc in enumerate(self.vertices()):
            for d in cyc:
                d2v[d] = vid
        return d2v

    def degree_counts(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for cyc in self.vertices():
            out[len(cyc)] = out.get(len(cyc), 0) + 1
        return out

    def is_connected(self) -> bool:
        n = self.n_darts
        if n == 0:
            return True
        seen = [False] * (n + 1)
        stack = [1]
        seen[1] = True
        while stack:
            u = stack.pop()
            for v in (self.sigma[u], self.alpha[u]):
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen[1:])

    def connected_components(self) -> List[List[int]]:
        """Partition of darts into connected components (each sorted)."""
        n = self.n_darts
        seen = [False] * (n + 1)
        comps: List[List[int]] = []
        for s in range(1, n + 1):
            if seen[s]:
                continue
            comp = []
            stack = [s]
            seen[s] = True
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in (self.sigma[u], self.alpha[u]):
                    if not seen[v]:
                        seen[v] = True
                        stack.append(v)
            comp.sort()
            comps.append(comp)
        return comps

    def is_spherical(self) -> bool:
        """Euler test V - E + F = 2 per connected component."""
        ncomp = len(self.connected_components())
        chi = self.n_vertices() - self.n_edges() + self.n_faces()
        return chi == 2 * ncomp

    def validate(self, degrees: Tuple[int, ...] = (3, 4)) -> None:
        """Raise MapError unless all vertex degrees are allowed and genus is 0."""
        for cyc in self.vertices():
            if len(cyc) not in degrees:
                raise MapError(f"vertex of degree {len(cyc)} not allowed")
        if not self.is_spherical():
            raise MapError("map is not spherical (genus > 0)")

    def mirror(self) -> "CombinatorialMap":
        """The mirror map: reverse every vertex rotation."""
        return CombinatorialMap(tuple(perm_invert(self.sigma)), self.alpha)

    def relabel(self, perm: Sequence[int]) -> "CombinatorialMap":
        """Relabel darts by ``perm`` (1-indexed image list)."""
        n = self.n_darts
        sigma = [0] * (n + 1)
        alpha = [0] * (n + 1)
        for d in range(1, n + 1):
            sigma[perm[d]] = perm[self.sigma[d]]
            alpha[perm[d]] = perm[self.alpha[d]]
        return CombinatorialMap(tuple(sigma), tuple(alpha))

    # ---------------- text codec ----------------

    def to_text(self) -> str:
        """One-line text form ``M <n> sigma:<cycles> alpha:<pairs>``."""
        pairs = [(d, self.alpha[d]) for d in range(1, self.n_darts + 1)
                 if d < self.alpha[d]]
        return "M {} sigma:{} alpha:{}".format(
            self.n_darts,
            _cycles_str(self.vertices()),
            _cycles_str(pairs))

    @staticmethod
    def from_text(line: str) -> "CombinatorialMap":
        parts = line.split()
        if len(parts) != 4 or parts[0] != "M":
            raise MapError(f"malformed map line: {line!r}")
        try:
            n = int(parts[1])
        except ValueError:
            raise MapError(f"malformed dart count in: {line!r}") from None
        if not parts[2].startswith("sigma:") or not parts[3].startswith("alpha:"):
            raise MapError(f"malformed map line: {line!r}")
        vcycles = _parse_cycles(parts[2][len("sigma:"):])
        apairs = _parse_cycles(parts[3][len("alpha:"):])
        if sum(len(c) for c in vcycles) != n:
            raise MapError(f"dart count mismatch in: {line!r}")
        for p in apairs:
            if len(p) != 2:
                raise MapError(f"alpha cycle of length != 2 in: {line!r}")
        return CombinatorialMap.from_cycles(vcycles, [(p[0], p[1]) for p in apairs])


def _parse_cycles(text: str) -> List[List[int]]:
    if not text.startswith("(") or not text.endswith(")"):
        raise MapError(f"malformed cycle list: {text!r}")
    out = []
    for chunk in text[1:-1].split(")("):
        try:
            out.append([int(x) for x in chunk.split(",")])
        except ValueError:
            raise MapError(f"malformed cycle list: {text!r}") from None
    return out


# ============================================================
# Canonical codes
# ============================================================


@dataclass(frozen=True)
class CanonicalCode:
    """Canonical form of a map: equal codes iff isomorphic oriented maps.

    ``chiral_flag`` is True when the map is isomorphic to its own mirror
    (the oriented code equals the mirror code).
    """

    code: Tuple[int, ...]
    mirror_code: Tuple[int, ...]

    @property
    def chiral_flag(self) -> bool:
        return self.code == self.mirror_code

    def key(self, up_to_mirror: bool) -> Tuple[int, ...]:
        return min(self.code, self.mirror_code) if up_to_mirror else self.code


def _code_from_root(sigma: Sequence[int], alpha: Sequence[int], root: int) -> Tuple[int, ...]:
    """Relabel darts by BFS from ``root`` (sigma first, then alpha) and flatten."""
    n = len(sigma) - 1
    new = [0] * (n + 1)          # old dart -> new label
    order = [0] * (n + 1)        # new label -> old dart
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
    return tuple(out)


def _min_code(sigma: Sequence[int], alpha: Sequence[int],
              roots: Sequence[int]) -> Tuple[int, ...]:
    best: Optional[Tuple[int, ...]] = None
    for r in roots:
        code = _code_from_root(sigma, alpha, r)
        if best is None or code < best:
            best = code
    assert best is not None
    return best


def _root_candidates(m: CombinatorialMap) -> List[int]:
    """Darts at vertices of minimal degree; an isomorphism-invariant root set."""
    verts = m.vertices()
    mindeg = min(len(c) for c in verts)
    return [d for c in verts if len(c) == mindeg for d in c]


def canonical_code(m: CombinatorialMap) -> CanonicalCode:
    """Canonical code over all minimal-degree roots, plus its mirror variant."""
    comps = m.connected_components()
    if len(comps) == 1:
        roots = _root_candidates(m)
        code = _min_code(m.sigma, m.alpha, roots)
        mcode = _min_code(perm_invert(m.sigma), m.alpha, roots)
        return CanonicalCode(code, mcode)
    # disconnected: concatenate sorted per-component codes
    subcodes = []
    for comp in comps:
        sub = _submap(m, comp)
        roots = _root_candidates(sub)
        subcodes.append((_min_code(sub.sigma, sub.alpha, roots),
                         _min_code(perm_invert(sub.sigma), sub.alpha, roots)))
    code = tuple(x for c, _ in sorted(subcodes) for x in c)
    mcode = tuple(x for _, mc in sorted(subcodes, key=lambda t: t[1]) for x in mc)
    return CanonicalCode(code, mcode)


def _submap(m: CombinatorialMap, darts: Sequence[int]) -> CombinatorialMap:
    relabel = {d: i for i, d in enumerate(sorted(darts), start=1)}
    n = len(darts)
    sigma = [0] * (n + 1)
    alpha = [0] * (n + 1)
    for d in darts:
        sigma[relabel[d]] = relabel[m.sigma[d]]
        alpha[relabel[d]] = relabel[m.alpha[d]]
    return CombinatorialMap(tuple(sigma), tuple(alpha))


def maps_isomorphic(a: CombinatorialMap, b: CombinatorialMap,
                    up_to_mirror: bool = False) -> bool:
    ca, cb = canonical_code(a), canonical_code(b)
    if up_to_mirror:
        return ca.key(True) == cb.key(True)
    return ca.code == cb.code


# ============================================================
# Edge connectivity
# ============================================================


def _capacity_matrix(m: CombinatorialMap) -> Tuple[int, List[List[int]]]:
    d2v = m.dart_vertex()
    nv = m.n_vertices()
    cap = [[0] * nv for _ in range(nv)]
    for d in range(1, m.n_darts + 1):
        e = m.alpha[d]
        if d < e:
            u, v = d2v[d], d2v[e]
            if u != v:  # loops never count toward any cut
                cap[u][v] += 1
                cap[v][u] += 1
    return nv, cap


def _max_flow(cap: List[List[int]], s: int, t: int) -> int:
    """Edmonds-Karp on a tiny dense capacity matrix."""
    n = len(cap)
    res = [row[:] for row in cap]
    flow = 0
    while True:
        parent = [-1] * n
        parent[s] = s
        queue = [s]
        head = 0
        while head < len(queue) and parent[t] == -1:
            u = queue[head]
            head += 1
            for v in range(n):
                if parent[v] == -1 and res[u][v] > 0:
                    parent[v] = u
                    queue.append(v)
        if parent[t] == -1:
            return flow
        aug = None
        v = t
        while v != s:
            u = parent[v]
            aug = res[u][v] if aug is None else min(aug, res[u][v])
            v = u
        v = t
        while v != s:
            u = parent[v]
            res[u][v] -= aug
            res[v][u] += aug
            v = u
        flow += aug


def edge_connectivity(m: CombinatorialMap) -> int:
    """Minimum edge-cut size of the underlying multigraph (loops ignored)."""
    if not m.is_connected():
        raise MapError("disconnected map")
    nv, cap = _capacity_matrix(m)
    if nv == 1:
        # single vertex, only loops: no cut disconnects it
        return sum(1 for d in range(1, m.n_darts + 1) if d < m.alpha[d])
    best = None
    for t in range(1, nv):
        f = _max_flow(cap, 0, t)
        if best is None or f < best:
            best = f
            if best == 0:
                break
    return best


def edge_connectivity_bruteforce(m: CombinatorialMap) -> int:
    """Test oracle: try deleting every edge subset in increasing size."""
    from itertools import combinations

    if not m.is_connected():
        raise MapError("disconnected map")
    d2v = m.dart_vertex()
    nv = m.n_vertices()
    edges = [(d2v[d], d2v[m.alpha[d]]) for d in range(1, m.n_darts + 1)
             if d < m.alpha[d] and d2v[d] != d2v[m.alpha[d]]]

    def connected_without(removed: Set[int]) -> bool:
        adj = [[] for _ in range(nv)]
        for i, (u, v) in enumerate(edges):
            if i not in removed:
                adj[u].append(v)
                adj[v].append(u)
        seen = [False] * nv
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen)

    for k in range(0, len(edges) + 1):
        for combo in combinations(range(len(edges)), k):
            if not connected_without(set(combo)):
                return k
    return len(edges)


# ============================================================
# Enumeration of 3-edge-connected spherical maps
# ============================================================


def has_trivalent_bigon(m: CombinatorialMap) -> bool:
    """True if some bigon face of ``m`` joins a trivalent and a 4-valent vertex.

    Such a bigon is a crossing formed by two legs of a spine vertex with
    nothing in between; a single vertex twist removes it whatever the
    over/under choice, so no minimal diagram lives on such a map.  Bigons
    between the two trivalent vertices (as in the theta graph) carry no
    crossing and are left alone; with any 4-valent vertices present they
    force a 2-edge-cut and die in the connectivity filter anyway.
    """
    deg = [0] * (m.n_darts + 1)
    for cyc in m.vertices():
        for d in cyc:
            deg[d] = len(cyc)
    phi = perm_compose(m.sigma, m.alpha)
    for d in range(1, m.n_darts + 1):
        e = phi[d]
        if e != d and phi[e] == d and deg[d] + deg[e] == 7:
            return True
    return False


def enumerate_maps(n3: int, n4: int, up_to_mirror: bool = True,
                   min_edge_connectivity: int = 3,
                   drop_vertex_bigons: bool = True) -> List[CombinatorialMap]:
    """All 3-edge-connected spherical maps with ``n3`` trivalent and ``n4``
    quadrivalent vertices, one per isomorphism class.

    With ``up_to_mirror`` one representative per mirror pair is kept.  The
    result is sorted by canonical code.  Only ``n3 = 2`` is supported (the
    genus-two trivalent spine case).

    ``drop_vertex_bigons`` (the default) additionally discards maps with a
    bigon face at a trivalent corner; see :func:`has_trivalent_bigon`.  No
    minimal diagram lives on those maps, and (2, 7) then yields exactly the
    908 reference maps.  Pass ``False`` for the raw 3-edge-connected count.

    The generator grows a plane map one edge at a time.  The state keeps, for
    every unpaired dart, its successor on the boundary walk of the face it
    sits in; pairing two darts of the same boundary cycle splits the cycle
    (planar), pairing across cycles would add genus and is never done, so
    every completed map is spherical by construction.  Labels follow the
    traversal order from a trivalent root dart, so each isomorphism class is
    produced once per (automorphism orbit of) root choice and deduplicated by
    canonical code.  Loops are skipped outright: at degrees <= 4 a loop
    forces edge connectivity <= 2.
    """
    if n3 != 2:
        raise MapError("unsupported genus: need exactly 2 trivalent vertices")
    if n4 < 0:
        raise MapError("n4 must be nonnegative")

    n_total = 3 * n3 + 4 * n4
    seen: Dict[Tuple[int, ...], CombinatorialMap] = {}

    sigma = [0] * (n_total + 1)
    alpha = [0] * (n_total + 1)
    bnext = [0] * (n_total + 1)
    bprev = [0] * (n_total + 1)
    dvert = [0] * (n_total + 1)   # dart -> its vertex (first dart of the vertex)

    def attach_vertex(d: int, deg: int, base: int) -> None:
        """Create darts base+1..base+deg, glue base+1 to d, splice the rest."""
        for i in range(1, deg + 1):
            sigma[base + i] = base + i + 1
            dvert[base + i] = base + 1
        sigma[base + deg] = base + 1
        alpha[d] = base + 1
        alpha[base + 1] = d
        nd, pd = bnext[d], bprev[d]
        first, last = base + 2, base + deg
        if nd == d:  # d was alone on its cycle
            bnext[last] = first
            bprev[first] = last
        else:
            bnext[pd] = first
            bprev[first] = pd
            bnext[last] = nd
            bprev[nd] = last
        for i in range(first, last):
            bnext[i] = i + 1
            bprev[i + 1] = i

    def detach_vertex(d: int, deg: int, base: int) -> None:
        first, last = base + 2, base + deg
        nd_last = bnext[last]
        if nd_last == first:  # d was alone
            bnext[d] = d
            bprev[d] = d
        else:
            pd_first = bprev[first]
            bnext[pd_first] = d
            bprev[d] = pd_first
            bnext[d] = nd_last
            bprev[nd_last] = d
        alpha[d] = 0
        for i in range(base + 1, base + deg + 1):
            sigma[i] = 0
            alpha[i] = 0
            dvert[i] = 0

    def glue(d: int, e: int) -> None:
        alpha[d] = e
        alpha[e] = d
        nd, pd = bnext[d], bprev[d]
        ne, pe = bnext[e], bprev[e]
        if nd != e:
            bnext[pe] = nd
            bprev[nd] = pe
        if ne != d:
            bnext[pd] = ne
            bprev[ne] = pd

    def unglue(d: int, e: int, nd: int, pd: int, ne: int, pe: int) -> None:
        alpha[d] = 0
        alpha[e] = 0
        bnext[d], bprev[d] = nd, pd
        bnext[e], bprev[e] = ne, pe
        if nd != e:
            bnext[pe] = e
            bprev[nd] = d
        if ne != d:
            bnext[pd] = d
            bprev[ne] = e

    results: List[CombinatorialMap] = []

    def emit() -> None:
        m = CombinatorialMap(tuple(sigma), tuple(alpha))
        assert m.is_spherical(), "generator produced a non-spherical map"
        if drop_vertex_bigons and has_trivalent_bigon(m):
            return
        if edge_connectivity(m) < min_edge_connectivity:
            return
        cc = canonical_code(m)
        key = cc.key(up_to_mirror)
        if key not in seen:
            seen[key] = m
            results.append(m)

    def rec(next_free: int, n_darts: int, rem3: int, rem4: int) -> None:
        # advance to the smallest unpaired dart
        d = next_free
        while d <= n_darts and alpha[d]:
            d += 1
        if d > n_darts:
            if rem3 == 0 and rem4 == 0:
                emit()
            return
        vid_d = dvert[d]
        # option 1: attach a new vertex of each remaining degree type
        if rem3 > 0:
            attach_vertex(d, 3, n_darts)
            rec(d + 1, n_darts + 3, rem3 - 1, rem4)
            detach_vertex(d, 3, n_darts)
        if rem4 > 0:
            attach_vertex(d, 4, n_darts)
            rec(d + 1, n_darts + 4, rem3, rem4 - 1)
            detach_vertex(d, 4, n_darts)
        # option 2: glue d to another free dart on its own boundary cycle
        e = bnext[d]
        while e != d:
            nxt = bnext[e]
            if dvert[e] != vid_d:  # no loops
                nd, pd = bnext[d], bprev[d]
                ne, pe = bnext[e], bprev[e]
                glue(d, e)
                rec(d + 1, n_darts, rem3, rem4)
                unglue(d, e, nd, pd, ne, pe)
            e = nxt

    # root vertex: always trivalent (present in every map since n3 = 2 > 0)
    for i in (1, 2, 3):
        sigma[i] = i % 3 + 1
        dvert[i] = 1
        bnext[i] = i % 3 + 1
        bprev[i] = (i - 2) % 3 + 1
    rec(1, 3, n3 - 1, n4)

    results.sort(key=lambda m: canonical_code(m).key(up_to_mirror))
    return results


# ============================================================
# Brute-force oracle (independent of the planar-growth generator)
# ============================================================


def _standard_sigma(n3: int, n4: int) -> List[int]:
    sigma = [0] * (3 * n3 + 4 * n4 + 1)
    base = 0
    for deg in [3] * n3 + [4] * n4:
        for i in range(1, deg + 1):
            sigma[base + i] = base + i + 1
        sigma[base + deg] = base + 1
        base += deg
    return sigma


def enumerate_maps_bruteforce(n3: int, n4: int, up_to_mirror: bool = True,
                              min_edge_connectivity: int = 3,
                              drop_vertex_bigons: bool = True,
                              restrict_first_dart: bool = False) -> List[CombinatorialMap]:
    """Oracle enumeration: all dart pairings over a fixed rotation system.

    Enumerates every perfect matching ``alpha`` of the darts (smallest
    unpaired dart first, no planarity or symmetry pruning), filters by
    connectedness, sphericity and edge connectivity, and deduplicates by
    canonical code.  Exponential; intended for n4 <= 3.

    ``restrict_first_dart`` optionally fixes the partner of dart 1 to one
    representative per orbit of the rotation-preserving relabellings (a pure
    speedup; the unrestricted and restricted runs agree, which the tests
    check at small sizes).
    """
    n = 3 * n3 + 4 * n4
    sigma = _standard_sigma(n3, n4)
    vert_of = [0] * (n + 1)
    len_of_vertex = [0] * (n + 1)
    base = 0
    for vid, deg in enumerate([3] * n3 + [4] * n4):
        for i in range(1, deg + 1):
            vert_of[base + i] = vid
            len_of_vertex[base + i] = deg
        base += deg

    alpha = [0] * (n + 1)
    seen: Dict[Tuple[int, ...], CombinatorialMap] = {}
    results: List[CombinatorialMap] = []

    def emit() -> None:
        m = CombinatorialMap(tuple(sigma), tuple(alpha))
        if not m.is_connected():
            return
        if not m.is_spherical():
            return
        if drop_vertex_bigons:
            # inline recomputation, independent of has_trivalent_bigon
            for d in range(1, n + 1):
                e = sigma[alpha[d]]
                if e != d and sigma[alpha[e]] == d and \
                        len_of_vertex[d] + len_of_vertex[e] == 7:
                    return
        if edge_connectivity(m) < min_edge_connectivity:
            return
        cc = canonical_code(m)
        key = cc.key(up_to_mirror)
        if key not in seen:
            seen[key] = m
            results.append(m)

    first_dart_choices: Optional[List[int]] = None
    if restrict_first_dart:
        # one partner per orbit of relabellings fixing sigma: same vertex
        # (loop), first other vertex of each degree
        first_dart_choices = [2]
        chosen_degs = set()
        base = 3 * 1  # darts of vertex 0 are 1..3 (n3 >= 1 in all our uses)
        for deg in [3] * (n3 - 1) + [4] * n4:
            if deg not in chosen_degs:
                chosen_degs.add(deg)
                first_dart_choices.append(base + 1)
            base += deg

    def rec(d: int) -> None:
        while d <= n and alpha[d]:
            d += 1
        if d > n:
            emit()
            return
        if d == 1 and first_dart_choices is not None:
            choices = first_dart_choices
        else:
            choices = [e for e in range(d + 1, n + 1) if not alpha[e]]
        for e in choices:
            alpha[d] = e
            alpha[e] = d
            rec(d + 1)
            alpha[d] = 0
            alpha[e] = 0

    rec(1)
    results.sort(key=lambda m: canonical_code(m).key(up_to_mirror))
    return results


# ============================================================
# Small named maps used throughout the tests and catalogs
# ============================================================


def theta_map() -> CombinatorialMap:
    """Two trivalent vertices joined by three parallel edges."""
    return CombinatorialMap.from_cycles([[1, 2, 3], [4, 5, 6]],
                                        [(1, 6), (2, 5), (3, 4)])


def handcuff_map() -> CombinatorialMap:
    """Two loops joined by a bar edge."""
    return CombinatorialMap.from_cycles([[1, 2, 3], [4, 5, 6]],
                                        [(1, 2), (3, 4), (5, 6)])


def k4_map() -> CombinatorialMap:
    """The complete graph K4 embedded in the sphere."""
    return CombinatorialMap.from_cycles(
        [[1, 2, 3], [4, 5, 6], [7, 8, 9], [10, 11, 12]],
        [(1, 4), (2, 7), (3, 10), (5, 8), (6, 11), (9, 12)])

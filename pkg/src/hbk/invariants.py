"""Counting invariants of complement groups.

``ks(p, G)`` is the number of conjugacy classes of homomorphisms from the
presented group to G, computed with the Burnside/centralizer identity

    ks = (1/|G|) * sum over classes [c] of |[c]| * |Hom(pi, Z_G(c))|,

whose division must be exact (a failed division is an internal error).  The
naive orbit count over explicitly enumerated homomorphisms is kept as the
small-group oracle.

``g_image`` follows the boundary-subgroup construction: for every proper
surjection (boundary image a proper subgroup), the subgroup generated by all
boundary-conjugates of the meridian images is collected up to conjugacy.
The value is the sorted set of canonical subgroup identifiers.  This is the
artifact-defined variant of the invariant: the peripheral words come from
the fixed longitude normalization in the presentation module, so g_image
separations are only trusted when confirmed by a second invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import hashlib

import numpy as np

from .groups import FiniteGroup, GroupError
from .presentation import (PeripheralSystem, Presentation, Word,
                           presentation_key, tietze_simplify)


class InvariantError(RuntimeError):
    """Internal inconsistency in an invariant computation."""


@dataclass(frozen=True)
class InvariantValue:
    kind: str          # "ks" | "gimage" | "irreducibility"
    group: str         # group name, or "" for irreducibility
    payload: object    # int | tuple of str | str

    def as_json(self) -> object:
        if isinstance(self.payload, tuple):
            return list(self.payload)
        return self.payload


# ============================================================
# Homomorphism counting
# ============================================================


def _generator_order(p: Presentation) -> List[int]:
    """Generators sorted by total relator occurrences, descending."""
    counts = [0] * p.n_gens
    for rel in p.relators:
        for letter in rel:
            counts[abs(letter) - 1] += 1
    return sorted(range(p.n_gens), key=lambda i: (-counts[i], i))


_subgroup_class_cache: Dict[Tuple[int, FrozenSet[int]], List[Tuple[int, int]]] = {}


def _subgroup_classes(G: FiniteGroup, members: Sequence[int]) -> List[Tuple[int, int]]:
    """Conjugacy classes of a subgroup given by element indices.

    Returns (representative index, class size) pairs; cached per subgroup.
    """
    key = (id(G), frozenset(members))
    if key in _subgroup_class_cache:
        return _subgroup_class_cache[key]
    if len(members) == len(G):
        out = [(G.index_of(c.representative), c.size)
               for c in G.conjugacy_classes()]
        _subgroup_class_cache[key] = out
        return out
    table = G.cayley_table()
    inv = G.inverse_vector()
    mem = sorted(members)
    mem_set = set(mem)
    assigned: Set[int] = set()
    out = []
    for x in mem:
        if x in assigned:
            continue
        orbit = {int(table[int(table[h, x]), int(inv[h])]) for h in mem}
        if not orbit <= mem_set:
            raise GroupError("member set is not a subgroup")
        assigned |= orbit
        out.append((x, len(orbit)))
    _subgroup_class_cache[key] = out
    return out


def count_homs(p: Presentation, members: Optional[Sequence[int]],
               G: FiniteGroup) -> int:
    """Number of homomorphisms sending every generator into ``members``.

    ``members`` is a mult-closed set of element indices of G (None = all of
    G).  Backtracking assigns generators in decreasing occurrence order;
    each relator is checked as soon as its generators are assigned, with the
    last generator handled as a vector over the whole domain.  The image of
    the first generator is restricted to class representatives of the
    subgroup, weighted by class size.
    """
    if members is None:
        domain = list(range(len(G)))
    else:
        domain = sorted(int(x) for x in members)
    g = p.n_gens
    if g == 0:
        return 1
    order = _generator_order(p)
    pos_of_gen = {gen: k for k, gen in enumerate(order)}

    # schedule each relator at the level where its last generator appears
    level_rels: List[List[Word]] = [[] for _ in range(g)]
    for rel in p.relators:
        if not rel:
            continue
        lvl = max(pos_of_gen[abs(letter) - 1] for letter in rel)
        level_rels[lvl].append(rel)

    table = G.cayley_table()
    inv = G.inverse_vector()
    ident = G.identity_index
    dom_vec = np.array(domain, dtype=np.int64)
    inv_dom_vec = inv[dom_vec]

    assignment = [0] * g  # by generator index

    def eval_scalar(rel: Word) -> bool:
        v = ident
        for letter in rel:
            x = assignment[abs(letter) - 1]
            v = int(table[v, x if letter > 0 else int(inv[x])])
        return v == ident

    last = g - 1

    def eval_vector(rel: Word, mask: np.ndarray) -> np.ndarray:
        v = np.full(len(dom_vec), ident, dtype=np.int64)
        for letter in rel:
            gen = abs(letter) - 1
            if pos_of_gen[gen] == last:
                x = dom_vec if letter > 0 else inv_dom_vec
                v = table[v, x].astype(np.int64)
            else:
                x = assignment[gen]
                v = table[v, x if letter > 0 else int(inv[x])].astype(np.int64)
        return mask & (v == ident)

    def count_from(level: int) -> int:
        if level == last:
            mask = np.ones(len(dom_vec), dtype=bool)
            for rel in level_rels[last]:
                mask = eval_vector(rel, mask)
                if not mask.any():
                    return 0
            return int(mask.sum())
        total = 0
        gen = order[level]
        for x in domain:
            assignment[gen] = x
            if all(eval_scalar(rel) for rel in level_rels[level]):
                total += count_from(level + 1)
        return total

    if g == 1:
        return count_from(0)

    # first generator: one representative per conjugacy class of the domain
    total = 0
    gen0 = order[0]
    for rep, size in _subgroup_classes(G, domain):
        assignment[gen0] = rep
        if all(eval_scalar(rel) for rel in level_rels[0]):
            total += size * count_from(1)
    return total


def count_homs_naive(p: Presentation, members: Optional[Sequence[int]],
                     G: FiniteGroup) -> int:
    """Plain nested-loop count; the test oracle for :func:`count_homs`."""
    return sum(1 for _ in hom_images(p, G, members))


def hom_images(p: Presentation, G: FiniteGroup,
               members: Optional[Sequence[int]] = None) -> Iterable[Tuple[int, ...]]:
    """All homomorphisms as tuples of generator images (element indices).

    The first g-1 generators are enumerated by backtracking with scalar
    relator checks; the last axis is evaluated as a numpy mask, which keeps
    the g = 4 cases affordable.
    """
    domain = list(range(len(G))) if members is None else sorted(members)
    table = G.cayley_table()
    inv = G.inverse_vector()
    ident = G.identity_index
    g = p.n_gens
    if g == 0:
        yield ()
        return
    dom_vec = np.array(domain, dtype=np.int64)
    inv_dom = inv[dom_vec]

    by_level: List[List[Word]] = [[] for _ in range(g)]
    for rel in p.relators:
        if rel:
            by_level[max(abs(x) - 1 for x in rel)].append(rel)

    assignment = [0] * g

    def ok(level: int) -> bool:
        for rel in by_level[level]:
            v = ident
            for letter in rel:
                x = assignment[abs(letter) - 1]
                v = int(table[v, x if letter > 0 else int(inv[x])])
            if v != ident:
                return False
        return True

    last = g - 1

    def last_mask() -> np.ndarray:
        mask = np.ones(len(dom_vec), dtype=bool)
        for rel in by_level[last]:
            v = np.full(len(dom_vec), ident, dtype=np.int64)
            for letter in rel:
                gen = abs(letter) - 1
                if gen == last:
                    x = dom_vec if letter > 0 else inv_dom
                    v = table[v, x].astype(np.int64)
                else:
                    x = assignment[gen]
                    v = table[v, x if letter > 0 else int(inv[x])].astype(np.int64)
            mask &= (v == ident)
            if not mask.any():
                break
        return mask

    def rec(k: int):
        if k == last:
            for x in dom_vec[last_mask()]:
                assignment[last] = int(x)
                yield tuple(assignment)
            return
        for x in domain:
            assignment[k] = x
            if ok(k):
                yield from rec(k + 1)

    yield from rec(0)


# ============================================================
# ks and its oracle
# ============================================================


def ks(p: Presentation, G: FiniteGroup) -> int:
    """Conjugacy classes of homomorphisms into G (Burnside form)."""
    acc = 0
    for c in G.conjugacy_classes():
        n_c = count_homs(p, c.centralizer, G)
        acc += c.size * n_c
    q, r = divmod(acc, len(G))
    if r:
        raise InvariantError(
            f"Burnside sum {acc} not divisible by |G| = {len(G)}")
    return q


def ks_naive(p: Presentation, G: FiniteGroup) -> int:
    """Orbit count over explicitly enumerated homomorphisms (oracle)."""
    homs = set(hom_images(p, G))
    table = G.cayley_table()
    inv = G.inverse_vector()
    seen: Set[Tuple[int, ...]] = set()
    orbits = 0
    for f in sorted(homs):
        if f in seen:
            continue
        orbits += 1
        for h in range(len(G)):
            conj = tuple(int(table[int(table[h, x]), int(inv[h])]) for x in f)
            seen.add(conj)
    if not seen == homs:
        raise InvariantError("conjugation does not preserve the hom set")
    return orbits


# ============================================================
# G-image
# ============================================================


def _word_image(word: Word, images: Sequence[int], G: FiniteGroup) -> int:
    table = G.cayley_table()
    inv = G.inverse_vector()
    v = G.identity_index
    for letter in word:
        x = images[abs(letter) - 1]
        v = int(table[v, x if letter > 0 else int(inv[x])])
    return v


def _closure_indices(G: FiniteGroup, gens: Iterable[int]) -> FrozenSet[int]:
    table = G.cayley_table()
    gens = {int(x) for x in gens}
    closure = {G.identity_index}
    frontier = [G.identity_index]
    while frontier:
        new = []
        for x in frontier:
            for s in gens:
                y = int(table[x, s])
                if y not in closure:
                    closure.add(y)
                    new.append(y)
        frontier = new
    return frozenset(closure)


def subgroup_identifier(G: FiniteGroup, members: FrozenSet[int]) -> str:
    """Stable name for a subgroup up to conjugacy in G."""
    payloads = frozenset(G.elements[i] for i in members)
    size, orders = G.subgroup_signature(payloads)
    canon = G.canonical_subgroup_key(payloads)
    digest = hashlib.sha256(repr(canon).encode()).hexdigest()[:8]
    order_txt = "-".join(f"{o}x{c}" for o, c in orders)
    return f"{size}.{order_txt}.{digest}"


def g_image(p: Presentation, peripheral: PeripheralSystem,
            G: FiniteGroup) -> Tuple[str, ...]:
    """Sorted set of subgroup identifiers produced by proper surjections.

    For each surjective homomorphism f whose boundary image (subgroup
    generated by the f-images of all meridian and longitude words) is a
    proper subgroup, the subgroup generated by all boundary-conjugates of
    the meridian images is recorded up to conjugacy.
    """
    table = G.cayley_table()
    inv = G.inverse_vector()
    n = len(G)
    results: Set[FrozenSet[int]] = set()
    identifiers: Dict[FrozenSet[int], str] = {}
    for f in hom_images(p, G):
        if len(_closure_indices(G, f)) != n:
            continue  # not surjective
        boundary_gens = [_word_image(w, f, G)
                         for w in peripheral.meridians + peripheral.longitudes]
        boundary = _closure_indices(G, boundary_gens)
        if len(boundary) == n:
            continue  # not proper
        meridian_imgs = [_word_image(w, f, G) for w in peripheral.meridians]
        conj_gens = set()
        for b in boundary:
            binv = int(inv[b])
            for mi in meridian_imgs:
                conj_gens.add(int(table[int(table[b, mi]), binv]))
        K = _closure_indices(G, conj_gens)
        canon = frozenset(G.index_of(x)
                          for x in G.canonical_subgroup_key(
                              frozenset(G.elements[i] for i in K)))
        if canon not in identifiers:
            identifiers[canon] = subgroup_identifier(G, K)
        results.add(canon)
    return tuple(sorted(identifiers[k] for k in results))


# ============================================================
# Irreducibility (residue criterion)
# ============================================================


def irreducibility(rank_bound: int, ks_a4: int, ks_a5: int) -> str:
    """"irreducible" or "inconclusive" from the rank bound and residues.

    Irreducible when rank <= 3 with ks_A5 not congruent to 17 mod 60, or
    rank <= 4 with ks_A4 not congruent to 10 mod 12.  Never answers
    "reducible".
    """
    if rank_bound <= 3 and ks_a5 % 60 != 17:
        return "irreducible"
    if rank_bound <= 4 and ks_a4 % 12 != 10:
        return "irreducible"
    return "inconclusive"


# ============================================================
# Cached evaluation keyed by presentation
# ============================================================


_ks_cache: Dict[Tuple, int] = {}


def ks_cached(p: Presentation, G: FiniteGroup) -> int:
    key = (presentation_key(p), G.name)
    if key not in _ks_cache:
        _ks_cache[key] = ks(p, G)
    return _ks_cache[key]

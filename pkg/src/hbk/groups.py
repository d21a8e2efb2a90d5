"""Finite group backends for the homomorphism-counting invariants.

Three families are supported, each with elements stored as canonical
hashable payloads with a total order, so sets, orbits and sums over group
elements are reproducible:

  * symmetric groups  S_n   (payload: one-line permutation tuple),
  * alternating groups A_n  (same payload, even permutations only),
  * SL2(Z_p), p prime       (payload: (a, b, c, d) mod p with ad - bc = 1).

A :class:`FiniteGroup` eagerly caches the sorted element list, conjugacy
classes with centralizers, and element orders.  A dense Cayley table (numpy)
is built on demand for the counting cores.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from itertools import permutations
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

DEFAULT_ORDER_BUDGET = 100_000

GROUP_NAMES = ("S3", "S4", "S5", "S6", "A4", "A5", "A6",
               "SL2_3", "SL2_5", "SL2_7", "SL2_11", "SL2_13")


class GroupError(ValueError):
    """Raised for invalid group constructions or mixed-backend operations."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


# ============================================================
# Backends: payload-level operations
# ============================================================


def _perm_mul(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    """(a*b)(x) = a(b(x))."""
    return tuple(a[b[i]] for i in range(len(a)))


def _perm_inv(a: Tuple[int, ...]) -> Tuple[int, ...]:
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def _perm_sign(a: Tuple[int, ...]) -> int:
    seen = [False] * len(a)
    sign = 1
    for i in range(len(a)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = a[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _sl2_mul(p: int, x: Tuple[int, ...], y: Tuple[int, ...]) -> Tuple[int, ...]:
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % p, (a * f + b * h) % p,
            (c * e + d * g) % p, (c * f + d * h) % p)


def _sl2_inv(p: int, x: Tuple[int, ...]) -> Tuple[int, ...]:
    a, b, c, d = x
    return (d % p, (-b) % p, (-c) % p, a % p)


# ============================================================
# Elements and groups
# ============================================================


@total_ordering
@dataclass(frozen=True, eq=False)
class GroupElement:
    """An element of a specific :class:`FiniteGroup`; a thin payload wrapper."""

    group: "FiniteGroup"
    payload: Tuple[int, ...]

    def _require_same_backend(self, other: "GroupElement") -> None:
        if self.group is not other.group:
            raise GroupError("cannot combine elements of different groups")

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        self._require_same_backend(other)
        return GroupElement(self.group, self.group.mul_payload(self.payload, other.payload))

    def inv(self) -> "GroupElement":
        return GroupElement(self.group, self.group.inv_payload(self.payload))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        if self.group is not other.group:
            raise GroupError("cannot compare elements of different groups")
        return self.payload == other.payload

    def __lt__(self, other: "GroupElement") -> bool:
        self._require_same_backend(other)
        return self.payload < other.payload

    def __hash__(self) -> int:
        return hash((id(self.group), self.payload))

    def order(self) -> int:
        return self.group.element_order(self.group.index_of(self.payload))


@dataclass
class ConjugacyClass:
    representative: Tuple[int, ...]
    size: int
    centralizer: Tuple[int, ...]  # element indices, sorted


class FiniteGroup:
    """A concrete finite group with eagerly cached structure.

    Use :func:`group_from_name` or the ``symmetric`` / ``alternating`` /
    ``special_linear2`` constructors.  Elements are exposed both as sorted
    payload tuples (``elements``) and as indices into that list; all caches
    are read-only after construction.
    """

    def __init__(self, kind: str, param: int, payloads: List[Tuple[int, ...]],
                 order_budget: int = DEFAULT_ORDER_BUDGET):
        if len(payloads) > order_budget:
            raise GroupError(
                f"group order {len(payloads)} exceeds budget {order_budget}; "
                "pass a larger order_budget to override")
        self.kind = kind
        self.param = param
        self.name = f"SL2_{param}" if kind == "SL2" else f"{kind}{param}"
        self.elements: Tuple[Tuple[int, ...], ...] = tuple(sorted(payloads))
        self._index: Dict[Tuple[int, ...], int] = {
            g: i for i, g in enumerate(self.elements)}
        self.identity_payload = (tuple(range(param)) if kind in ("S", "A")
                                 else (1, 0, 0, 1))
        self.identity_index = self._index[self.identity_payload]
        self._orders: Optional[Tuple[int, ...]] = None
        self._classes: Optional[List[ConjugacyClass]] = None
        self._table: Optional[np.ndarray] = None
        self._inv_vector: Optional[np.ndarray] = None
        # eager caches per the concurrency contract
        self.element_order  # noqa: B018 - build order cache
        self.conjugacy_classes()

    # ---------------- payload arithmetic ----------------

    def mul_payload(self, a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
        if self.kind in ("S", "A"):
            return _perm_mul(a, b)
        return _sl2_mul(self.param, a, b)

    def inv_payload(self, a: Tuple[int, ...]) -> Tuple[int, ...]:
        if self.kind in ("S", "A"):
            return _perm_inv(a)
        return _sl2_inv(self.param, a)

    def element(self, payload: Tuple[int, ...]) -> GroupElement:
        if payload not in self._index:
            raise GroupError(f"payload {payload} is not in {self.name}")
        return GroupElement(self, payload)

    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_payload)

    def index_of(self, payload: Tuple[int, ...]) -> int:
        return self._index[payload]

    def __len__(self) -> int:
        return len(self.elements)

    # ---------------- index arithmetic ----------------

    def mul_index(self, i: int, j: int) -> int:
        return self._index[self.mul_payload(self.elements[i], self.elements[j])]

    def inv_index(self, i: int) -> int:
        return self._index[self.inv_payload(self.elements[i])]

    @property
    def element_order(self) -> Tuple[int, ...]:
        """Order of every element, indexed like ``elements``."""
        if self._orders is None:
            orders = []
            for g in self.elements:
                k = 1
                x = g
                while x != self.identity_payload:
                    x = self.mul_payload(x, g)
                    k += 1
                orders.append(k)
            self._orders = tuple(orders)
        return self._orders

    def cayley_table(self) -> np.ndarray:
        """Dense multiplication table, table[i, j] = index of g_i * g_j."""
        if self._table is None:
            n = len(self.elements)
            dtype = np.uint16 if n < 65536 else np.uint32
            table = np.empty((n, n), dtype=dtype)
            for i, a in enumerate(self.elements):
                row = [self._index[self.mul_payload(a, b)] for b in self.elements]
                table[i] = row
            self._table = table
        return self._table

    def inverse_vector(self) -> np.ndarray:
        if self._inv_vector is None:
            self._inv_vector = np.array(
                [self.inv_index(i) for i in range(len(self.elements))],
                dtype=np.int64)
        return self._inv_vector

    # ---------------- conjugacy structure ----------------

    def conjugacy_classes(self) -> List[ConjugacyClass]:
        """Partition into conjugacy classes with centralizer element indices."""
        if self._classes is not None:
            return self._classes
        n = len(self.elements)
        assigned = [False] * n
        classes: List[ConjugacyClass] = []
        inv_cache = [self.inv_payload(g) for g in self.elements]
        for i in range(n):
            if assigned[i]:
                continue
            x = self.elements[i]
            orbit = set()
            centralizer = []
            for j, g in enumerate(self.elements):
                y = self.mul_payload(self.mul_payload(g, x), inv_cache[j])
                orbit.add(self._index[y])
                if y == x:
                    centralizer.append(j)
            for k in orbit:
                assigned[k] = True
            classes.append(ConjugacyClass(
                representative=x, size=len(orbit),
                centralizer=tuple(centralizer)))
        sizes = sum(c.size for c in classes)
        if sizes != n:
            raise GroupError("conjugacy classes do not partition the group")
        for c in classes:
            if c.size * len(c.centralizer) != n:
                raise GroupError("orbit-stabilizer identity violated")
        self._classes = classes
        return classes

    # ---------------- subgroup machinery ----------------

    def subgroup_closure(self, generators: Iterable[Tuple[int, ...]]) -> FrozenSet[Tuple[int, ...]]:
        """Subgroup generated by ``generators`` (payloads), by BFS closure."""
        gens = [g if isinstance(g, tuple) else g.payload for g in generators]
        for g in gens:
            if g not in self._index:
                raise GroupError(f"generator {g} is not in {self.name}")
        closure = {self.identity_payload}
        frontier = [self.identity_payload]
        while frontier:
            new = []
            for x in frontier:
                for g in gens:
                    y = self.mul_payload(x, g)
                    if y not in closure:
                        closure.add(y)
                        new.append(y)
            frontier = new
        return frozenset(closure)

    def is_whole_group(self, subgroup: FrozenSet[Tuple[int, ...]]) -> bool:
        return len(subgroup) == len(self.elements)

    def subgroup_signature(self, subgroup: Iterable[Tuple[int, ...]]) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
        """(size, sorted multiset of element orders) - a conjugacy invariant."""
        orders: Dict[int, int] = {}
        size = 0
        for g in subgroup:
            size += 1
            o = self.element_order[self._index[g]]
            orders[o] = orders.get(o, 0) + 1
        return (size, tuple(sorted(orders.items())))

    def subgroups_conjugate(self, h1: FrozenSet[Tuple[int, ...]],
                            h2: FrozenSet[Tuple[int, ...]]) -> bool:
        if len(h1) != len(h2):
            return False
        if self.subgroup_signature(h1) != self.subgroup_signature(h2):
            return False
        for g in self.elements:
            ginv = self.inv_payload(g)
            if all(self.mul_payload(self.mul_payload(g, x), ginv) in h2 for x in h1):
                return True
        return False

    def canonical_subgroup_key(self, subgroup: FrozenSet[Tuple[int, ...]]) -> Tuple[Tuple[int, ...], ...]:
        """Lexicographically minimal conjugate of ``subgroup``, as a sorted tuple.

        Equal keys iff the subgroups are conjugate in the group; used to name
        G-image entries deterministically.
        """
        best: Optional[Tuple[Tuple[int, ...], ...]] = None
        for g in self.elements:
            ginv = self.inv_payload(g)
            conj = tuple(sorted(
                self.mul_payload(self.mul_payload(g, x), ginv) for x in subgroup))
            if best is None or conj < best:
                best = conj
        assert best is not None
        return best


# ============================================================
# Constructors
# ============================================================


def symmetric(n: int, order_budget: int = DEFAULT_ORDER_BUDGET) -> FiniteGroup:
    if n < 1:
        raise GroupError("need n >= 1")
    payloads = [tuple(p) for p in permutations(range(n))]
    return FiniteGroup("S", n, payloads, order_budget)


def alternating(n: int, order_budget: int = DEFAULT_ORDER_BUDGET) -> FiniteGroup:
    if n < 2:
        raise GroupError("need n >= 2")
    payloads = [tuple(p) for p in permutations(range(n)) if _perm_sign(tuple(p)) == 1]
    return FiniteGroup("A", n, payloads, order_budget)


def special_linear2(p: int, order_budget: int = DEFAULT_ORDER_BUDGET) -> FiniteGroup:
    if not _is_prime(p):
        raise GroupError(f"SL2 parameter {p} must be prime")
    payloads = []
    for a in range(p):
        for b in range(p):
            for c in range(p):
                for d in range(p):
                    if (a * d - b * c) % p == 1:
                        payloads.append((a, b, c, d))
    return FiniteGroup("SL2", p, payloads, order_budget)


_GROUP_CACHE: Dict[Tuple[str, int], FiniteGroup] = {}


def group_from_name(name: str, order_budget: int = DEFAULT_ORDER_BUDGET) -> FiniteGroup:
    """Resolve names like ``S5``, ``A6``, ``SL2_7``; instances are cached."""
    if name.startswith("SL2_"):
        kind, param = "SL2", int(name[4:])
    elif name[0] in ("S", "A") and name[1:].isdigit():
        kind, param = name[0], int(name[1:])
    else:
        raise GroupError(f"unknown group name {name!r}")
    key = (kind, param)
    if key not in _GROUP_CACHE:
        if kind == "S":
            _GROUP_CACHE[key] = symmetric(param, order_budget)
        elif kind == "A":
            _GROUP_CACHE[key] = alternating(param, order_budget)
        else:
            _GROUP_CACHE[key] = special_linear2(param, order_budget)
    return _GROUP_CACHE[key]

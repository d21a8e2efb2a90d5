"""Shipped diagram catalogs: prime knots and small base graphs.

Prime knots up to seven crossings are all rational; their minimal
alternating diagrams are built from the Conway notation by stacking side
and bottom twists of a 4-ended tangle and closing.  Base graphs (the
spatial graphs with 3-connected minimal diagrams up to four crossings) are
regenerated by the enumeration pipeline and shipped as .hbk files.

Catalog correctness is pinned by structural checks (crossing number,
component count, alternation) and by the knot determinant, which together
separate all entries.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .diagrams import Diagram, spine_edges
from .maps import CombinatorialMap

DATA_DIR = Path(__file__).parent / "data"

# Conway notation of the prime knots up to seven crossings
PRIME_KNOTS: Dict[str, Tuple[int, ...]] = {
    "3_1": (3,),
    "4_1": (2, 2),
    "5_1": (5,),
    "5_2": (3, 2),
    "6_1": (4, 2),
    "6_2": (3, 1, 2),
    "6_3": (2, 1, 1, 2),
    "7_1": (7,),
    "7_2": (5, 2),
    "7_3": (4, 3),
    "7_4": (3, 1, 3),
    "7_5": (3, 2, 2),
    "7_6": (2, 2, 1, 2),
    "7_7": (2, 1, 1, 1, 2),
}

# knot determinants (continued-fraction numerators); (crossings, det)
# separates all catalog knots
KNOT_DETERMINANTS: Dict[str, int] = {
    "3_1": 3, "4_1": 5, "5_1": 5, "5_2": 7, "6_1": 9, "6_2": 11, "6_3": 13,
    "7_1": 7, "7_2": 11, "7_3": 13, "7_4": 15, "7_5": 17, "7_6": 19,
    "7_7": 21,
}

BASE_GRAPH_NAMES = ("G2", "G3", "G4_1", "G4_2", "G4_3")
BASE_GRAPH_CROSSINGS = {"G2": 2, "G3": 3, "G4_1": 4, "G4_2": 4, "G4_3": 4}


class _Tangle:
    """A 4-ended tangle: loose darts at nw/ne/sw/se, built by twisting.

    An end is either a dart or, before any crossing touches it, one side of
    a bare wire to another end (the 0-tangle strands nw-ne and sw-se).
    """

    def __init__(self, vertical: bool = False):
        self.sigma: Dict[int, int] = {}
        self.alpha: Dict[int, int] = {}
        self.under: List[int] = []
        self.next = 0
        if vertical:   # the infinity tangle: strands nw-sw and ne-se
            self.ends: Dict[str, Tuple[str, object]] = {
                "nw": ("wire", "sw"), "sw": ("wire", "nw"),
                "ne": ("wire", "se"), "se": ("wire", "ne")}
        else:          # the zero tangle: strands nw-ne and sw-se
            self.ends = {
                "nw": ("wire", "ne"), "ne": ("wire", "nw"),
                "sw": ("wire", "se"), "se": ("wire", "sw")}

    def _fresh4(self) -> List[int]:
        out = [self.next + 1, self.next + 2, self.next + 3, self.next + 4]
        self.next += 4
        return out

    def _attach(self, end: str, dart: int) -> None:
        kind, val = self.ends[end]
        if kind == "dart":
            self.alpha[val] = dart
            self.alpha[dart] = val
        else:
            self.ends[val] = ("dart", dart)

    def twist(self, ends: Tuple[str, str], positive: bool) -> None:
        """Cross the two named ends once (a new crossing below/beside)."""
        # crossing rotation ccw (ne, nw, sw, se); strands nw-se and ne-sw
        ne_, nw_, sw_, se_ = self._fresh4()
        rot = [ne_, nw_, sw_, se_]
        for i, d in enumerate(rot):
            self.sigma[d] = rot[(i + 1) % 4]
        if positive:
            self.under.extend((ne_, sw_))
        else:
            self.under.extend((nw_, se_))
        if ends == ("sw", "se"):
            self._attach("sw", nw_)
            self._attach("se", ne_)
            self.ends["sw"] = ("dart", sw_)
            self.ends["se"] = ("dart", se_)
        elif ends == ("ne", "se"):
            self._attach("ne", nw_)
            self._attach("se", sw_)
            self.ends["ne"] = ("dart", ne_)
            self.ends["se"] = ("dart", se_)
        else:
            raise ValueError(f"unsupported twist ends {ends}")

    def close(self) -> Diagram:
        """Numerator closure: join nw-ne and sw-se."""
        circles = 0
        for a, b in (("nw", "ne"), ("sw", "se")):
            ka, va = self.ends[a]
            kb, vb = self.ends[b]
            if ka == "dart" and kb == "dart":
                self.alpha[va] = vb
                self.alpha[vb] = va
            elif ka == "wire" and va == b:
                circles += 1
            else:
                raise ValueError("tangled closure")
        n = self.next
        sigma = [0] * (n + 1)
        alpha = [0] * (n + 1)
        for k, v in self.sigma.items():
            sigma[k] = v
        for k, v in self.alpha.items():
            alpha[k] = v
        return Diagram(CombinatorialMap(tuple(sigma), tuple(alpha)),
                       frozenset(self.under), circles)


def rational_knot(conway: Sequence[int],
                  side_sign: bool = True, bottom_sign: bool = True) -> Diagram:
    """Minimal alternating diagram of the rational knot C(a1, ..., an).

    Twist groups are applied left to right, alternating side and bottom
    twists so that the last group is a side group (the continued fraction
    a_n + 1/(a_{n-1} + ...) then matches the notation); with an even number
    of groups the build starts from the infinity tangle.
    """
    n = len(conway)
    t = _Tangle(vertical=(n % 2 == 0))
    for i, a in enumerate(conway):
        side = (n - 1 - i) % 2 == 0
        for _ in range(a):
            t.twist(("ne", "se") if side else ("sw", "se"),
                    positive=(side_sign if side else bottom_sign))
    return t.close()


def is_alternating(d: Diagram) -> bool:
    """Along every strand, passes alternate over/under."""
    for e in spine_edges(d):
        states = [d.is_under(enter) for enter, _ in e.passes]
        if e.closed and states:
            states = states + [states[0]]
        for x, y in zip(states, states[1:]):
            if x == y:
                return False
    return True


def knot_determinant(d: Diagram) -> int:
    """|H1| of the double branched cover, from the coloring matrix.

    Rows are crossing relations 2*over - in - out = 0 on arc variables;
    one arc is pinned to 0 and one relation dropped; the absolute
    determinant of the square minor is the knot determinant.
    """
    from fractions import Fraction

    from .presentation import wirtinger

    pres, _ = wirtinger(d)
    rows: List[List[int]] = []
    for rel in pres.relators:
        row = [0] * pres.n_gens
        # crossing relators have shape (-out, -s*over, in, s*over)
        for letter in rel:
            row[abs(letter) - 1] += 1 if letter > 0 else -1
        rows.append(row)
    if pres.n_gens == 1:
        return 1
    # re-derive the coloring matrix: out = 2*over - in over the dihedral
    # abelianization; equivalent form: replace each conjugation relator
    # x_out = o^-s x_in o^s by x_out + x_in - 2 o = 0
    rows = []
    for rel in pres.relators:
        if len(rel) != 4:
            raise ValueError("determinant needs a knot diagram presentation")
        out_l, o1, in_l, _o2 = rel
        row = [0] * pres.n_gens
        row[abs(out_l) - 1] += 1
        row[abs(in_l) - 1] += 1
        row[abs(o1) - 1] -= 2
        rows.append(row)
    # drop last relation and last variable
    size = pres.n_gens - 1
    mat = [[Fraction(rows[i][j]) for j in range(size)] for i in range(size)]
    det = Fraction(1)
    for col in range(size):
        piv = None
        for r in range(col, size):
            if mat[r][col]:
                piv = r
                break
        if piv is None:
            return 0
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = -det
        det *= mat[col][col]
        inv = 1 / mat[col][col]
        for r in range(col + 1, size):
            factor = mat[r][col] * inv
            if factor:
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[col])]
    assert det.denominator == 1
    return abs(int(det))


_knot_cache: Dict[str, Diagram] = {}


def prime_knot(name: str) -> Diagram:
    """Catalog diagram of a prime knot (3_1 .. 7_7), from the shipped file.

    The tests regenerate these with :func:`rational_knot` and compare.
    """
    if name not in PRIME_KNOTS:
        raise KeyError(f"unknown knot {name!r}")
    if name not in _knot_cache:
        path = DATA_DIR / "catalog" / f"K{name}.hbk"
        if path.is_file():
            _knot_cache[name] = Diagram.from_hbk(path.read_text())
        else:
            _knot_cache[name] = rational_knot(PRIME_KNOTS[name])
    return _knot_cache[name]


def unknot() -> Diagram:
    """The trivial genus-one handlebody-knot's spine: a crossingless circle."""
    return Diagram.unknot()


_base_cache: Dict[str, Diagram] = {}


def base_graph(name: str) -> Diagram:
    """Catalog diagram of a base spatial graph (G2, G3, G4_1, G4_2, G4_3)."""
    if name not in BASE_GRAPH_NAMES:
        raise KeyError(f"unknown base graph {name!r}")
    if name not in _base_cache:
        path = DATA_DIR / "catalog" / f"{name}.hbk"
        _base_cache[name] = Diagram.from_hbk(path.read_text())
    return _base_cache[name]

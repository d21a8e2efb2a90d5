"""Counting invariants: anchors, the Burnside/naive cross-check, g-image."""

import pytest

from hbk import maps
from hbk.catalog import prime_knot
from hbk.diagrams import Diagram, assign_crossings
from hbk.groups import group_from_name
from hbk.invariants import (count_homs, count_homs_naive, g_image,
                            hom_images, irreducibility, ks, ks_cached,
                            ks_naive)
from hbk.presentation import (PeripheralSystem, Presentation,
                              tietze_simplify, wirtinger)

F2 = Presentation(2, ())
Z = Presentation(1, ())


def simplified(d):
    pres, peri = wirtinger(d)
    res = tietze_simplify(pres, peri.meridians + peri.longitudes)
    n = len(peri.meridians)
    return res.presentation, PeripheralSystem(res.words[:n], res.words[n:])


def test_count_homs_free_groups():
    a4 = group_from_name("A4")
    s3 = group_from_name("S3")
    assert count_homs(F2, None, a4) == 144
    assert count_homs(Z, None, s3) == 6
    # |Hom(F_g, H)| = |H|^g for every centralizer H
    a5 = group_from_name("A5")
    for c in a5.conjugacy_classes():
        for g in (1, 2, 3):
            pres = Presentation(g, ())
            assert count_homs(pres, c.centralizer, a5) == len(c.centralizer) ** g


def test_trefoil_hom_count_bruteforce():
    # 36 assignments of (x, y) checked against x y x = y x y
    s3 = group_from_name("S3")
    count = 0
    for x in s3.elements:
        for y in s3.elements:
            lhs = s3.mul_payload(s3.mul_payload(x, y), x)
            rhs = s3.mul_payload(s3.mul_payload(y, x), y)
            if lhs == rhs:
                count += 1
    assert count == 12
    pres, _ = simplified(prime_knot("3_1"))
    assert count_homs(pres, None, s3) == 12
    assert count_homs_naive(pres, None, s3) == 12


def test_ks_anchors():
    s3 = group_from_name("S3")
    a4 = group_from_name("A4")
    a5 = group_from_name("A5")
    assert ks(Z, s3) == 3              # Hom(Z,G) = G, orbits = classes
    assert ks(F2, a4) == 22            # 144/12 + 16/4 + 9/3 + 9/3
    assert ks(F2, a5) == 77            # 3600/60 + 16/4 + 9/3 + 25/5 + 25/5
    pres, _ = simplified(prime_knot("3_1"))
    assert ks(pres, s3) == 4
    assert ks_naive(pres, s3) == 4


def test_burnside_equals_naive_small_groups():
    groups = [group_from_name(n) for n in ("S3", "A4")]
    for name in ("3_1", "4_1", "5_1", "5_2"):
        pres, _ = simplified(prime_knot(name))
        for g in groups:
            assert ks(pres, g) == ks_naive(pres, g)


@pytest.mark.slow
def test_burnside_equals_naive_wider():
    groups = [group_from_name(n) for n in ("S4", "SL2_3")]
    theta = next(assign_crossings(maps.theta_map()))
    diagrams = [theta] + [prime_knot(n) for n in ("3_1", "4_1", "5_1", "5_2")]
    for d in diagrams:
        pres, _ = simplified(d)
        for g in groups:
            assert ks(pres, g) == ks_naive(pres, g)


def test_ks_mirror_equality_recorded():
    # complement groups of mirror diagrams are isomorphic; equality is
    # checked explicitly rather than presumed
    s3 = group_from_name("S3")
    a4 = group_from_name("A4")
    for name in ("3_1", "5_2"):
        d = prime_knot(name)
        p1, _ = simplified(d)
        p2, _ = simplified(d.mirror())
        assert ks(p1, s3) == ks(p2, s3)
        assert ks(p1, a4) == ks(p2, a4)


def test_ks_cached_stable():
    a4 = group_from_name("A4")
    pres, _ = simplified(prime_knot("4_1"))
    assert ks_cached(pres, a4) == ks_cached(pres, a4) == ks(pres, a4)


def test_g_image_oracle_trivial_genus2():
    # exhaustive check over all 144 assignments of F2 into A4
    a4 = group_from_name("A4")
    theta = next(assign_crossings(maps.theta_map()))
    pres, peri = simplified(theta)
    assert pres.n_gens == 2 and pres.relators == ()

    expected = set()
    n = len(a4)
    for f in hom_images(pres, a4):
        if len(a4.subgroup_closure([a4.elements[i] for i in f])) != n:
            continue
        boundary_gens = []
        for w in peri.meridians + peri.longitudes:
            v = a4.identity_payload
            for letter in w:
                x = a4.elements[f[abs(letter) - 1]]
                if letter < 0:
                    x = a4.inv_payload(x)
                v = a4.mul_payload(v, x)
            boundary_gens.append(v)
        boundary = a4.subgroup_closure(boundary_gens)
        if a4.is_whole_group(boundary):
            continue
        meridian_imgs = []
        for w in peri.meridians:
            v = a4.identity_payload
            for letter in w:
                x = a4.elements[f[abs(letter) - 1]]
                if letter < 0:
                    x = a4.inv_payload(x)
                v = a4.mul_payload(v, x)
            meridian_imgs.append(v)
        conj = []
        for b in boundary:
            binv = a4.inv_payload(b)
            for mi in meridian_imgs:
                conj.append(a4.mul_payload(a4.mul_payload(b, mi), binv))
        K = a4.subgroup_closure(conj)
        expected.add(a4.canonical_subgroup_key(K))

    value = g_image(pres, peri, a4)
    assert len(value) == len(expected)


def test_g_image_full_boundary_knot_is_empty():
    # for the trefoil every surjection has full boundary image in S3:
    # meridians alone generate the group
    s3 = group_from_name("S3")
    pres, peri = simplified(prime_knot("3_1"))
    assert g_image(pres, peri, s3) == ()


def test_irreducibility_verdicts():
    # trivial genus-2 complement: rank 2, ks values on the excluded residues
    assert 77 % 60 == 17 and 22 % 12 == 10
    assert irreducibility(2, 22, 77) == "inconclusive"
    # either clause suffices
    assert irreducibility(3, 22, 78) == "irreducible"
    assert irreducibility(4, 23, 77) == "irreducible"
    assert irreducibility(5, 23, 78) == "inconclusive"

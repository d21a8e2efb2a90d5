"""Rewriting: matching, application, filters, flips, search."""

import random

import pytest

from hbk import maps, rewrite
from hbk.catalog import prime_knot
from hbk.diagrams import Diagram, assign_crossings, diagrams_equal
from hbk.groups import group_from_name
from hbk.invariants import ks_cached
from hbk.maps import CombinatorialMap
from hbk.presentation import tietze_simplify, wirtinger
from hbk.rewrite import (RewriteError, apply_rule, find_matches, flip_rules,
                         is_reducible, load_rules, move_rules,
                         normalize_loop_flips, parse_rule, replay,
                         search_equivalence, with_mirrors)

RULES = load_rules()


def kink_unknot():
    m = CombinatorialMap.from_cycles([[1, 2, 3, 4]], [(1, 2), (3, 4)])
    return Diagram.from_map(m, [1, 3])


def poke_unknot():
    # two crossings forming a reducible bigon (one strand over at both)
    m = CombinatorialMap.from_cycles(
        [[1, 2, 3, 4], [5, 6, 7, 8]],
        [(2, 8), (3, 7), (1, 5), (4, 6)])
    return Diagram.from_map(m, [1, 3, 5, 7])


def theta_diagram():
    return next(assign_crossings(maps.theta_map()))


def handcuff_diagram():
    return Diagram.from_map(maps.handcuff_map(), [])


def ks_pair(d):
    pres, _ = wirtinger(d)
    simp = tietze_simplify(pres).presentation
    return (ks_cached(simp, group_from_name("S3")),
            ks_cached(simp, group_from_name("A4")))


def test_r1_match_counts():
    kink = kink_unknot()
    sites = find_matches(kink, RULES["r1a"]) + find_matches(kink, RULES["r1b"])
    assert len(sites) == 2  # the kink seen from both loop edges
    assert find_matches(theta_diagram(), RULES["r1a"]) == []


def test_r2_matches_poke():
    assert len(find_matches(poke_unknot(), RULES["r2a"])) >= 1


def test_r1_reduces_kink_to_unknot():
    kink = kink_unknot()
    site = find_matches(kink, RULES["r1a"])[0]
    out = apply_rule(kink, RULES["r1a"], site)
    assert diagrams_equal(out, Diagram.unknot())


def test_ih_exchanges_theta_and_handcuff():
    theta = theta_diagram()
    sites = find_matches(theta, RULES["ih"])
    assert sites
    out = apply_rule(theta, RULES["ih"], sites[0])
    assert diagrams_equal(out, handcuff_diagram())


def test_apply_then_inverse_roundtrip():
    rng = random.Random(9)
    diagrams = [prime_knot(n) for n in ("3_1", "4_1", "5_2", "6_1")]
    diagrams += [theta_diagram(), handcuff_diagram()]
    moves = move_rules(RULES, mode="hk")
    done = 0
    while done < 100:
        d = rng.choice(diagrams)
        rule = rng.choice(moves)
        sites = find_matches(d, rule)
        if not sites:
            continue
        site = rng.choice(sites)
        try:
            out = apply_rule(d, rule, site)
        except RewriteError:
            continue
        assert out.n_crossings == d.n_crossings + rule.effect
        inverse = rule.inverse()
        back = [apply_rule(out, inverse, s) for s in find_matches(out, inverse)]
        assert any(diagrams_equal(b, d) for b in back)
        done += 1


def test_stale_site_error():
    kink = kink_unknot()
    site = find_matches(kink, RULES["r1a"])[0]
    other = poke_unknot()
    with pytest.raises(RewriteError, match="stale site"):
        apply_rule(other, RULES["r1a"], site)


def test_is_reducible_examples():
    frules = rewrite.filter_rules(RULES)
    assert is_reducible(kink_unknot(), frules) == "reducible"
    assert is_reducible(prime_knot("3_1"), frules) == "unknown"
    assert is_reducible(theta_diagram(), frules) == "unknown"


def test_move_soundness_ks_random_applications():
    rng = random.Random(21)
    seeds = [prime_knot(n) for n in ("3_1", "4_1", "5_1")]
    seeds.append(theta_diagram())
    moves = [r for r in move_rules(RULES, mode="hk")]
    done = 0
    while done < 60:
        d = rng.choice(seeds)
        rule = rng.choice(moves)
        sites = find_matches(d, rule)
        if not sites:
            continue
        try:
            out = apply_rule(d, rule, rng.choice(sites))
        except RewriteError:
            continue
        assert ks_pair(out) == ks_pair(d), rule.name
        done += 1


def test_flip_orbit_selection():
    # pierced-loop diagram and its flip form one orbit with one survivor
    base_cycles = [[1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11], [12, 13, 14]]
    base_edges = [(3, 7), (2, 11), (5, 9), (4, 10), (1, 12), (6, 13), (8, 14)]
    over = Diagram.from_map(
        CombinatorialMap.from_cycles(base_cycles, base_edges), [5, 7, 9, 11])
    under = Diagram.from_map(
        CombinatorialMap.from_cycles(base_cycles, base_edges), [4, 6, 8, 10])
    flips = flip_rules(RULES)
    survivors = normalize_loop_flips([over, under], flips)
    assert len(survivors) == 1
    # a diagram without flip sites passes through unchanged
    assert normalize_loop_flips([theta_diagram()], flips) == [theta_diagram()]


def test_flip_choice_relabel_independent():
    base_cycles = [[1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11], [12, 13, 14]]
    base_edges = [(3, 7), (2, 11), (5, 9), (4, 10), (1, 12), (6, 13), (8, 14)]
    d = Diagram.from_map(
        CombinatorialMap.from_cycles(base_cycles, base_edges), [5, 7, 9, 11])
    rng = random.Random(3)
    perm = [0] + rng.sample(range(1, 15), 14)
    relabeled = d.relabel(perm)
    a = normalize_loop_flips([d], flip_rules(RULES))
    b = normalize_loop_flips([relabeled], flip_rules(RULES))
    assert [x.canonical_key() for x in a] == [x.canonical_key() for x in b]


def test_search_self_and_modes():
    theta = theta_diagram()
    assert len(search_equivalence(theta, theta, 1, 1)) == 0
    hand = handcuff_diagram()
    hk = search_equivalence(theta, hand, depth=3, max_crossings=2, mode="hk")
    assert hk is not None and len(hk) == 1 and hk.steps[0].rule == "ih"
    assert search_equivalence(theta, hand, depth=3, max_crossings=2,
                              mode="graph") is None


def test_search_kink_to_unknot_and_replay():
    kink = kink_unknot()
    trace = search_equivalence(kink, Diagram.unknot(), depth=2,
                               max_crossings=2, mode="graph")
    assert trace is not None and len(trace) == 1
    named = {r.name: r for r in move_rules(RULES, mode="hk")}
    out = replay(kink, trace, named)
    assert diagrams_equal(out, Diagram.unknot())
    out2 = replay(kink, trace, named)
    assert out.canonical_key() == out2.canonical_key()


def test_search_budget_error():
    a = prime_knot("7_1")
    b = prime_knot("7_2")
    with pytest.raises(rewrite.SearchBudget):
        search_equivalence(a, b, depth=20, max_crossings=10, mode="graph",
                           max_nodes=5)


def test_rule_files_well_formed():
    assert set(rewrite.FILTER_RULE_NAMES) <= set(RULES)
    assert set(rewrite.MOVE_RULE_NAMES) <= set(RULES)
    for rule in RULES.values():
        assert rule.mode in ("graph", "hk")
        _ = rule.inverse()
        _ = rule.mirrored()


def test_parse_rule_rejects_bad_files():
    with pytest.raises(RewriteError):
        parse_rule("RULE bad 0 nonsense\nBOUNDARY 1\nLHS\nV 1 2 3\nRHS\nV 1 4 5\nE 4 5\n")
    with pytest.raises(RewriteError, match="disconnected"):
        parse_rule("RULE d 0 graph\nBOUNDARY 1 2 3 4 5 6\nLHS\nV 1 2 3\nV 4 5 6\nRHS\n"
                   "V 1 2 3\nV 4 5 6\n")


def test_mirrored_rules_deduplicate():
    doubled = with_mirrors([RULES["r2a"], RULES["r2a"]])
    assert len(doubled) == 2

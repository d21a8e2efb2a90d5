"""Shipped catalogs: structure checks that pin the transcription."""

import pytest

from hbk import catalog
from hbk.catalog import (BASE_GRAPH_CROSSINGS, BASE_GRAPH_NAMES,
                         KNOT_DETERMINANTS, PRIME_KNOTS, base_graph,
                         is_alternating, knot_determinant, prime_knot,
                         rational_knot)
from hbk.diagrams import diagrams_equal
from hbk.maps import edge_connectivity


EXPECTED_CROSSINGS = {
    "3_1": 3, "4_1": 4, "5_1": 5, "5_2": 5, "6_1": 6, "6_2": 6, "6_3": 6,
    "7_1": 7, "7_2": 7, "7_3": 7, "7_4": 7, "7_5": 7, "7_6": 7, "7_7": 7,
}


@pytest.mark.parametrize("name", sorted(PRIME_KNOTS))
def test_prime_knot_catalog(name):
    d = prime_knot(name)
    assert d.n_crossings == EXPECTED_CROSSINGS[name] == sum(PRIME_KNOTS[name])
    assert d.component_count() == 1
    assert is_alternating(d)
    assert knot_determinant(d) == KNOT_DETERMINANTS[name]


def test_shipped_knots_match_regeneration():
    for name, conway in PRIME_KNOTS.items():
        assert diagrams_equal(prime_knot(name), rational_knot(conway))


def test_determinants_separate_within_crossing_number():
    by_crossings = {}
    for name in PRIME_KNOTS:
        key = (EXPECTED_CROSSINGS[name], KNOT_DETERMINANTS[name])
        assert key not in by_crossings, (name, by_crossings[key])
        by_crossings[key] = name


@pytest.mark.parametrize("name", BASE_GRAPH_NAMES)
def test_base_graph_catalog(name):
    d = base_graph(name)
    assert d.n_crossings == BASE_GRAPH_CROSSINGS[name]
    assert d.component_count() == 1
    assert len(d.spine_vertices()) == 2
    assert edge_connectivity(d.map) >= 3


def test_base_graphs_distinct():
    keys = {base_graph(n).canonical_key(up_to_mirror=True)
            for n in BASE_GRAPH_NAMES}
    assert len(keys) == len(BASE_GRAPH_NAMES)


def test_unknown_names_rejected():
    with pytest.raises(KeyError):
        prime_knot("8_1")
    with pytest.raises(KeyError):
        base_graph("G5")

import random

import pytest

from sistercities.aggregate import (
    CountryVocabulary,
    aggregate_countries,
    city_attribute_values,
    weighted_degree,
)
from sistercities.errors import GraphError
from sistercities.graph import Graph, build_graph
from sistercities.ingest import City, canonicalize, read_edge_csv


def city_graph(*edges):
    nodes = sorted({c for e in edges for c in e})
    return Graph(nodes, edges)


a1, a2, b1 = City("a1", "A"), City("a2", "A"), City("b1", "B")


def test_two_edges_between_countries():
    cg = aggregate_countries(city_graph((a1, b1), (a2, b1)), CountryVocabulary.identity())
    assert cg.weight("A", "B") == 2
    assert weighted_degree(cg, "A") == 2


def test_internal_edge_is_self_weight():
    cg = aggregate_countries(city_graph((a1, a2)), CountryVocabulary.identity())
    assert cg.self_weights == {"A": 1}
    assert cg.weights == {}


def test_self_weight_counts_twice_when_included():
    a3 = City("a3", "A")
    cg = aggregate_countries(city_graph((a1, a2), (a2, a3), (a1, a3)), CountryVocabulary.identity())
    assert weighted_degree(cg, "A", include_self=True) == 6
    assert weighted_degree(cg, "A") == 0


def test_unknown_country_raises():
    cg = aggregate_countries(city_graph((a1, b1)), CountryVocabulary.identity())
    with pytest.raises(GraphError):
        weighted_degree(cg, "C")


def test_city_without_country_raises():
    with pytest.raises(GraphError, match="country"):
        aggregate_countries(Graph(["x", "y"], [("x", "y")]))


def test_vocabulary_merges_aliases():
    g = city_graph((City("Boston", "United States"), City("Lyon", "France")),
                   (City("Austin", "USA"), City("Lyon", "France")))
    cg = aggregate_countries(g)
    assert cg.weight("USA", "France") == 2


def test_vocabulary_passes_unknown_through(caplog):
    vocab = CountryVocabulary.default()
    assert vocab.canonical("Atlantis") == "Atlantis"
    assert "Atlantis" in caplog.text


def small(fixtures_dir):
    return build_graph(canonicalize(read_edge_csv((fixtures_dir / "edges_small.csv").read_text())))


def test_fixture_aggregation(fixtures_dir):
    g = small(fixtures_dir)
    cg = aggregate_countries(g)
    assert cg.weight("Germany", "UK") == 2
    assert cg.self_weights["Germany"] == 2
    assert weighted_degree(cg, "Germany") == 4
    assert weighted_degree(cg, "Germany", include_self=True) == 8
    assert cg.total_weight() == g.n_edges


def test_weighted_degree_equals_direct_recount(fixtures_dir):
    g = small(fixtures_dir)
    cg = aggregate_countries(g)
    for country in cg.countries:
        recount = sum(
            1
            for u, v, _ in g.edge_list()
            if (u.country == country) != (v.country == country)
        )
        assert weighted_degree(cg, country) == recount


def test_permutation_invariance(fixtures_dir):
    g = small(fixtures_dir)
    ref = aggregate_countries(g)
    edges = [(u, v) for u, v, _ in g.edge_list()]
    rng = random.Random(5)
    for _ in range(10):
        rng.shuffle(edges)
        nodes = list(g.nodes)
        rng.shuffle(nodes)
        assert aggregate_countries(Graph(nodes, edges)) == ref


def test_to_graph_and_csv(fixtures_dir):
    cg = aggregate_countries(small(fixtures_dir))
    g = cg.to_graph()
    assert g.n_self_loops == 1
    assert g.total_weight() == 9
    lines = cg.to_csv().splitlines()
    assert lines[0] == "country_a,country_b,weight"
    assert "Germany,Germany,2" in lines


def test_city_attribute_values(fixtures_dir):
    g = small(fixtures_dir)
    vals = city_attribute_values(g, {"Germany": 1.0, "United Kingdom": 2.0})
    assert vals[City("Bonn", "Germany")] == 1.0
    assert vals[City("Oxford", "UK")] == 2.0
    assert City("Reims", "France") not in vals

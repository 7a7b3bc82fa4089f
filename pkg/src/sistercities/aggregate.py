"""Aggregation of the city network into the weighted country network."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Hashable, Mapping

from .errors import GraphError
from .graph import Graph
from .ingest import identity_key, normalize_name

logger = logging.getLogger(__name__)


class CountryVocabulary:
    """Maps country spellings onto a controlled set of canonical names.

    Unknown labels pass through (normalized) and are logged once each.
    """

    def __init__(self, canonical_to_aliases: Mapping[str, list[str]], warn: bool = True):
        self.warn = warn
        self._lookup: dict[str, str] = {}
        for canonical, aliases in canonical_to_aliases.items():
            for label in [canonical, *aliases]:
                self._lookup[identity_key(label)] = canonical
        self._warned: set[str] = set()

    @classmethod
    def default(cls) -> CountryVocabulary:
        text = resources.files("sistercities.data").joinpath("countries.json").read_text("utf-8")
        return cls(json.loads(text))

    @classmethod
    def identity(cls) -> CountryVocabulary:
        """Vocabulary that only normalizes whitespace and Unicode form."""
        return cls({}, warn=False)

    def canonical(self, label: str) -> str:
        key = identity_key(label)
        hit = self._lookup.get(key)
        if hit is not None:
            return hit
        if self.warn and key not in self._warned:
            self._warned.add(key)
            logger.warning("country %r not in vocabulary; kept verbatim", label)
        return normalize_name(label)

    def __contains__(self, label: str) -> bool:
        return identity_key(label) in self._lookup


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class CountryGraph:
    """Weighted country network.

    ``weights`` maps a sorted pair of distinct countries to the number of city
    partnerships spanning them; ``self_weights`` counts partnerships inside a
    country.
    """

    countries: tuple[str, ...]
    weights: dict[tuple[str, str], int] = field(default_factory=dict)
    self_weights: dict[str, int] = field(default_factory=dict)

    def weight(self, a: str, b: str) -> int:
        if a == b:
            return self.self_weights.get(a, 0)
        return self.weights.get(_pair(a, b), 0)

    @property
    def n_international_links(self) -> int:
        return len(self.weights)

    def total_weight(self) -> int:
        return sum(self.weights.values()) + sum(self.self_weights.values())

    def to_graph(self) -> Graph:
        edges = [(a, b, w) for (a, b), w in sorted(self.weights.items())]
        edges += [(c, c, w) for c, w in sorted(self.self_weights.items())]
        return Graph(self.countries, edges, allow_self_loops=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["country_a", "country_b", "weight"])
        rows = [(a, b, w) for (a, b), w in self.weights.items()]
        rows += [(c, c, w) for c, w in self.self_weights.items()]
        for row in sorted(rows):
            writer.writerow(row)
        return buf.getvalue()


def country_of(node: Hashable) -> str:
    country = getattr(node, "country", None)
    if not country:
        raise GraphError(f"city {node!r} has no country label")
    return country


def aggregate_countries(
    g: Graph, vocabulary: CountryVocabulary | None = None
) -> CountryGraph:
    """Collapse a city graph onto countries.

    Each city edge adds 1 to the weight of its country pair, or to the
    country's self weight when both cities share a country.
    """
    vocab = vocabulary if vocabulary is not None else CountryVocabulary.default()
    label = [vocab.canonical(country_of(n)) for n in g.nodes]
    weights: dict[tuple[str, str], int] = {}
    self_weights: dict[str, int] = {}
    for i, j, _w in g.edges():
        a, b = label[i], label[j]
        if a == b:
            self_weights[a] = self_weights.get(a, 0) + 1
        else:
            key = _pair(a, b)
            weights[key] = weights.get(key, 0) + 1
    countries = tuple(sorted(set(label), key=lambda c: (c.casefold(), c)))
    return CountryGraph(countries, dict(sorted(weights.items())), dict(sorted(self_weights.items())))


def weighted_degree(cg: CountryGraph, country: str, include_self: bool = False) -> int:
    """Sum of international weights at ``country``; loops add twice if requested."""
    if country not in cg.countries:
        raise GraphError(f"unknown country {country!r}")
    total = sum(w for (a, b), w in cg.weights.items() if country in (a, b))
    if include_self:
        total += 2 * cg.self_weights.get(country, 0)
    return total


def city_attribute_values(
    g: Graph,
    table: Mapping[str, float],
    vocabulary: CountryVocabulary | None = None,
) -> dict[Hashable, float]:
    """Give every city the index value of its country.

    Cities whose country has no entry in ``table`` are left out.
    """
    vocab = vocabulary if vocabulary is not None else CountryVocabulary.default()
    by_country = {vocab.canonical(c): v for c, v in table.items()}
    out = {}
    for node in g.nodes:
        value = by_country.get(vocab.canonical(country_of(node)))
        if value is not None:
            out[node] = value
    return out

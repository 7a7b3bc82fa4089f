"""Parsing of sister-city listings into a canonical, undirected edge list.

Two input routes are supported:

* wikitext page snapshots, where a section heading names the source city and
  each list item names one partner (``* [[Berlin]], Germany``);
* a canonical CSV edge list with header ``city_a,country_a,city_b,country_b``.

Both produce :class:`RawPairing` records, which :func:`canonicalize` reduces
to a deduplicated set of unordered city pairs.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Literal

from .errors import IngestError

logger = logging.getLogger(__name__)

EDGE_CSV_HEADER = ("city_a", "country_a", "city_b", "country_b")

_WS = re.compile(r"\s+")


def normalize_name(text: str) -> str:
    """NFC-normalize, trim and collapse internal whitespace. Case is kept."""
    return _WS.sub(" ", unicodedata.normalize("NFC", text)).strip()


def identity_key(text: str) -> str:
    return normalize_name(text).casefold()


@dataclass(frozen=True, eq=False)
class City:
    """A city node, identified by its case-folded (name, country) pair.

    The stored strings keep the casing of the first spelling seen and are only
    used for display.
    """

    name: str
    country: str

    def __post_init__(self):
        object.__setattr__(self, "name", normalize_name(self.name))
        object.__setattr__(self, "country", normalize_name(self.country))
        if not self.name or not self.country:
            raise IngestError(f"empty city or country in {self.name!r}, {self.country!r}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.name.casefold(), self.country.casefold())

    def __eq__(self, other):
        if not isinstance(other, City):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other: City) -> bool:
        return self.key < other.key

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"City({self.name!r}, {self.country!r})"


@dataclass(frozen=True)
class RawPairing:
    source_city: str
    source_country: str
    target_city: str
    target_country: str
    origin: Literal["wikitext", "csv"] = "csv"

    def __post_init__(self):
        for name in ("source_city", "source_country", "target_city", "target_country"):
            value = normalize_name(getattr(self, name))
            if not value:
                raise IngestError(f"{name} is empty after normalization")
            object.__setattr__(self, name, value)

    @property
    def source(self) -> City:
        return City(self.source_city, self.source_country)

    @property
    def target(self) -> City:
        return City(self.target_city, self.target_country)


@dataclass(frozen=True)
class ParseWarning:
    line_no: int
    line: str
    message: str

    def __str__(self):
        return f"line {self.line_no}: {self.message}: {self.line!r}"


@dataclass(frozen=True)
class CanonicalEdgeList:
    """Deduplicated undirected city pairs.

    ``edges`` holds ``(a, b)`` tuples with ``a < b`` by identity key.
    ``bidirectional`` is the subset of edges reported from both sides.
    """

    cities: frozenset[City]
    edges: frozenset[tuple[City, City]]
    bidirectional: frozenset[tuple[City, City]] = frozenset()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def bidirectional_fraction(self) -> float:
        if not self.edges:
            return 0.0
        return len(self.bidirectional) / len(self.edges)

    def sorted_edges(self) -> list[tuple[City, City]]:
        return sorted(self.edges, key=lambda e: (e[0].key, e[1].key))

    def to_pairings(self) -> list[RawPairing]:
        """Re-expand into pairings; bidirectional edges are emitted both ways."""
        out = []
        for a, b in self.sorted_edges():
            out.append(RawPairing(a.name, a.country, b.name, b.country, "csv"))
            if (a, b) in self.bidirectional:
                out.append(RawPairing(b.name, b.country, a.name, a.country, "csv"))
        return out


# -- wikitext -----------------------------------------------------------------

_HEADING = re.compile(r"^(={2,6})\s*(.*?)\s*\1\s*$")
_LIST_ITEM = re.compile(r"^[*#]+\s*(.*)$")
_REF = re.compile(r"<ref[^>/]*/>|<ref[^>]*>.*?</ref>", re.IGNORECASE | re.DOTALL)
_COMMENT = re.compile(r"<!--.*?-->", re.DOTALL)
_ITEM = re.compile(r"^\[\[([^\[\]|]+)(?:\|([^\[\]]*))?\]\]\s*(?:,\s*(.*))?$")
_LINK = re.compile(r"\[\[([^\[\]|]+)(?:\|([^\[\]]*))?\]\]")
_PAREN_TAIL = re.compile(r"\s*\([^()]*\)\s*$")


def _unlink(text: str) -> str:
    """Replace ``[[target|display]]`` markup by its display text."""
    return _LINK.sub(lambda m: m.group(2) or m.group(1), text)


def _clean_country(text: str) -> str:
    text = _unlink(text)
    previous = None
    while previous != text:
        previous = text
        text = _PAREN_TAIL.sub("", text)
    return normalize_name(text.strip(" .;,'\""))


def _balanced(line: str) -> bool:
    return line.count("[[") == line.count("]]") and line.count("{{") == line.count("}}")


def parse_wikitext_listing(
    page_text: str, page_scope: str
) -> tuple[list[RawPairing], list[ParseWarning]]:
    """Extract pairings from one wikitext listing page.

    Args:
        page_text: Raw wikitext. Section headings (``== Madrid ==``) set the
            source city; list items ``* [[Partner]], Country`` or
            ``* [[Partner|Shown]], Country`` name its partners.
        page_scope: Country of every source city on this page.

    Returns:
        The recognised pairings in page order and one warning per list item
        (or table/template line) that could not be parsed.
    """
    pairings: list[RawPairing] = []
    warnings: list[ParseWarning] = []
    scope = normalize_name(page_scope)
    if not scope:
        raise IngestError("page scope is empty")
    source: str | None = None

    def warn(line_no, line, message):
        w = ParseWarning(line_no, line, message)
        warnings.append(w)
        logger.warning("%s", w)

    for line_no, raw in enumerate(page_text.splitlines(), start=1):
        line = _COMMENT.sub("", raw).strip()
        if not line:
            continue

        heading = _HEADING.match(line)
        if heading:
            title = normalize_name(_unlink(heading.group(2)))
            source = title or None
            continue

        if line.startswith("{|") or line.startswith("{{"):
            warn(line_no, raw, "table or template outside the list grammar")
            continue

        item = _LIST_ITEM.match(line)
        if not item:
            continue
        body = _REF.sub("", item.group(1)).strip()

        if not _balanced(body):
            warn(line_no, raw, "unbalanced link brackets")
            continue
        if "{{" in body:
            warn(line_no, raw, "template outside the list grammar")
            continue
        if source is None:
            warn(line_no, raw, "list item before any city heading")
            continue

        m = _ITEM.match(body)
        if not m:
            warn(line_no, raw, "list item does not match '[[City]], Country'")
            continue
        target, display, tail = m.group(1), m.group(2), m.group(3)
        target = target.split("#", 1)[0]
        city = normalize_name(display or target)
        country = _clean_country(tail) if tail else ""
        if not country and "," in target and not display:
            city_part, _, country_part = target.rpartition(",")
            city, country = normalize_name(city_part), normalize_name(country_part)
        if not city or not country:
            warn(line_no, raw, "no partner country and no resolvable link target")
            continue

        pairing = RawPairing(source, scope, city, country, "wikitext")
        if pairing.source == pairing.target:
            warn(line_no, raw, "city listed as its own sister")
            continue
        pairings.append(pairing)

    return pairings, warnings


# -- canonical form -----------------------------------------------------------


def _ordered(a: City, b: City) -> tuple[City, City]:
    return (a, b) if a.key <= b.key else (b, a)


def canonicalize(pairings: Iterable[RawPairing]) -> CanonicalEdgeList:
    """Reduce directed pairing reports to unique undirected city pairs.

    A pair reported in either direction yields one edge (union semantics);
    self-pairs are dropped with a warning.
    """
    pairings = list(pairings)
    if not pairings:
        raise IngestError("canonicalize needs at least one pairing")

    # First spelling seen wins for display; identity is case-folded.
    spelling: dict[City, City] = {}
    directed: set[tuple[City, City]] = set()
    warnings = []
    for p in pairings:
        a = spelling.setdefault(p.source, p.source)
        b = spelling.setdefault(p.target, p.target)
        if a == b:
            msg = f"self-pair discarded: {a!r}"
            warnings.append(msg)
            logger.warning(msg)
            continue
        directed.add((a, b))

    edges = set()
    both = set()
    for a, b in directed:
        e = _ordered(a, b)
        edges.add(e)
        if (b, a) in directed:
            both.add(e)
    cities = frozenset(spelling[c] for e in edges for c in e)
    return CanonicalEdgeList(cities, frozenset(edges), frozenset(both), tuple(warnings))


# -- CSV formats --------------------------------------------------------------


def read_edge_csv(csv_text: str) -> list[RawPairing]:
    """Parse the canonical ``city_a,country_a,city_b,country_b`` format."""
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    if tuple(h.strip().lower() for h in header) != EDGE_CSV_HEADER:
        raise IngestError(f"edge CSV header must be {','.join(EDGE_CSV_HEADER)}, got {header}")
    out = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise IngestError(f"edge CSV row {row_no}: expected 4 fields, got {len(row)}")
        try:
            out.append(RawPairing(*row, origin="csv"))
        except IngestError as exc:
            raise IngestError(f"edge CSV row {row_no}: {exc}") from None
    return out


def write_edge_csv(edges: CanonicalEdgeList) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EDGE_CSV_HEADER)
    for a, b in edges.sorted_edges():
        writer.writerow([a.name, a.country, b.name, b.country])
    return buf.getvalue()


def load_attribute_table(csv_text: str, attribute_name: str = "value") -> dict[str, float]:
    """Read a ``country,value`` table into a country -> float map.

    Raises:
        IngestError: on a missing header, non-numeric values (all offending
            countries are named) or a duplicated country.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise IngestError(f"{attribute_name}: empty attribute table") from None
    if len(header) < 2 or header[0] != "country":
        raise IngestError(f"{attribute_name}: header must start with 'country,value'")

    table: dict[str, float] = {}
    seen: dict[str, str] = {}
    bad = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        country = normalize_name(row[0])
        raw = row[1].strip() if len(row) > 1 else ""
        key = country.casefold()
        if key in seen:
            raise IngestError(f"{attribute_name}: duplicate country {country!r} (row {row_no})")
        seen[key] = country
        try:
            value = float(raw)
        except ValueError:
            bad.append(f"{country!r} (row {row_no}: {raw!r})")
            continue
        if not math.isfinite(value):
            bad.append(f"{country!r} (row {row_no}: {raw!r})")
            continue
        table[country] = value
    if bad:
        raise IngestError(f"{attribute_name}: non-numeric values for " + ", ".join(bad))
    return table

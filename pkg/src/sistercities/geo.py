"""Geolocation, great-circle distances and distance distributions.

Distances use the haversine formula on a sphere of radius 6371.0088 km (the
IUGG mean Earth radius). Geocoding goes through a persistent, append-only
cache so that repeated runs never contact the provider.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Literal, Mapping, Protocol, Sequence

import numpy as np

from .errors import CacheFormatError, GraphError, ProviderUnavailableError
from .ingest import City

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0088
MAX_DISTANCE_KM = 20037.6
DEFAULT_BIN_KM = 200.0
GEOCODER_URL_ENV = "SISTERCITIES_GEOCODER_URL"


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float

    def __post_init__(self):
        lat, lon = float(self.latitude), float(self.longitude)
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        if not -180.0 <= lon <= 180.0:
            raise ValueError(f"longitude {lon} outside (-180, 180]")
        if lon == -180.0:
            lon = 180.0
        object.__setattr__(self, "latitude", lat)
        object.__setattr__(self, "longitude", lon)


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance between two points."""
    phi1 = math.radians(a.latitude)
    phi2 = math.radians(b.latitude)
    dphi = phi2 - phi1
    dlmb = math.radians(b.longitude - a.longitude)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def haversine_array(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Vectorized haversine over arrays of coordinates in radians."""
    dphi = lat2 - lat1
    dlmb = lon2 - lon1
    h = np.sin(dphi / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


# -- geocoding ---------------------------------------------------------------


class GeocodingProvider(Protocol):
    def lookup(self, city: str, country: str) -> GeoPoint | None:
        """Coordinates of the city, or None if it cannot be located.

        Raises ProviderUnavailableError when the service cannot be reached.
        """


class StubProvider:
    """Offline provider backed by a fixed mapping; counts its calls."""

    def __init__(self, points: Mapping[tuple[str, str], GeoPoint | tuple[float, float]]):
        self._points = {}
        for (city, country), p in points.items():
            if not isinstance(p, GeoPoint):
                p = GeoPoint(*p)
            self._points[City(city, country).key] = p
        self.calls = 0

    def lookup(self, city: str, country: str) -> GeoPoint | None:
        self.calls += 1
        return self._points.get(City(city, country).key)


class HttpGeocoder:
    """Client for a Nominatim-style JSON search endpoint.

    ``endpoint`` may contain a ``{query}`` placeholder; otherwise the query is
    sent as the ``q`` parameter. Requests are spaced by ``min_interval`` s.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, min_interval: float = 1.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self.min_interval = min_interval
        self._last = 0.0

    @classmethod
    def from_env(cls) -> HttpGeocoder | None:
        url = os.environ.get(GEOCODER_URL_ENV)
        return cls(url) if url else None

    def _url(self, query: str) -> str:
        quoted = urllib.parse.quote(query)
        if "{query}" in self.endpoint:
            return self.endpoint.replace("{query}", quoted)
        sep = "&" if "?" in self.endpoint else "?"
        return f"{self.endpoint}{sep}format=json&limit=1&q={quoted}"

    def lookup(self, city: str, country: str) -> GeoPoint | None:
        wait = self.min_interval - (time.monotonic() - self._last)
        if wait > 0:
            time.sleep(wait)
        url = self._url(f"{city}, {country}")
        try:
            with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise ProviderUnavailableError(f"geocoder unreachable: {exc}") from exc
        finally:
            self._last = time.monotonic()
        if isinstance(payload, list):
            payload = payload[0] if payload else None
        if not payload or "lat" not in payload:
            return None
        return GeoPoint(float(payload["lat"]), float(payload["lon"]))


@dataclass(frozen=True)
class CacheRecord:
    city: str
    country: str
    point: GeoPoint | None

    def to_line(self) -> str:
        for part in (self.city, self.country):
            if "|" in part or "\n" in part:
                raise CacheFormatError(f"cannot store {part!r}: contains '|' or newline")
        if self.point is None:
            return f"{self.city}|{self.country}|||absent\n"
        return f"{self.city}|{self.country}|{self.point.latitude!r}|{self.point.longitude!r}|ok\n"

    @classmethod
    def from_line(cls, line: str, line_no: int = 0) -> CacheRecord:
        parts = line.rstrip("\n").split("|")
        if len(parts) != 5:
            raise CacheFormatError(f"cache line {line_no}: expected 5 fields: {line!r}")
        city, country, lat, lon, status = parts
        try:
            if status == "ok":
                return cls(city, country, GeoPoint(float(lat), float(lon)))
            if status == "absent" and not lat and not lon:
                return cls(city, country, None)
        except ValueError as exc:
            raise CacheFormatError(f"cache line {line_no}: {exc}: {line!r}") from None
        raise CacheFormatError(f"cache line {line_no}: bad status or coordinates: {line!r}")


class GeocodeCache:
    """Append-only ``city|country|lat|lon|status`` file, status ``ok``/``absent``.

    With ``path=None`` the cache lives in memory only.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: dict[tuple[str, str], CacheRecord] = {}
        if self.path is not None and self.path.exists():
            text = self.path.read_text(encoding="utf-8")
            for line_no, line in enumerate(text.splitlines(), start=1):
                if not line.strip():
                    continue
                rec = CacheRecord.from_line(line, line_no)
                self._records[City(rec.city, rec.country).key] = rec

    def __len__(self):
        return len(self._records)

    def __contains__(self, city: City) -> bool:
        return city.key in self._records

    def get(self, city: City) -> CacheRecord | None:
        return self._records.get(city.key)

    def put(self, city: City, point: GeoPoint | None) -> None:
        rec = CacheRecord(city.name, city.country, point)
        self._records[city.key] = rec
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as f:
                f.write(rec.to_line())

    def located(self) -> dict[City, GeoPoint]:
        return {
            City(r.city, r.country): r.point for r in self._records.values() if r.point is not None
        }


def geocode_with_cache(
    city: City, cache: GeocodeCache, provider: GeocodingProvider | None
) -> GeoPoint | None:
    """Cached lookup. Misses go to ``provider`` and are persisted, negatives too.

    Without a provider a miss returns None and nothing is written.
    """
    rec = cache.get(city)
    if rec is not None:
        return rec.point
    if provider is None:
        return None
    point = provider.lookup(city.name, city.country)
    cache.put(city, point)
    return point


def geocode_all(
    cities: Iterable[City], cache: GeocodeCache, provider: GeocodingProvider | None = None
) -> dict[City, GeoPoint]:
    located = {}
    for city in sorted(set(cities)):
        p = geocode_with_cache(city, cache, provider)
        if p is not None:
            located[city] = p
    return located


# -- distance distributions -----------------------------------------------------


@dataclass(frozen=True)
class DistanceStats:
    population: Literal["connected_pairs", "all_pairs_baseline"]
    bin_width_km: float
    counts: tuple[int, ...]
    mean_km: float
    n_pairs: int
    n_skipped: int = 0
    sampled: bool = False

    @property
    def histogram(self) -> list[tuple[float, int]]:
        return [(i * self.bin_width_km, c) for i, c in enumerate(self.counts)]

    def to_csv(self) -> str:
        lines = ["bin_low_km,count"]
        lines += [f"{lo:g},{c}" for lo, c in self.histogram]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "population": self.population,
            "bin_width_km": self.bin_width_km,
            "mean_km": self.mean_km,
            "n_pairs": self.n_pairs,
            "n_skipped": self.n_skipped,
            "sampled": self.sampled,
            "histogram": [[lo, c] for lo, c in self.histogram],
        }


class _HistogramAccumulator:
    def __init__(self, bin_width_km: float):
        if not bin_width_km > 0:
            raise ValueError("bin width must be positive")
        self.bin_width = float(bin_width_km)
        self.counts = np.zeros(int(math.ceil(MAX_DISTANCE_KM / self.bin_width)) + 1, np.int64)
        self.partial_sums: list[float] = []
        self.n = 0

    def add(self, d: np.ndarray) -> None:
        if len(d) == 0:
            return
        bins = np.floor(d / self.bin_width).astype(np.int64)
        self.counts += np.bincount(bins, minlength=len(self.counts))[: len(self.counts)]
        self.partial_sums.append(float(d.sum()))
        self.n += len(d)

    def finish(self, population, n_skipped=0, sampled=False) -> DistanceStats:
        if self.n == 0:
            raise GraphError("no pair has both endpoints located")
        last = int(np.flatnonzero(self.counts).max())
        return DistanceStats(
            population,
            self.bin_width,
            tuple(int(c) for c in self.counts[: last + 1]),
            math.fsum(self.partial_sums) / self.n,
            self.n,
            n_skipped,
            sampled,
        )


def distance_distribution(
    pairs: Iterable[tuple[Hashable, Hashable]],
    located: Mapping[Hashable, GeoPoint],
    bin_width_km: float = DEFAULT_BIN_KM,
    population: Literal["connected_pairs", "all_pairs_baseline"] = "connected_pairs",
) -> DistanceStats:
    """Histogram and mean distance of the pairs whose endpoints are both located."""
    acc = _HistogramAccumulator(bin_width_km)
    dists = []
    skipped = 0
    for a, b in pairs:
        pa, pb = located.get(a), located.get(b)
        if pa is None or pb is None:
            skipped += 1
            continue
        dists.append(haversine_km(pa, pb))
    if skipped:
        logger.warning("%d pairs skipped: endpoint not located", skipped)
    acc.add(np.asarray(dists, dtype=float))
    return acc.finish(population, skipped)


def all_pairs_distance_distribution(
    located: Mapping[Hashable, GeoPoint],
    bin_width_km: float = DEFAULT_BIN_KM,
    *,
    sample: int | None = None,
    seed: int = 0,
) -> DistanceStats:
    """Distance distribution over every unordered pair of located cities.

    With ``sample`` only that many uniformly drawn distinct pairs are used.
    """
    nodes = sorted(located, key=lambda n: getattr(n, "key", str(n)))
    n = len(nodes)
    lat = np.radians([located[c].latitude for c in nodes])
    lon = np.radians([located[c].longitude for c in nodes])
    acc = _HistogramAccumulator(bin_width_km)
    if sample is not None:
        if n < 2:
            raise GraphError("need at least 2 located cities")
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, size=sample)
        j = rng.integers(0, n - 1, size=sample)
        j = j + (j >= i)
        acc.add(haversine_array(lat[i], lon[i], lat[j], lon[j]))
        return acc.finish("all_pairs_baseline", sampled=True)
    for i in range(n - 1):
        acc.add(haversine_array(lat[i], lon[i], lat[i + 1 :], lon[i + 1 :]))
    if acc.n != n * (n - 1) // 2:
        raise AssertionError("all-pairs count mismatch")
    return acc.finish("all_pairs_baseline")


@dataclass(frozen=True)
class DistanceComparison:
    bin_lows_km: tuple[float, ...]
    observed_freq: tuple[float, ...]
    baseline_freq: tuple[float, ...]
    observed_cdf: tuple[float, ...]
    baseline_cdf: tuple[float, ...]
    ks_statistic: float
    mean_difference_km: float
    observed_mean_km: float = 0.0
    baseline_mean_km: float = 0.0

    def to_dict(self) -> dict:
        return {
            "ks_statistic": self.ks_statistic,
            "mean_difference_km": self.mean_difference_km,
            "observed_mean_km": self.observed_mean_km,
            "baseline_mean_km": self.baseline_mean_km,
            "bins": [
                {
                    "bin_low_km": lo,
                    "observed_freq": of,
                    "baseline_freq": bf,
                    "observed_cdf": oc,
                    "baseline_cdf": bc,
                }
                for lo, of, bf, oc, bc in zip(
                    self.bin_lows_km,
                    self.observed_freq,
                    self.baseline_freq,
                    self.observed_cdf,
                    self.baseline_cdf,
                )
            ],
        }


def compare_distributions(observed: DistanceStats, baseline: DistanceStats) -> DistanceComparison:
    """Normalized histograms, CDFs, their maximum gap (KS) and mean difference."""
    if observed.bin_width_km != baseline.bin_width_km:
        raise ValueError(
            f"bin widths differ: {observed.bin_width_km} vs {baseline.bin_width_km}"
        )
    size = max(len(observed.counts), len(baseline.counts))
    o = np.zeros(size)
    b = np.zeros(size)
    o[: len(observed.counts)] = observed.counts
    b[: len(baseline.counts)] = baseline.counts
    of = o / o.sum()
    bf = b / b.sum()
    oc = np.cumsum(o) / o.sum()
    bc = np.cumsum(b) / b.sum()
    return DistanceComparison(
        tuple(i * observed.bin_width_km for i in range(size)),
        tuple(of.tolist()),
        tuple(bf.tolist()),
        tuple(oc.tolist()),
        tuple(bc.tolist()),
        float(np.max(np.abs(oc - bc))),
        observed.mean_km - baseline.mean_km,
        observed.mean_km,
        baseline.mean_km,
    )


# -- GeoJSON --------------------------------------------------------------------


def _arc_geometry(a: GeoPoint, b: GeoPoint) -> dict:
    lon1, lat1, lon2, lat2 = a.longitude, a.latitude, b.longitude, b.latitude
    if abs(lon2 - lon1) <= 180.0:
        return {"type": "LineString", "coordinates": [[lon1, lat1], [lon2, lat2]]}
    # Shorter way round crosses the antimeridian: unwrap, cut at +-180.
    unwrapped = lon2 - 360.0 if lon2 > lon1 else lon2 + 360.0
    edge = 180.0 if unwrapped > lon1 else -180.0
    t = (edge - lon1) / (unwrapped - lon1)
    lat_cut = lat1 + t * (lat2 - lat1)
    return {
        "type": "MultiLineString",
        "coordinates": [
            [[lon1, lat1], [edge, lat_cut]],
            [[-edge, lat_cut], [lon2, lat2]],
        ],
    }


def export_arcs_geojson(
    edges: Iterable[tuple[Hashable, Hashable]], located: Mapping[Hashable, GeoPoint]
) -> dict:
    """FeatureCollection with one feature per edge whose endpoints are located."""
    features = []
    skipped = 0
    for a, b in edges:
        pa, pb = located.get(a), located.get(b)
        if pa is None or pb is None:
            skipped += 1
            continue
        props = {"source": str(a), "target": str(b), "distance_km": haversine_km(pa, pb)}
        for key, node in (("source_country", a), ("target_country", b)):
            country = getattr(node, "country", None)
            if country:
                props[key] = country
        features.append({"type": "Feature", "properties": props, "geometry": _arc_geometry(pa, pb)})
    if skipped:
        logger.warning("%d edges without located endpoints left out of GeoJSON", skipped)
    return {"type": "FeatureCollection", "features": features, "skipped": skipped}


def located_edges(
    edges: Sequence[tuple[Hashable, Hashable]], located: Mapping[Hashable, GeoPoint]
) -> list[tuple[Hashable, Hashable]]:
    return [(a, b) for a, b in edges if a in located and b in located]

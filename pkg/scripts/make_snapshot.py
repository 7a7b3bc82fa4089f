"""Regenerate the synthetic snapshot shipped in ``sistercities/data/snapshot``.

The snapshot is a stand-in for a real Wikipedia extraction: country names
are real, but city names, coordinates, partnerships and country indexes are
all synthetic. Degrees are heavy-tailed (most cities have one partner),
pairing is mildly degree-assortative and ignores geography.

    python scripts/make_snapshot.py [--seed 2013] [--cities 2400]
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "sistercities" / "data" / "snapshot"

# country, rough centroid (lat, lon), relative weight
COUNTRIES = [
    ("USA", 39.8, -98.6, 40), ("France", 46.6, 2.4, 30), ("Germany", 51.1, 10.4, 28),
    ("UK", 54.0, -2.5, 22), ("Russia", 56.0, 38.0, 15), ("Poland", 52.0, 19.4, 12),
    ("Japan", 36.2, 138.2, 12), ("Italy", 42.8, 12.6, 12), ("China", 35.0, 104.2, 12),
    ("Ukraine", 49.0, 31.4, 10), ("Sweden", 62.0, 15.0, 7), ("Norway", 61.0, 9.0, 6),
    ("Spain", 40.2, -3.7, 6), ("Finland", 63.0, 26.0, 6), ("Brazil", -10.8, -52.9, 5),
    ("Mexico", 23.6, -102.5, 5), ("Canada", 56.1, -106.3, 5), ("Romania", 45.9, 24.9, 5),
    ("Belgium", 50.6, 4.6, 5), ("The Netherlands", 52.2, 5.3, 5), ("Turkey", 39.0, 35.2, 5),
    ("Czech Republic", 49.8, 15.5, 4), ("Hungary", 47.2, 19.5, 4), ("Austria", 47.6, 14.1, 4),
    ("Denmark", 56.0, 9.5, 4), ("Portugal", 39.6, -8.0, 3), ("Greece", 39.1, 21.8, 3),
    ("Bulgaria", 42.7, 25.5, 3), ("Lithuania", 55.2, 23.9, 3), ("Latvia", 56.9, 24.6, 2),
    ("Estonia", 58.6, 25.0, 2), ("Serbia", 44.0, 20.9, 3), ("Croatia", 45.1, 15.2, 2),
    ("Slovakia", 48.7, 19.7, 2), ("Israel", 31.0, 34.9, 3), ("South Korea", 36.5, 127.9, 3),
    ("Taiwan", 23.7, 121.0, 2), ("Argentina", -38.4, -63.6, 3), ("Chile", -35.7, -71.5, 2),
    ("Venezuela", 6.4, -66.6, 2), ("Colombia", 4.6, -74.3, 2), ("Peru", -9.2, -75.0, 2),
    ("Cuba", 21.5, -77.8, 1), ("Australia", -25.3, 133.8, 3), ("New Zealand", -40.9, 174.9, 1),
    ("India", 20.6, 79.0, 2), ("Philippines", 12.9, 121.8, 2), ("Indonesia", -0.8, 113.9, 1),
    ("South Africa", -30.6, 22.9, 1), ("Nigeria", 9.1, 8.7, 1), ("Egypt", 26.8, 30.8, 1),
    ("Morocco", 31.8, -7.1, 1), ("Iceland", 64.9, -19.0, 1), ("Ireland", 53.4, -8.2, 1),
    ("Belarus", 53.7, 27.9, 2), ("Georgia", 42.3, 43.4, 1), ("Armenia", 40.1, 45.0, 1),
    ("Kazakhstan", 48.0, 66.9, 1), ("Palestine", 31.9, 35.2, 1), ("Switzerland", 46.8, 8.2, 2),
]

SYLLABLES = [
    "ar", "bel", "cor", "dan", "el", "fen", "gar", "hol", "is", "jor", "kal", "lin",
    "mar", "nor", "os", "pel", "quin", "ros", "sal", "tor", "ul", "ven", "wen", "yr",
    "zan", "bra", "dro", "ga", "li", "mo", "ne", "ri", "sta", "vi", "lo", "ka",
]
SUFFIXES = ["", "burg", "ville", "ia", "ton", "grad", "stad", "polis", "ford", "heim", "ano"]


def city_names(rng: np.random.Generator, n: int) -> list[str]:
    names: set[str] = set()
    out = []
    while len(out) < n:
        parts = rng.choice(SYLLABLES, size=rng.integers(2, 4))
        name = ("".join(parts) + rng.choice(SUFFIXES)).capitalize()
        if name not in names:
            names.add(name)
            out.append(name)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2013)
    ap.add_argument("--cities", type=int, default=2400)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    weights = np.array([c[3] for c in COUNTRIES], dtype=float)
    country_idx = rng.choice(len(COUNTRIES), size=args.cities, p=weights / weights.sum())
    names = city_names(rng, args.cities)
    lat = np.array([COUNTRIES[c][1] for c in country_idx]) + rng.normal(0, 3.0, args.cities)
    lon = np.array([COUNTRIES[c][2] for c in country_idx]) + rng.normal(0, 5.0, args.cities)
    lat = np.clip(lat, -89.0, 89.0)
    lon = (lon + 180.0) % 360.0 - 180.0

    # Heavy-tailed target degrees: ~60% ones, a few hubs.
    degree = np.minimum(rng.zipf(2.1, size=args.cities), 80)
    stubs = np.repeat(np.arange(args.cities), degree)
    # Sorting stubs by a noisy degree key pairs similar degrees: assortativity.
    key = np.log(degree[stubs]) + rng.normal(0, 1.6, len(stubs))
    stubs = stubs[np.argsort(key, kind="stable")]
    edges = set()
    for a, b in zip(stubs[0::2], stubs[1::2]):
        if a != b:
            edges.add((min(a, b), max(a, b)))
    # Triadic closure: partners of a city sometimes twin with each other.
    nbrs: dict[int, list[int]] = {}
    for a, b in sorted(edges):
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    for c in sorted(nbrs):
        if len(nbrs[c]) >= 2 and rng.random() < 0.35:
            a, b = rng.choice(nbrs[c], size=2, replace=False)
            edges.add((min(a, b), max(a, b)))
    edges = sorted(edges)

    used = sorted({c for e in edges for c in e})
    OUT.mkdir(parents=True, exist_ok=True)

    def city(i):
        return names[i], COUNTRIES[country_idx[i]][0]

    with (OUT / "edges.csv").open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["city_a", "country_a", "city_b", "country_b"])
        for a, b in edges:
            if rng.random() < 0.5:
                a, b = b, a
            w.writerow([*city(a), *city(b)])
            if rng.random() < 0.3:
                w.writerow([*city(b), *city(a)])

    with (OUT / "geocache.txt").open("w", encoding="utf-8") as f:
        for i in used:
            name, country = city(i)
            if rng.random() < 0.012:
                f.write(f"{name}|{country}|||absent\n")
            else:
                f.write(f"{name}|{country}|{round(float(lat[i]), 4)!r}|{round(float(lon[i]), 4)!r}|ok\n")

    # Synthetic country indexes, loosely tied to country weight.
    size = np.log(weights)
    tables = {
        "gdp": np.exp(size + rng.normal(6.0, 1.0, len(COUNTRIES))),
        "gdp_per_capita": np.exp(rng.normal(9.5, 0.8, len(COUNTRIES)) + 0.2 * size),
        "hdi": np.clip(rng.normal(0.8, 0.08, len(COUNTRIES)) + 0.01 * size, 0.3, 0.99),
        "political_stability": rng.uniform(2.0, 9.0, len(COUNTRIES)),
    }
    for name, vals in tables.items():
        with (OUT / f"{name}.csv").open("w", newline="", encoding="utf-8") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["country", "value"])
            for (country, *_), v in zip(COUNTRIES, vals):
                w.writerow([country, f"{v:.6g}"])
    print(f"{len(used)} cities, {len(edges)} edges -> {OUT}")


if __name__ == "__main__":
    main()

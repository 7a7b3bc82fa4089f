"""Acceptance criteria, one test each.

Every test records a single PASS/FAIL line (shown in the pytest terminal
summary, or inline with ``-s``) before asserting.

Criterion 6 compares against published reference values only when a
comparable edge-list snapshot is supplied through the environment variable
SISTERCITIES_REFERENCE_SNAPSHOT (a ``city_a,country_a,city_b,country_b``
CSV); otherwise that part is reported as skipped.
"""

import csv
import json
import math
import os
import time
import unicodedata
from pathlib import Path

import numpy as np
import pytest
from acceptance_log import LINES
from builders import complete_graph, path_graph, star_graph, two_cliques_bridged
from oracles import (
    best_partition,
    betweenness_oracle,
    components_oracle,
    modularity_oracle,
    random_graph,
    random_weighted_graph,
)

from sistercities.aggregate import CountryVocabulary, aggregate_countries
from sistercities.centrality import betweenness, top_k_ranking
from sistercities.cli import run as cli_run
from sistercities.community import louvain, modularity
from sistercities.data import snapshot_path
from sistercities.geo import (
    GeoPoint,
    all_pairs_distance_distribution,
    distance_distribution,
    haversine_km,
)
from sistercities.graph import (
    Graph,
    average_clustering,
    average_path_length,
    build_graph,
    connected_components,
    giant_component,
    network_summary,
)
from sistercities.ingest import canonicalize, read_edge_csv
from sistercities.nullmodels import (
    assortativity_zscore,
    degree_preserving_randomize,
    degree_values,
    pearson_assortativity,
)

REFERENCE_ENV = "SISTERCITIES_REFERENCE_SNAPSHOT"

# Published values for the 2012 crawl.
REFERENCE = {
    "city": {"n_nodes": 11618, "n_edges": 15225, "avg_clustering": 0.11,
             "giant_component_fraction": 0.6135, "avg_path_length": 6.74},
    "country": {"n_nodes": 207, "n_edges": 2933, "avg_clustering": 0.43,
                "giant_component_fraction": 1.0, "avg_path_length": 2.12},
}
REFERENCE_DEGREE_R = 0.3407


def report(number, title, checks, elapsed=None, limit=None):
    """Record one line for the criterion and fail if any check failed.

    ``checks`` is a list of (name, passed, detail) where passed may be None
    for a part that was skipped.
    """
    timing_ok = limit is None or elapsed < limit
    if limit is not None:
        checks = checks + [("runtime", timing_ok, f"{elapsed:.1f}s < {limit}s")]
    failed = [c for c in checks if c[1] is False]
    skipped = [c for c in checks if c[1] is None]
    status = "PASS" if not failed else "FAIL"
    parts = [f"{name}: {detail}" for name, ok, detail in checks if ok is not None]
    parts += [f"{name}: SKIPPED ({detail})" for name, _, detail in skipped]
    line = f"[{status}] criterion {number} {title} | " + "; ".join(parts)
    LINES.append(line)
    print(line)
    assert not failed, line


# -- 1 ---------------------------------------------------------------------------


def test_criterion_1_betweenness_oracle():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(200):
        g = random_graph(np.random.default_rng(seed), max_nodes=8)
        bc = betweenness(g)
        ref = betweenness_oracle(g)
        worst = max(worst, max((abs(bc[n] - r) for n, r in zip(g.nodes, ref)), default=0.0))
    elapsed = time.perf_counter() - start
    report(1, "betweenness vs path enumeration", [
        ("200 graphs, max |error|", worst <= 1e-9, f"{worst:.2e} <= 1e-9"),
    ], elapsed, 10)


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_modularity_and_louvain():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        g = random_weighted_graph(rng, max_nodes=10, loops=True)
        labels = rng.integers(0, 4, size=g.n_nodes).tolist()
        worst = max(worst, abs(modularity(g, labels) - modularity_oracle(g, labels)))
    g = two_cliques_bridged(4)
    q_best, _ = best_partition(g)
    gaps = [q_best - louvain(g, seed=s).modularity for s in range(10)]
    elapsed = time.perf_counter() - start
    report(2, "modularity oracle and Louvain optimality", [
        ("modularity max |error| over 200 graphs", worst <= 1e-12, f"{worst:.2e} <= 1e-12"),
        ("two 4-cliques: Q_best - Q_louvain over 10 seeds", max(map(abs, gaps)) <= 1e-12,
         f"Q_best={q_best:.6f}, max gap {max(map(abs, gaps)):.1e}"),
    ], elapsed, 30)


# -- 3 ---------------------------------------------------------------------------


def fixture_500(seed=0):
    """500 nodes, 1200 edges, heterogeneous degrees."""
    rng = np.random.default_rng(seed)
    weights = 1.0 / np.arange(1, 501) ** 0.6
    weights /= weights.sum()
    pairs = set()
    while len(pairs) < 1200:
        a, b = rng.choice(500, size=2, replace=False, p=weights)
        pairs.add((min(int(a), int(b)), max(int(a), int(b))))
    return Graph(range(500), sorted(pairs))


def test_criterion_3_null_model_soundness():
    start = time.perf_counter()
    g = fixture_500()
    degrees = g.degrees()
    bad = 0
    for seed in range(1000):
        h = degree_preserving_randomize(g, seed=seed)
        distinct = {frozenset((u, v)) for u, v, _ in h.edge_list()}
        if (
            h.degrees() != degrees
            or h.n_self_loops
            or len(distinct) != h.n_edges
            or h.n_edges != g.n_edges
        ):
            bad += 1
    small_z = 0
    for trial in range(100):
        rng = np.random.default_rng(10_000 + trial)
        values = dict(zip(g.nodes, rng.normal(size=g.n_nodes).tolist()))
        rep = assortativity_zscore(g, values, n_replicas=100, seed=trial)
        small_z += abs(rep.z_score) < 4
    elapsed = time.perf_counter() - start
    report(3, "null-model soundness", [
        ("1000 swap replicas preserving degrees, no loops/multi-edges", bad == 0, f"{bad} violations"),
        ("random attribute |Z| < 4", small_z >= 99, f"{small_z}/100 trials (need >= 99)"),
    ], elapsed, 60)


# -- 4 ---------------------------------------------------------------------------


def test_criterion_4_structural_statistics():
    fixtures = {
        # name: (graph, <C>, GC fraction, <d>)
        "triangle": (complete_graph(3), 1.0, 1.0, 1.0),
        "path P3": (path_graph(3), 0.0, 1.0, 4 / 3),
        "star S3": (star_graph(3), 0.0, 1.0, 1.5),
        "K5": (complete_graph(5), 1.0, 1.0, 1.0),
        "triangle + isolate": (Graph(range(4), [(0, 1), (1, 2), (0, 2)]), 0.75, 0.75, 1.0),
    }
    checks = []
    for name, (g, c, gc, d) in fixtures.items():
        got = (average_clustering(g), giant_component(g)[1], average_path_length(g))
        checks.append((name, got == (c, gc, d), f"(C, GC, d) = {tuple(round(x, 6) for x in got)}"))
    handshake = partition = 0
    for seed in range(300):
        g = random_graph(np.random.default_rng(seed), max_nodes=8)
        handshake += sum(g.degrees()) == 2 * g.n_edges
        comps = connected_components(g)
        partition += (
            sorted(i for comp in comps for i in comp) == list(range(g.n_nodes))
            and sorted(map(sorted, comps)) == sorted(map(sorted, components_oracle(g)))
        )
    checks.append(("handshake on 300 random graphs", handshake == 300, f"{handshake}/300"))
    checks.append(("component partition on 300 random graphs", partition == 300, f"{partition}/300"))
    report(4, "structural statistics", checks)


# -- 5 ---------------------------------------------------------------------------


def test_criterion_5_geo():
    checks = []
    p = GeoPoint(52.52, 13.405)
    checks.append(("identity", haversine_km(p, p) == 0.0, f"{haversine_km(p, p)} km"))
    anti = haversine_km(GeoPoint(0, 0), GeoPoint(0, 180))
    checks.append(("antipodal", abs(anti - math.pi * 6371.0088) <= 0.1, f"{anti:.4f} km"))
    arc = haversine_km(GeoPoint(0, 0), GeoPoint(0, 1))
    checks.append(("1 degree arc", abs(arc - 111.195) <= 0.01, f"{arc:.4f} km"))

    rng = np.random.default_rng(5)
    located = {i: GeoPoint(float(rng.uniform(-85, 85)), float(rng.uniform(-180, 180))) for i in range(300)}
    pairs = [(int(a), int(b)) for a, b in rng.integers(0, 300, size=(2000, 2)) if a != b]
    stats = distance_distribution(pairs, located)
    mean = 0.0
    for k, (a, b) in enumerate(pairs, start=1):
        mean += (haversine_km(located[a], located[b]) - mean) / k
    err = abs(stats.mean_km - mean)
    checks.append(("mean vs streaming mean", err <= 1e-9, f"|diff| = {err:.1e}"))
    base = all_pairs_distance_distribution(located)
    checks.append(("all-pairs count", base.n_pairs == 300 * 299 // 2 == sum(base.counts),
                   f"{base.n_pairs} = 300*299/2"))
    report(5, "geo", checks)


# -- 6 ---------------------------------------------------------------------------


def _identity(name):
    return " ".join(unicodedata.normalize("NFC", name).split()).casefold()


def recount(csv_path: Path):
    """N and K straight from the CSV rows, independent of the graph code."""
    vocab = CountryVocabulary.default()
    cities, edges = set(), set()
    with csv_path.open(newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            a = (_identity(row["city_a"]), _identity(row["country_a"]))
            b = (_identity(row["city_b"]), _identity(row["country_b"]))
            if a == b:
                continue
            cities |= {a, b}
            edges.add(frozenset((a, b)))
    display = {}
    with csv_path.open(newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            for side in "ab":
                display.setdefault(_identity(row[f"country_{side}"]), row[f"country_{side}"].strip())
    country = {k: vocab.canonical(v) for k, v in display.items()}
    countries = {country[c[1]] for c in cities}
    links = set()
    for e in edges:
        a, b = sorted(e)
        if country[a[1]] != country[b[1]]:
            links.add(frozenset((country[a[1]], country[b[1]])))
    return {"city": (len(cities), len(edges)), "country": (len(countries), len(links))}


def summaries(csv_path: Path, workers=1):
    g = build_graph(canonicalize(read_edge_csv(csv_path.read_text(encoding="utf-8"))))
    cg = aggregate_countries(g)
    return g, cg, {
        "city": network_summary(g, workers=workers),
        "country": network_summary(cg.to_graph(), workers=workers),
    }


def reference_checks(csv_path: Path):
    """Comparison with the published values, within the stated tolerances."""
    g, cg, rows = summaries(csv_path)
    checks = []
    for net, ref in REFERENCE.items():
        got = rows[net].to_dict()
        if net == "country":
            # the published K counts international links, loops excluded
            got["n_edges"] = cg.n_international_links
        for key, want in ref.items():
            ok = abs(got[key] - want) <= 0.05 * abs(want)
            checks.append((f"{net} {key}", ok, f"{got[key]:.4g} vs {want} (+-5%)"))
    r = pearson_assortativity(g, degree_values(g))
    checks.append(("degree r", abs(r - REFERENCE_DEGREE_R) <= 0.02, f"{r:.4f} vs {REFERENCE_DEGREE_R} (+-0.02)"))
    top_city = [str(e.node) for e in top_k_ranking(g, 3).entries]
    checks.append(("Saint Petersburg in city top 3", "Saint Petersburg" in top_city, ", ".join(top_city)))
    top_country = [str(e.node) for e in top_k_ranking(cg.to_graph(), 3, "weighted-degree").entries]
    checks.append(("USA in country top 3", "USA" in top_country, ", ".join(top_country)))
    return checks


def test_criterion_6_snapshot_regression():
    path = snapshot_path()
    counts = recount(path)
    _, cg, first = summaries(path)
    _, _, second = summaries(path)
    _, _, parallel = summaries(path, workers=2)
    checks = []
    for net in ("city", "country"):
        s = first[net]
        k = cg.n_international_links if net == "country" else s.n_edges
        checks.append((f"{net} N, K", (s.n_nodes, k) == counts[net], f"{s.n_nodes}, {k}"))
        drift = max(
            abs(getattr(other[net], f) - getattr(s, f))
            for other in (second, parallel)
            for f in ("avg_clustering", "giant_component_fraction", "avg_path_length")
        )
        checks.append((f"{net} C/GC/d stable", drift <= 1e-12,
                       f"C={s.avg_clustering:.4f} GC={s.giant_component_fraction:.4f} "
                       f"d={s.avg_path_length:.4f}, drift {drift:.1e}"))
    supplied = os.environ.get(REFERENCE_ENV)
    if supplied:
        checks += reference_checks(Path(supplied))
    else:
        checks.append(("published values", None, f"set {REFERENCE_ENV} to a comparable snapshot"))
    report(6, "snapshot regression", checks)


def test_reference_comparison_is_not_vacuous():
    # the synthetic snapshot is far smaller than the 2012 crawl
    checks = reference_checks(snapshot_path())
    assert len(checks) == 13
    assert not next(ok for name, ok, _ in checks if name == "city n_nodes")


# -- 7 ---------------------------------------------------------------------------


def _outputs(d: Path):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


def test_criterion_7_determinism(tmp_path):
    edges = str(snapshot_path())
    commands = {
        "assort": ["assort", "--input", edges, "--property", "degree", "--replicas", "20",
                   "--attribute", f"gdp={snapshot_path('gdp.csv')}",
                   "--attribute", f"hdi={snapshot_path('hdi.csv')}"],
        "communities": ["communities", "--input", edges],
        "distances": ["distances", "--input", edges, "--geocache", str(snapshot_path("geocache.txt")),
                      "--sample", "200000"],
    }
    checks = []
    for name, cmd in commands.items():
        runs = []
        for tag, extra in (("a", []), ("b", []), ("parallel", ["--workers", "2"])):
            out = tmp_path / f"{name}_{tag}"
            code = cli_run(cmd + ["--seed", "11", "--out", str(out)] + extra)
            runs.append(_outputs(out) if code == 0 else None)
        ok = runs[0] is not None and runs[0] == runs[1] == runs[2]
        manifest = json.loads((tmp_path / f"{name}_a" / "manifest.json").read_text())
        ok = ok and manifest["runs"][name]["seed"] == 11
        checks.append((name, ok, f"{len(runs[0] or {})} files identical x3 (serial, serial, 2 workers)"))
    report(7, "determinism", checks)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))

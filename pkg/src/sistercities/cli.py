"""Command-line entry point.

Every subcommand reads its inputs, writes its data products under ``--out``
and records inputs, seed, versions and output checksums in
``<out>/manifest.json``.

Examples:
    sistercities ingest --input pages/ --out out
    sistercities stats --input out/edges.csv --out out
    sistercities assort --input out/edges.csv --property degree --replicas 100 --seed 7
    sistercities assort --input out/edges.csv --attribute hdi=hdi.csv
    sistercities rank --input out/edges.csv --network country --top-k 20
    sistercities communities --input out/edges.csv --seed 1
    sistercities distances --input out/edges.csv --geocache geocache.txt
    sistercities export --input out/edges.csv --network country --format dot
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .aggregate import CountryVocabulary, aggregate_countries, city_attribute_values
from .centrality import top_k_ranking
from .community import louvain
from .errors import SisterCitiesError
from .export import to_dot, to_graphml
from .geo import (
    DEFAULT_BIN_KM,
    GeocodeCache,
    HttpGeocoder,
    all_pairs_distance_distribution,
    compare_distributions,
    distance_distribution,
    export_arcs_geojson,
    geocode_all,
)
from .graph import (
    build_graph,
    ccdf_csv,
    degree_distribution,
    format_summary_table,
    network_summary,
)
from .ingest import (
    CanonicalEdgeList,
    canonicalize,
    load_attribute_table,
    parse_wikitext_listing,
    read_edge_csv,
    write_edge_csv,
)
from .nullmodels import assortativity_zscore, format_assortativity_table

logger = logging.getLogger("sistercities")

# Child seeds: property k of an ``assort`` run starts at seed + k * SEED_STRIDE,
# its replicas then use consecutive seeds.
SEED_STRIDE = 100_000
WIKITEXT_SUFFIXES = {".wiki", ".wikitext", ".txt", ".mediawiki"}


class Run:
    """Collects outputs of one subcommand and writes the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs: list[Path] = []
        self.outputs: dict[str, str] = {}

    def input(self, path: str | Path) -> Path:
        p = Path(path)
        if not p.exists():
            raise SisterCitiesError(f"input not found: {p}")
        self.inputs.append(p)
        return p

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.outputs[name] = _sha256(path.read_bytes())
        return path

    def write_json(self, name: str, payload) -> Path:
        return self.write(name, json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")

    def finish(self) -> None:
        flags = {
            k: v
            for k, v in sorted(vars(self.args).items())
            if k not in ("out", "func", "command", "verbose")
        }
        entry = {
            "seed": self.args.seed,
            "flags": flags,
            "inputs": [{"path": str(p), "sha256": _hash_path(p)} for p in self.inputs],
            "outputs": dict(sorted(self.outputs.items())),
            "versions": {
                "sistercities": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
            },
        }
        path = self.out / "manifest.json"
        manifest = {"runs": {}}
        if path.exists():
            try:
                manifest = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                logger.warning("existing manifest unreadable; replacing it")
        manifest.setdefault("runs", {})[self.args.command] = entry
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _hash_path(p: Path) -> str:
    if p.is_file():
        return _sha256(p.read_bytes())
    h = hashlib.sha256()
    for f in sorted(q for q in p.rglob("*") if q.is_file()):
        h.update(str(f.relative_to(p)).encode())
        h.update(_sha256(f.read_bytes()).encode())
    return h.hexdigest()


def _load_city_graph(run: Run):
    text = run.input(run.args.input).read_text(encoding="utf-8")
    return build_graph(canonicalize(read_edge_csv(text)))


def _network(run: Run):
    g = _load_city_graph(run)
    if run.args.network == "country":
        return aggregate_countries(g).to_graph()
    return g


def _emit(text: str) -> None:
    sys.stdout.write(text)


# -- subcommands -----------------------------------------------------------------


def cmd_ingest(run: Run) -> None:
    src = run.input(run.args.input)
    pairings = []
    report: dict = {"pages": {}}
    if src.is_dir() or src.suffix.lower() in WIKITEXT_SUFFIXES:
        files = sorted(f for f in src.iterdir() if f.suffix.lower() in WIKITEXT_SUFFIXES) if src.is_dir() else [src]
        for f in files:
            scope = f.stem.replace("_", " ")
            found, warnings = parse_wikitext_listing(f.read_text(encoding="utf-8"), scope)
            pairings.extend(found)
            report["pages"][f.name] = {
                "scope": scope,
                "pairings": len(found),
                "warnings": [str(w) for w in warnings],
            }
    else:
        pairings = read_edge_csv(src.read_text(encoding="utf-8"))
    edges = canonicalize(pairings)
    report.update(
        n_pairings=len(pairings),
        n_cities=len(edges.cities),
        n_edges=len(edges.edges),
        bidirectional_fraction=edges.bidirectional_fraction,
        warnings=list(edges.warnings),
    )
    run.write("edges.csv", write_edge_csv(edges))
    run.write_json("ingest_report.json", report)
    _emit(f"{len(pairings)} pairings -> {len(edges.edges)} edges among "
          f"{len(edges.cities)} cities (bidirectional {edges.bidirectional_fraction:.3f})\n")


def cmd_stats(run: Run) -> None:
    g = _load_city_graph(run)
    cg = aggregate_countries(g)
    rows = {
        "city network": network_summary(g, workers=run.args.workers),
        "country network": network_summary(cg.to_graph(), workers=run.args.workers),
    }
    payload = {name.split()[0]: s.to_dict() for name, s in rows.items()}
    payload["country"]["n_international_links"] = cg.n_international_links
    run.write_json("summary.json", payload)
    table = format_summary_table(rows)
    run.write("summary.txt", table)
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n" if run.args.format == "json" else table)


def cmd_degree_dist(run: Run) -> None:
    g = _network(run)
    weighted = run.args.weighted or run.args.network == "country"
    ccdf = degree_distribution(g, weighted=weighted, include_self=run.args.include_self)
    text = ccdf_csv(ccdf)
    run.write(f"ccdf_{run.args.network}.csv", text)
    _emit(text)


def cmd_assort(run: Run) -> None:
    g = _load_city_graph(run)
    props: list[tuple[str, object]] = []
    if run.args.property == "degree" or not run.args.attribute:
        props.append(("city degree", "degree"))
    vocab = CountryVocabulary.default()
    for spec in run.args.attribute or []:
        name, sep, path = spec.partition("=")
        if not sep:
            raise SisterCitiesError(f"--attribute expects NAME=PATH, got {spec!r}")
        table = load_attribute_table(run.input(path).read_text(encoding="utf-8"), name)
        props.append((name, city_attribute_values(g, table, vocab)))
    reports = []
    for k, (name, prop) in enumerate(props):
        reports.append(
            assortativity_zscore(
                g,
                prop,
                n_replicas=run.args.replicas,
                seed=run.args.seed + k * SEED_STRIDE,
                name=name,
                workers=run.args.workers,
            )
        )
    run.write_json("assortativity.json", [r.to_dict() for r in reports])
    table = format_assortativity_table(reports)
    run.write("assortativity.txt", table)
    _emit(table)


def cmd_rank(run: Run) -> None:
    g = _network(run)
    primary = "weighted-degree" if run.args.network == "country" else "degree"
    ranking = top_k_ranking(
        g,
        run.args.top_k,
        primary,
        weighted_paths=run.args.weighted,
        include_self=run.args.include_self,
        workers=run.args.workers,
    )
    name = f"ranking_{run.args.network}"
    run.write(f"{name}.csv", ranking.to_csv())
    run.write(f"{name}.txt", ranking.to_text())
    run.write_json(f"{name}.json", ranking.to_dicts())
    _emit(ranking.to_csv() if run.args.format == "csv" else ranking.to_text())


def cmd_communities(run: Run) -> None:
    g = aggregate_countries(_load_city_graph(run)).to_graph()
    part = louvain(g, seed=run.args.seed, resolution=run.args.resolution)
    run.write("communities.csv", part.to_csv())
    run.write("communities.dot", to_dot(g, part.assignment, name="country network"))
    summary = {
        "seed": run.args.seed,
        "modularity": part.modularity,
        "levels": list(part.levels),
        "n_communities": part.n_communities,
        "communities": [sorted(str(n) for n in c) for c in part.communities()],
    }
    run.write_json("communities.json", summary)
    lines = [f"Q = {part.modularity:.4f}, {part.n_communities} communities"]
    for cid, members in enumerate(part.communities()):
        strongest = sorted(members, key=lambda n: (-g.strength(g.index(n), False), str(n)))[:6]
        lines.append(f"  {cid}: {len(members)} countries, e.g. {', '.join(map(str, strongest))}")
    _emit("\n".join(lines) + "\n")


def _located(run: Run, g):
    cache = GeocodeCache(run.input(run.args.geocache))
    provider = HttpGeocoder.from_env()
    return geocode_all(g.nodes, cache, provider)


def cmd_distances(run: Run) -> None:
    if not run.args.geocache:
        raise SisterCitiesError("distances needs --geocache")
    g = _load_city_graph(run)
    located = _located(run, g)
    edges = [(a, b) for a, b, _ in g.edge_list()]
    observed = distance_distribution(edges, located, run.args.bin_km)
    baseline = all_pairs_distance_distribution(
        located, run.args.bin_km, sample=run.args.sample, seed=run.args.seed
    )
    cmp = compare_distributions(observed, baseline)
    run.write("hist_connected.csv", observed.to_csv())
    run.write("hist_baseline.csv", baseline.to_csv())
    run.write_json(
        "distances.json",
        {
            "n_cities": g.n_nodes,
            "n_located": len(located),
            "connected_pairs": observed.to_dict(),
            "all_pairs_baseline": baseline.to_dict(),
            "comparison": cmp.to_dict(),
        },
    )
    _emit(
        f"located {len(located)}/{g.n_nodes} cities\n"
        f"mean distance, connected pairs: {observed.mean_km:.0f} km ({observed.n_pairs} pairs)\n"
        f"mean distance, all pairs:       {baseline.mean_km:.0f} km ({baseline.n_pairs} pairs)\n"
        f"KS gap {cmp.ks_statistic:.4f}, mean difference {cmp.mean_difference_km:.1f} km\n",
    )


def cmd_export(run: Run) -> None:
    fmt = run.args.format or "graphml"
    if fmt == "geojson":
        if not run.args.geocache:
            raise SisterCitiesError("geojson export needs --geocache")
        g = _load_city_graph(run)
        doc = export_arcs_geojson([(a, b) for a, b, _ in g.edge_list()], _located(run, g))
        run.write("arcs.geojson", json.dumps(doc, ensure_ascii=False) + "\n")
        return
    g_city = _load_city_graph(run)
    if run.args.network == "country":
        cg = aggregate_countries(g_city)
        g = cg.to_graph()
        csv_text = cg.to_csv()
    else:
        g = g_city
        csv_text = None
    name = f"{run.args.network}_network"
    if fmt == "graphml":
        run.write(f"{name}.graphml", to_graphml(g))
    elif fmt == "dot":
        run.write(f"{name}.dot", to_dot(g, name=name))
    elif fmt == "csv":
        if csv_text is None:
            edges = CanonicalEdgeList(frozenset(g.nodes), frozenset((a, b) for a, b, _ in g.edge_list()))
            csv_text = write_edge_csv(edges)
        run.write(f"{name}.csv", csv_text)
    else:
        raise SisterCitiesError(f"export does not support --format {fmt}")


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sistercities", description="Sister-city network analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="edge-list CSV (ingest: wikitext file/dir or CSV)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--format", choices=["json", "csv", "text", "graphml", "dot", "geojson"])
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(func=func)
        return p

    add("ingest", cmd_ingest, "parse listings into a canonical edge list")
    add("stats", cmd_stats, "summary statistics of city and country networks")

    p = add("degree-dist", cmd_degree_dist, "complementary cumulative degree distribution")
    p.add_argument("--network", choices=["city", "country"], default="city")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--include-self", action="store_true")

    p = add("assort", cmd_assort, "assortativity Z-scores against null models")
    p.add_argument("--property", choices=["degree"], help="include degree assortativity")
    p.add_argument("--attribute", action="append", metavar="NAME=CSV", help="country,value table")
    p.add_argument("--replicas", type=int, default=100)

    p = add("rank", cmd_rank, "top-k by (weighted) degree with betweenness ranks")
    p.add_argument("--network", choices=["city", "country"], default="city")
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--weighted", action="store_true", help="betweenness over 1/weight lengths")
    p.add_argument("--include-self", action="store_true")

    p = add("communities", cmd_communities, "Louvain communities of the country network")
    p.add_argument("--resolution", type=float, default=1.0)

    p = add("distances", cmd_distances, "connected vs all-pairs distance distributions")
    p.add_argument("--geocache", help="geocode cache file")
    p.add_argument("--bin-km", type=float, default=DEFAULT_BIN_KM)
    p.add_argument("--sample", type=int, help="sample this many baseline pairs")

    p = add("export", cmd_export, "GraphML/DOT/CSV/GeoJSON export")
    p.add_argument("--network", choices=["city", "country"], default="city")
    p.add_argument("--geocache", help="geocode cache file (geojson)")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        r = Run(args)
        args.func(r)
        r.finish()
    except (SisterCitiesError, ValueError, OSError) as exc:
        print(f"sistercities {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

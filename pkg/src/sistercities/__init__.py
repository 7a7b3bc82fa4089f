"""Build and analyse sister-city networks.

The pipeline turns sister-city listings into an undirected city network,
aggregates it into a weighted country network and computes structural
statistics, degree and betweenness rankings, randomization-based
assortativity Z-scores, Louvain communities and great-circle distance
distributions.
"""

from .aggregate import CountryGraph, aggregate_countries, weighted_degree
from .centrality import CentralityRanking, betweenness, top_k_ranking
from .community import Partition, louvain, modularity
from .errors import (
    CacheFormatError,
    GraphError,
    IngestError,
    ProviderUnavailableError,
    RandomizationError,
    UndefinedCorrelationError,
)
from .geo import (
    DistanceStats,
    GeoPoint,
    all_pairs_distance_distribution,
    compare_distributions,
    distance_distribution,
    export_arcs_geojson,
    geocode_with_cache,
    haversine_km,
)
from .graph import (
    Graph,
    NetworkSummary,
    average_clustering,
    average_path_length,
    build_graph,
    degree_distribution,
    giant_component,
    network_summary,
)
from .ingest import (
    CanonicalEdgeList,
    City,
    RawPairing,
    canonicalize,
    load_attribute_table,
    parse_wikitext_listing,
)
from .nullmodels import (
    AssortativityReport,
    assortativity_zscore,
    degree_preserving_randomize,
    pearson_assortativity,
    shuffle_attributes,
)

__version__ = "0.1.0"

__all__ = [
    "AssortativityReport",
    "CacheFormatError",
    "CanonicalEdgeList",
    "CentralityRanking",
    "City",
    "CountryGraph",
    "DistanceStats",
    "GeoPoint",
    "Graph",
    "GraphError",
    "IngestError",
    "NetworkSummary",
    "Partition",
    "ProviderUnavailableError",
    "RandomizationError",
    "RawPairing",
    "UndefinedCorrelationError",
    "aggregate_countries",
    "all_pairs_distance_distribution",
    "assortativity_zscore",
    "average_clustering",
    "average_path_length",
    "betweenness",
    "build_graph",
    "canonicalize",
    "compare_distributions",
    "degree_distribution",
    "degree_preserving_randomize",
    "distance_distribution",
    "export_arcs_geojson",
    "geocode_with_cache",
    "giant_component",
    "haversine_km",
    "load_attribute_table",
    "louvain",
    "modularity",
    "network_summary",
    "parse_wikitext_listing",
    "pearson_assortativity",
    "shuffle_attributes",
    "top_k_ranking",
    "weighted_degree",
]

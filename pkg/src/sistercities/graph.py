"""Undirected graph container and the structural statistics of a network.

The :class:`Graph` is immutable after construction. Nodes are arbitrary
hashable identities mapped to contiguous indices; all algorithms work on the
indices and adjacency lists, so they never depend on node hashing order.
"""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np

from .errors import GraphError
from .ingest import CanonicalEdgeList

logger = logging.getLogger(__name__)

# Sources are processed in fixed-size chunks whatever the worker count, so the
# merge order (and thus every float sum) is the same serially and in parallel.
SOURCE_CHUNK = 256


class Graph:
    """Undirected graph with optional positive edge weights and self-loops.

    Args:
        nodes: Node identities, in index order. Must be unique.
        edges: ``(u, v)`` or ``(u, v, weight)`` tuples over ``nodes``.
        allow_self_loops: Accept ``(u, u)`` edges. Self-loops are kept out of
            the adjacency lists and count twice toward degree and strength.
    """

    def __init__(
        self,
        nodes: Iterable[Hashable],
        edges: Iterable[tuple] = (),
        *,
        allow_self_loops: bool = False,
    ):
        self._nodes = tuple(nodes)
        self._index = {n: i for i, n in enumerate(self._nodes)}
        if len(self._index) != len(self._nodes):
            raise GraphError("duplicate node identities")
        self.allow_self_loops = allow_self_loops

        adj: list[list[int]] = [[] for _ in self._nodes]
        weights: dict[tuple[int, int], float] = {}
        loops: dict[int, float] = {}
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = 1.0
            else:
                u, v, w = e
            w = float(w)
            if not w > 0:
                raise GraphError(f"edge ({u!r}, {v!r}) has non-positive weight {w}")
            try:
                i, j = self._index[u], self._index[v]
            except KeyError as exc:
                raise GraphError(f"edge endpoint {exc.args[0]!r} is not a node") from None
            if i == j:
                if not allow_self_loops:
                    raise GraphError(f"self-loop on {u!r} not allowed")
                if i in loops:
                    raise GraphError(f"duplicate self-loop on {u!r}")
                loops[i] = w
                continue
            key = (i, j) if i < j else (j, i)
            if key in weights:
                raise GraphError(f"duplicate edge ({u!r}, {v!r})")
            weights[key] = w
            adj[i].append(j)
            adj[j].append(i)
        for lst in adj:
            lst.sort()
        self._adj = adj
        self._weights = weights
        self._loops = loops

    # -- basic accessors --------------------------------------------------

    @property
    def nodes(self) -> tuple:
        return self._nodes

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        """Edge count, self-loops included."""
        return len(self._weights) + len(self._loops)

    @property
    def n_self_loops(self) -> int:
        return len(self._loops)

    @property
    def is_weighted(self) -> bool:
        return any(w != 1.0 for w in self._weights.values()) or any(
            w != 1.0 for w in self._loops.values()
        )

    def index(self, node: Hashable) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise GraphError(f"unknown node {node!r}") from None

    def __contains__(self, node) -> bool:
        return node in self._index

    def __len__(self) -> int:
        return len(self._nodes)

    def __repr__(self):
        return f"Graph(N={self.n_nodes}, K={self.n_edges})"

    def neighbors(self, i: int) -> list[int]:
        """Sorted neighbor indices of node ``i``, excluding itself."""
        return self._adj[i]

    def adjacency(self) -> list[list[int]]:
        return self._adj

    def degree(self, i: int) -> int:
        return len(self._adj[i]) + (2 if i in self._loops else 0)

    def degrees(self) -> list[int]:
        return [self.degree(i) for i in range(self.n_nodes)]

    def weight(self, i: int, j: int) -> float:
        if i == j:
            return self._loops.get(i, 0.0)
        return self._weights.get((i, j) if i < j else (j, i), 0.0)

    def self_loop_weight(self, i: int) -> float:
        return self._loops.get(i, 0.0)

    def strength(self, i: int, include_self: bool = True) -> float:
        s = sum(self.weight(i, j) for j in self._adj[i])
        if include_self:
            s += 2.0 * self._loops.get(i, 0.0)
        return s

    def total_weight(self) -> float:
        return sum(self._weights.values()) + sum(self._loops.values())

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Yield ``(i, j, w)`` with ``i <= j`` in index order."""
        items = list(self._weights.items()) + [((i, i), w) for i, w in self._loops.items()]
        for (i, j), w in sorted(items):
            yield i, j, w

    def edge_list(self) -> list[tuple[Hashable, Hashable, float]]:
        return [(self._nodes[i], self._nodes[j], w) for i, j, w in self.edges()]

    def subgraph(self, nodes: Iterable[Hashable]) -> Graph:
        """Induced subgraph, nodes kept in this graph's index order."""
        keep = {self.index(n) for n in nodes}
        order = sorted(keep)
        edges = [
            (self._nodes[i], self._nodes[j], w)
            for i, j, w in self.edges()
            if i in keep and j in keep
        ]
        return Graph(
            [self._nodes[i] for i in order], edges, allow_self_loops=self.allow_self_loops
        )


def build_graph(edges: CanonicalEdgeList, extra_nodes: Iterable[Hashable] = ()) -> Graph:
    """City graph from a canonical edge list, nodes sorted by identity."""
    nodes = set(edges.cities)
    nodes.update(extra_nodes)
    ordered = sorted(nodes)
    return Graph(ordered, edges.sorted_edges())


# -- clustering ---------------------------------------------------------------


def local_clustering(g: Graph) -> list[float]:
    """Per-node clustering; nodes of degree < 2 get 0. Self-loops ignored."""
    adj_sets = [set(a) for a in g.adjacency()]
    out = []
    for v, nbrs in enumerate(adj_sets):
        k = len(nbrs)
        if k < 2:
            out.append(0.0)
            continue
        links = sum(len(nbrs & adj_sets[u]) for u in nbrs)  # = 2T(v)
        out.append(links / (k * (k - 1)))
    return out


def average_clustering(g: Graph) -> float:
    if g.n_nodes == 0:
        raise GraphError("average clustering of an empty graph")
    return float(np.mean(local_clustering(g)))


# -- components and distances -------------------------------------------------


def connected_components(g: Graph) -> list[list[int]]:
    """Components as sorted index lists, largest first.

    Equal sizes are ordered by their smallest node index.
    """
    seen = [False] * g.n_nodes
    comps = []
    adj = g.adjacency()
    for s in range(g.n_nodes):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        comp.sort()
        comps.append(comp)
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


def giant_component(g: Graph) -> tuple[frozenset, float]:
    """Largest connected component as a node set and its fraction of N."""
    if g.n_nodes == 0:
        raise GraphError("giant component of an empty graph")
    gc = connected_components(g)[0]
    return frozenset(g.nodes[i] for i in gc), len(gc) / g.n_nodes


def _bfs_distance_sum(adj: Sequence[Sequence[int]], source: int) -> tuple[int, int]:
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    total = reached = 0
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dv
                total += dv
                reached += 1
                queue.append(w)
    return total, reached


_WORKER_ADJ: list[list[int]] | None = None


def _init_worker(adj):
    global _WORKER_ADJ
    _WORKER_ADJ = adj


def _chunk_distance_sum(sources: Sequence[int]) -> tuple[int, int]:
    total = reached = 0
    for s in sources:
        t, r = _bfs_distance_sum(_WORKER_ADJ, s)
        total += t
        reached += r
    return total, reached


def _chunks(seq: Sequence[int], size: int = SOURCE_CHUNK) -> list[Sequence[int]]:
    return [seq[i : i + size] for i in range(0, len(seq), size)]


def average_path_length(
    g: Graph,
    *,
    workers: int = 1,
    sample_sources: int | None = None,
    seed: int = 0,
) -> float:
    """Mean hop distance over all node pairs of the giant component.

    Exact breadth-first search from every giant-component node by default.
    ``sample_sources`` restricts the sources to a seeded random subset, for
    graphs too large for the exact computation.
    """
    gc = connected_components(g)[0] if g.n_nodes else []
    if len(gc) < 2:
        raise GraphError("average path length needs a giant component of at least 2 nodes")
    sources: Sequence[int] = gc
    if sample_sources is not None and sample_sources < len(gc):
        rng = np.random.default_rng(seed)
        sources = sorted(rng.choice(gc, size=sample_sources, replace=False).tolist())
    chunks = _chunks(sources)
    adj = g.adjacency()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(adj,)) as ex:
            parts = list(ex.map(_chunk_distance_sum, chunks))
    else:
        _init_worker(adj)
        parts = [_chunk_distance_sum(c) for c in chunks]
    # integer sums: exact regardless of merge order
    total = sum(p[0] for p in parts)
    reached = sum(p[1] for p in parts)
    return total / reached


# -- degree distribution ------------------------------------------------------


def node_scores(g: Graph, weighted: bool = False, include_self: bool = False) -> list[float]:
    """Degree, or weighted degree (strength), of every node."""
    if not weighted:
        return [float(d) for d in g.degrees()]
    return [g.strength(i, include_self=include_self) for i in range(g.n_nodes)]


def degree_distribution(
    g: Graph, weighted: bool = False, include_self: bool = False
) -> list[tuple[float, float]]:
    """Complementary cumulative distribution ``P(deg >= d)`` per distinct d."""
    if g.n_nodes == 0:
        return []
    scores = np.sort(np.asarray(node_scores(g, weighted, include_self)))
    values, first = np.unique(scores, return_index=True)
    n = len(scores)
    return [(float(v), (n - int(f)) / n) for v, f in zip(values, first)]


def ccdf_csv(ccdf: list[tuple[float, float]]) -> str:
    lines = ["degree,ccdf"]
    for d, p in ccdf:
        d_txt = str(int(d)) if float(d).is_integer() else repr(d)
        lines.append(f"{d_txt},{p!r}")
    return "\n".join(lines) + "\n"


# -- summary ------------------------------------------------------------------


@dataclass(frozen=True)
class NetworkSummary:
    n_nodes: int
    n_edges: int
    n_self_loops: int
    avg_clustering: float
    giant_component_fraction: float
    avg_path_length: float

    def to_dict(self) -> dict:
        return asdict(self)


def network_summary(g: Graph, *, workers: int = 1) -> NetworkSummary:
    """N, K, <C>, giant-component fraction and <d> of one network.

    Clustering and path length are topological: weights and self-loops are
    ignored. ``n_edges`` counts self-loops, which are also reported separately.
    """
    _, frac = giant_component(g)
    return NetworkSummary(
        n_nodes=g.n_nodes,
        n_edges=g.n_edges,
        n_self_loops=g.n_self_loops,
        avg_clustering=average_clustering(g),
        giant_component_fraction=frac,
        avg_path_length=average_path_length(g, workers=workers),
    )


def format_summary_table(rows: dict[str, NetworkSummary]) -> str:
    """Aligned text table with one row per named network."""
    header = f"{'network':<18}{'N':>9}{'K':>9}{'<C>':>8}{'% GC':>9}{'<d>':>7}"
    lines = [header, "-" * len(header)]
    for name, s in rows.items():
        lines.append(
            f"{name:<18}{s.n_nodes:>9}{s.n_edges:>9}{s.avg_clustering:>8.2f}"
            f"{100 * s.giant_component_fraction:>8.2f}%{s.avg_path_length:>7.2f}"
        )
    return "\n".join(lines) + "\n"

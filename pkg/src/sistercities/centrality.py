"""Betweenness centrality (Brandes) and degree-ranked top-k tables."""

from __future__ import annotations

import csv
import heapq
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Literal, Sequence

from .graph import SOURCE_CHUNK, Graph, node_scores

logger = logging.getLogger(__name__)


def _accumulate_unweighted(adj: Sequence[Sequence[int]], s: int, bc: list[float]) -> None:
    n = len(adj)
    dist = [-1] * n
    sigma = [0] * n
    dist[s] = 0
    sigma[s] = 1
    order = [s]
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        dv = dist[v] + 1
        sv = sigma[v]
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dv
                order.append(w)
            if dist[w] == dv:
                sigma[w] += sv
    delta = [0.0] * n
    for w in reversed(order):
        dw = dist[w] - 1
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in adj[w]:
            if dist[v] == dw:
                delta[v] += sigma[v] * coeff
        if w != s:
            bc[w] += delta[w]


def _accumulate_weighted(
    adj: Sequence[Sequence[int]],
    lengths: Sequence[Sequence[Fraction]],
    s: int,
    bc: list[float],
) -> None:
    # Exact rational path lengths so that ties between equal-length paths
    # are detected without a float tolerance.
    n = len(adj)
    dist: list[Fraction | None] = [None] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    done = [False] * n
    dist[s] = Fraction(0)
    sigma[s] = 1
    heap = [(Fraction(0), s)]
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if done[v] or d != dist[v]:
            continue
        done[v] = True
        order.append(v)
        for w, length in zip(adj[v], lengths[v]):
            alt = d + length
            if dist[w] is None or alt < dist[w]:
                dist[w] = alt
                sigma[w] = sigma[v]
                preds[w] = [v]
                heapq.heappush(heap, (alt, w))
            elif alt == dist[w] and not done[w]:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = [0.0] * n
    for w in reversed(order):
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
        if w != s:
            bc[w] += delta[w]


_STATE: dict = {}


def _init_worker(adj, lengths):
    _STATE["adj"] = adj
    _STATE["lengths"] = lengths


def _chunk(sources: Sequence[int]) -> list[float]:
    adj, lengths = _STATE["adj"], _STATE["lengths"]
    bc = [0.0] * len(adj)
    for s in sources:
        if lengths is None:
            _accumulate_unweighted(adj, s, bc)
        else:
            _accumulate_weighted(adj, lengths, s, bc)
    return bc


def betweenness(g: Graph, weighted: bool = False, *, workers: int = 1) -> dict[Hashable, float]:
    """Unnormalized betweenness, each unordered source-target pair counted once.

    With ``weighted`` an edge of weight w has length 1/w. Self-loops never lie
    on a shortest path and are ignored.
    """
    adj = g.adjacency()
    lengths = None
    if weighted:
        lengths = [[1 / Fraction(g.weight(v, w)) for w in adj[v]] for v in range(g.n_nodes)]
    sources = list(range(g.n_nodes))
    chunks = [sources[i : i + SOURCE_CHUNK] for i in range(0, len(sources), SOURCE_CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(adj, lengths)) as ex:
            parts = list(ex.map(_chunk, chunks))
    else:
        _init_worker(adj, lengths)
        parts = [_chunk(c) for c in chunks]
    total = [0.0] * g.n_nodes
    for part in parts:
        for i, x in enumerate(part):
            total[i] += x
    return {node: total[i] / 2.0 for i, node in enumerate(g.nodes)}


def betweenness_ranks(bc: dict[Hashable, float]) -> dict[Hashable, int]:
    """Rank 1 = highest betweenness; ties broken by node label."""
    ordered = sorted(bc, key=lambda n: (-bc[n], str(n)))
    return {node: r for r, node in enumerate(ordered, start=1)}


@dataclass(frozen=True)
class RankEntry:
    node: Hashable
    score: float
    betweenness: float
    betweenness_rank: int


@dataclass(frozen=True)
class CentralityRanking:
    entries: tuple[RankEntry, ...]
    primary: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rank", "node", "score", "betweenness", "betweenness_rank"])
        for r, e in enumerate(self.entries, start=1):
            writer.writerow([r, str(e.node), _num(e.score), repr(e.betweenness), e.betweenness_rank])
        return buf.getvalue()

    def to_text(self) -> str:
        width = max([len(str(e.node)) for e in self.entries] + [4])
        head = f"{'node':<{width}} | {self.primary:>15} | {'betweenness':>14}"
        lines = [head, "-" * (len(head) + 7)]
        for e in self.entries:
            lines.append(
                f"{str(e.node):<{width}} | {_num(e.score):>15} | "
                f"{e.betweenness:>14.2f} ({e.betweenness_rank})"
            )
        return "\n".join(lines) + "\n"

    def to_dicts(self) -> list[dict]:
        return [
            {
                "rank": r,
                "node": str(e.node),
                "score": e.score,
                "betweenness": e.betweenness,
                "betweenness_rank": e.betweenness_rank,
            }
            for r, e in enumerate(self.entries, start=1)
        ]


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.6g}"


def top_k_ranking(
    g: Graph,
    k: int,
    primary: Literal["degree", "weighted-degree"] = "degree",
    *,
    weighted_paths: bool = False,
    include_self: bool = False,
    workers: int = 1,
    bc: dict[Hashable, float] | None = None,
) -> CentralityRanking:
    """The k nodes with the highest (weighted) degree, with betweenness attached.

    Betweenness ranks are global over all nodes, not only the k reported.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > g.n_nodes:
        logger.warning("top-k of %d requested but graph has %d nodes; truncating", k, g.n_nodes)
        k = g.n_nodes
    if primary not in ("degree", "weighted-degree"):
        raise ValueError(f"unknown primary score {primary!r}")
    scores = node_scores(g, weighted=primary == "weighted-degree", include_self=include_self)
    if bc is None:
        bc = betweenness(g, weighted=weighted_paths, workers=workers)
    ranks = betweenness_ranks(bc)
    order = sorted(range(g.n_nodes), key=lambda i: (-scores[i], str(g.nodes[i])))[:k]
    entries = tuple(
        RankEntry(g.nodes[i], scores[i], bc[g.nodes[i]], ranks[g.nodes[i]]) for i in order
    )
    return CentralityRanking(entries, primary)

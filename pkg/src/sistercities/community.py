"""Louvain modularity optimization on weighted graphs with self-loops.

Self-loop convention: a loop of weight w counts once toward the total edge
weight m and toward its community's internal weight, and twice toward the
node strength. Under this convention coarsening a partition into one node
per community (intra-community weight becomes a loop) preserves modularity.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import GraphError
from .graph import Graph

# Guards against accepting moves whose gain is float noise.
MIN_GAIN = 1e-12


def _assignment_vector(g: Graph, assignment) -> list:
    if isinstance(assignment, Mapping):
        try:
            return [assignment[n] for n in g.nodes]
        except KeyError as exc:
            raise GraphError(f"assignment does not cover node {exc.args[0]!r}") from None
    labels = list(assignment)
    if len(labels) != g.n_nodes:
        raise GraphError("assignment length differs from node count")
    return labels


def modularity(g: Graph, assignment, resolution: float = 1.0) -> float:
    """Newman modularity of a node -> community assignment.

    ``assignment`` is a mapping keyed by node or a sequence in index order.
    """
    labels = _assignment_vector(g, assignment)
    m = g.total_weight()
    if m <= 0:
        raise GraphError("modularity undefined for a graph without edge weight")
    internal: dict = {}
    total: dict = {}
    for i, j, w in g.edges():
        if labels[i] == labels[j]:
            internal[labels[i]] = internal.get(labels[i], 0.0) + w
    for i in range(g.n_nodes):
        total[labels[i]] = total.get(labels[i], 0.0) + g.strength(i)
    q = 0.0
    for c in sorted(total, key=repr):
        q += internal.get(c, 0.0) / m - resolution * (total[c] / (2 * m)) ** 2
    return q


@dataclass
class _Level:
    nbrs: list[dict[int, float]]
    loops: list[float]
    strength: list[float]

    @classmethod
    def from_graph(cls, g: Graph) -> _Level:
        nbrs = [dict() for _ in range(g.n_nodes)]
        for i, j, w in g.edges():
            if i != j:
                nbrs[i][j] = w
                nbrs[j][i] = w
        loops = [g.self_loop_weight(i) for i in range(g.n_nodes)]
        strength = [g.strength(i) for i in range(g.n_nodes)]
        return cls(nbrs, loops, strength)

    def __len__(self):
        return len(self.nbrs)

    def coarsen(self, comm: Sequence[int], n_comm: int) -> _Level:
        nbrs = [dict() for _ in range(n_comm)]
        loops = [0.0] * n_comm
        strength = [0.0] * n_comm
        for i in range(len(self)):
            ci = comm[i]
            loops[ci] += self.loops[i]
            strength[ci] += self.strength[i]
            for j, w in self.nbrs[i].items():
                if j <= i:
                    continue
                cj = comm[j]
                if ci == cj:
                    loops[ci] += w
                else:
                    nbrs[ci][cj] = nbrs[ci].get(cj, 0.0) + w
                    nbrs[cj][ci] = nbrs[cj].get(ci, 0.0) + w
        return _Level(nbrs, loops, strength)


def _local_moves(
    level: _Level, m: float, order: Sequence[int], resolution: float
) -> tuple[list[int], bool]:
    n = len(level)
    comm = list(range(n))
    tot = list(level.strength)
    moved_any = False
    scale = resolution / (2.0 * m * m)
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            ki = level.strength[i]
            links: dict[int, float] = {}
            for j, w in level.nbrs[i].items():
                cj = comm[j]
                links[cj] = links.get(cj, 0.0) + w
            tot[ci] -= ki
            stay = links.get(ci, 0.0) / m - tot[ci] * ki * scale
            best_c, best_gain = ci, -np.inf
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] / m - tot[c] * ki * scale
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if best_c != ci and best_gain - stay > MIN_GAIN:
                comm[i] = best_c
                tot[best_c] += ki
                improved = moved_any = True
            else:
                tot[ci] += ki
    return comm, moved_any


def _renumber(comm: Sequence[int]) -> tuple[list[int], int]:
    """Contiguous ids: largest community first, ties by smallest member."""
    members: dict[int, list[int]] = {}
    for i, c in enumerate(comm):
        members.setdefault(c, []).append(i)
    ordered = sorted(members.values(), key=lambda ms: (-len(ms), ms[0]))
    new = [0] * len(comm)
    for cid, ms in enumerate(ordered):
        for i in ms:
            new[i] = cid
    return new, len(ordered)


@dataclass(frozen=True)
class Partition:
    """Community assignment with its modularity.

    ``levels`` holds the modularity of the original graph after each
    local-move phase; it is non-decreasing.
    """

    assignment: dict[Hashable, int]
    modularity: float
    levels: tuple[float, ...] = field(default=())
    seed: int | None = None

    @property
    def n_communities(self) -> int:
        return len(set(self.assignment.values()))

    def communities(self) -> list[list[Hashable]]:
        out: list[list[Hashable]] = [[] for _ in range(self.n_communities)]
        for node, c in self.assignment.items():
            out[c].append(node)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node", "community"])
        for node, c in self.assignment.items():
            writer.writerow([str(node), c])
        return buf.getvalue()


def louvain(g: Graph, seed: int = 0, resolution: float = 1.0) -> Partition:
    """Louvain modularity maximization.

    Each phase sweeps the nodes in a seeded random order, moving a node to the
    neighboring community of largest gain (lowest id on exact ties) when that
    strictly improves modularity, until a sweep makes no move; the graph is
    then coarsened to one node per community. Stops when a phase moves nothing.
    """
    m = g.total_weight()
    if m <= 0:
        raise GraphError("louvain needs a graph with positive total edge weight")
    rng = np.random.default_rng(seed)
    level = _Level.from_graph(g)
    membership = list(range(g.n_nodes))
    levels = []
    while True:
        order = rng.permutation(len(level)).tolist()
        comm, moved = _local_moves(level, m, order, resolution)
        if not moved:
            break
        comm, n_comm = _renumber(comm)
        membership = [comm[c] for c in membership]
        levels.append(modularity(g, membership, resolution))
        level = level.coarsen(comm, n_comm)
    membership, _ = _renumber(membership)
    q = modularity(g, membership, resolution)
    if not levels:
        levels.append(q)
    assignment = {node: membership[i] for i, node in enumerate(g.nodes)}
    return Partition(assignment, q, tuple(levels), seed)

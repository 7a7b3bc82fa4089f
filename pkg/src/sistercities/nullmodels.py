"""Assortativity coefficients tested against randomized null models.

Degree assortativity is compared with degree-preserving rewirings of the
network (double-edge swaps). Attribute assortativity keeps the network fixed
and permutes the node values. Replica ``i`` always uses seed ``seed + i``, so
serial and parallel runs give bit-identical reports.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import GraphError, RandomizationError, UndefinedCorrelationError
from .graph import Graph

SWAPS_PER_EDGE = 10
ATTEMPTS_PER_SWAP = 100
_BATCH = 4096


def _edge_arrays(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    pairs = [(i, j) for i, j, _ in g.edges() if i != j]
    if not pairs:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    arr = np.asarray(pairs, dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def _edge_end_r(vals: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    """Pearson r over edge ends, every edge taken in both orientations."""
    if len(u) == 0:
        raise GraphError("assortativity needs at least one edge")
    a = vals[u]
    b = vals[v]
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if lo == hi:
        raise UndefinedCorrelationError("edge-end values have zero variance")
    mu = (a.sum() + b.sum()) / (2 * len(a))
    da = a - mu
    db = b - mu
    num = 2.0 * float(np.dot(da, db))
    den = float(np.dot(da, da) + np.dot(db, db))
    return num / den


def degree_values(g: Graph) -> dict[Hashable, float]:
    return {node: float(d) for node, d in zip(g.nodes, g.degrees())}


def pearson_assortativity(g: Graph, values: Mapping[Hashable, float]) -> float:
    """Correlation of ``values`` at the two ends of every edge.

    Raises:
        GraphError: a node incident to an edge has no value, or no edges.
        UndefinedCorrelationError: all edge-end values are equal.
    """
    u, v = _edge_arrays(g)
    vals = np.full(g.n_nodes, np.nan)
    for i, node in enumerate(g.nodes):
        if node in values:
            vals[i] = float(values[node])
    ends = np.union1d(u, v)
    missing = ends[np.isnan(vals[ends])]
    if len(missing):
        names = ", ".join(repr(g.nodes[i]) for i in missing[:5])
        raise GraphError(f"{len(missing)} edge endpoints lack a value, e.g. {names}")
    return _edge_end_r(vals, u, v)


# -- degree-preserving rewiring ------------------------------------------------


def double_edge_swap(e1: tuple, e2: tuple) -> tuple[tuple, tuple]:
    """Rewire ``(a, b), (c, d)`` into ``(a, d), (c, b)``."""
    (a, b), (c, d) = e1, e2
    return (a, d), (c, b)


def _rewired_edges(
    u: np.ndarray,
    v: np.ndarray,
    n_swaps: int,
    seed: int,
    max_attempts: int | None = None,
) -> list[list[int]]:
    edges = [[int(a), int(b)] for a, b in zip(u, v)]
    k = len(edges)
    if k < 2:
        raise GraphError("degree-preserving randomization needs at least 2 edges")
    present = {(a, b) if a < b else (b, a) for a, b in edges}
    budget = max_attempts if max_attempts is not None else ATTEMPTS_PER_SWAP * max(n_swaps, 1)
    rng = np.random.default_rng(seed)
    accepted = attempts = 0
    while accepted < n_swaps:
        picks = rng.integers(0, k, size=(_BATCH, 2)).tolist()
        flips = rng.integers(0, 2, size=_BATCH).tolist()
        for (i, j), flip in zip(picks, flips):
            if accepted >= n_swaps:
                break
            if attempts >= budget:
                raise RandomizationError(
                    f"rejection budget of {budget} attempts exhausted after "
                    f"{accepted} accepted swaps",
                    accepted,
                )
            attempts += 1
            if i == j:
                continue
            a, b = edges[i]
            if flip:
                d, c = edges[j]
            else:
                c, d = edges[j]
            # (a, b), (c, d) -> (a, d), (c, b)
            if a == d or c == b:
                continue
            ad = (a, d) if a < d else (d, a)
            cb = (c, b) if c < b else (b, c)
            if ad in present or cb in present:
                continue
            present.discard((a, b) if a < b else (b, a))
            present.discard((c, d) if c < d else (d, c))
            present.add(ad)
            present.add(cb)
            edges[i] = [a, d]
            edges[j] = [c, b]
            accepted += 1
    return edges


def degree_preserving_randomize(
    g: Graph,
    n_swaps: int | None = None,
    seed: int = 0,
    *,
    max_attempts: int | None = None,
) -> Graph:
    """Random simple graph with the same degree sequence as ``g``.

    Performs ``n_swaps`` accepted double-edge swaps (default 10 per edge);
    swaps that would create a self-loop or a duplicate edge are rejected.

    Raises:
        RandomizationError: the rejection budget ran out; carries the number of
            swaps accepted so far.
    """
    if g.n_self_loops:
        raise GraphError("degree-preserving randomization expects a simple graph")
    u, v = _edge_arrays(g)
    n_swaps = SWAPS_PER_EDGE * len(u) if n_swaps is None else n_swaps
    edges = _rewired_edges(u, v, n_swaps, seed, max_attempts)
    nodes = g.nodes
    return Graph(nodes, [(nodes[a], nodes[b]) for a, b in edges])


def shuffle_attributes(values: Mapping[Hashable, float], seed: int = 0) -> dict[Hashable, float]:
    """Uniformly random reassignment of the values over the same keys."""
    keys = list(values)
    vals = np.asarray([values[k] for k in keys], dtype=float)
    perm = np.random.default_rng(seed).permutation(len(keys))
    return {k: float(x) for k, x in zip(keys, vals[perm])}


# -- Z-score -------------------------------------------------------------------


@dataclass(frozen=True)
class AssortativityReport:
    property: str
    r: float
    r_rand_mean: float
    sigma_rand: float
    z_score: float
    n_replicas: int
    seed: int
    n_edges: int

    @property
    def assortative(self) -> bool:
        return self.z_score >= 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["assortative"] = self.assortative
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _degree_replica(args) -> float:
    u, v, vals, n_swaps, seed = args
    edges = np.asarray(_rewired_edges(u, v, n_swaps, seed), dtype=np.int64)
    return _edge_end_r(vals, edges[:, 0], edges[:, 1])


def _attribute_replica(args) -> float:
    u, v, vals, covered, seed = args
    shuffled = vals.copy()
    perm = np.random.default_rng(seed).permutation(len(covered))
    shuffled[covered] = vals[covered][perm]
    return _edge_end_r(shuffled, u, v)


def _run_replicas(fn, jobs: Sequence, workers: int) -> list[float]:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(job) for job in jobs]


def assortativity_zscore(
    g: Graph,
    property: str | Mapping[Hashable, float] = "degree",
    n_replicas: int = 100,
    seed: int = 0,
    *,
    name: str | None = None,
    n_swaps: int | None = None,
    workers: int = 1,
) -> AssortativityReport:
    """Observed assortativity against its null-model distribution.

    Args:
        property: ``"degree"`` for degree assortativity, otherwise a map from
            node to value. Nodes without a value are dropped together with
            their edges; the remaining values are permuted over the valued
            nodes.
        n_replicas: Number of randomized networks, at least 2.
        n_swaps: Accepted swaps per degree replica, default 10 per edge.

    Returns:
        Report with Z = (r - mean) / sample standard deviation of the replicas.
    """
    if n_replicas < 2:
        raise ValueError("n_replicas must be at least 2")
    u, v = _edge_arrays(g)

    if isinstance(property, str):
        if property != "degree":
            raise ValueError(f"unknown property {property!r}; pass a value map")
        label = name or "degree"
        vals = np.asarray(g.degrees(), dtype=float)
        r = _edge_end_r(vals, u, v)
        swaps = SWAPS_PER_EDGE * len(u) if n_swaps is None else n_swaps
        jobs = [(u, v, vals, swaps, seed + i) for i in range(n_replicas)]
        rs = _run_replicas(_degree_replica, jobs, workers)
    else:
        label = name or "attribute"
        vals = np.full(g.n_nodes, np.nan)
        for i, node in enumerate(g.nodes):
            if node in property:
                vals[i] = float(property[node])
        keep = ~(np.isnan(vals[u]) | np.isnan(vals[v]))
        u, v = u[keep], v[keep]
        covered = np.flatnonzero(~np.isnan(vals))
        r = _edge_end_r(vals, u, v)
        jobs = [(u, v, vals, covered, seed + i) for i in range(n_replicas)]
        rs = _run_replicas(_attribute_replica, jobs, workers)

    arr = np.asarray(rs)
    mean = float(arr.mean())
    sigma = float(arr.std(ddof=1))
    if sigma > 0:
        z = (r - mean) / sigma
    else:
        z = math.nan if r == mean else math.copysign(math.inf, r - mean)
    return AssortativityReport(label, r, mean, sigma, z, n_replicas, seed, int(len(u)))


def format_assortativity_table(reports: Sequence[AssortativityReport]) -> str:
    """Aligned table; Z-scores of at least 2 are starred."""
    width = max([len(rep.property) for rep in reports] + [8])
    head = f"{'property':<{width}} {'r':>8} {'r_rand':>8} {'sigma':>8} {'Z':>9}"
    lines = [head, "-" * len(head)]
    for rep in reports:
        mark = "*" if rep.assortative else " "
        lines.append(
            f"{rep.property:<{width}} {rep.r:>8.4f} {rep.r_rand_mean:>8.4f} "
            f"{rep.sigma_rand:>8.4f} {rep.z_score:>8.2f}{mark}"
        )
    lines.append("* Z >= 2: assortative mixing")
    return "\n".join(lines) + "\n"

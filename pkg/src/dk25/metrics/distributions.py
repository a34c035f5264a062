"""Degree-based, shared-partner and distance distributions of a graph."""
from __future__ import annotations

import logging
from collections import Counter
from typing import Mapping

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..graph import Graph, GraphInputError, edge_shared_partners, largest_component

log = logging.getLogger(__name__)

EXACT_PATH_LIMIT = 5000     # above this many nodes, BFS runs from a sample of sources
DEFAULT_SOURCE_BUDGET = 1000


def nmae(est, ref) -> float:
    """Sum of absolute differences over the total reference magnitude.

    Mappings are aligned on the union of their keys (a missing key counts as
    0); sequences are compared position by position after zero-padding.
    """
    if isinstance(est, Mapping) or isinstance(ref, Mapping):
        keys = set(est) | set(ref)
        e = np.array([float(est.get(k, 0.0)) for k in keys])
        r = np.array([float(ref.get(k, 0.0)) for k in keys])
    else:
        e = np.asarray(est, dtype=float).ravel()
        r = np.asarray(ref, dtype=float).ravel()
        n = max(len(e), len(r))
        e = np.pad(e, (0, n - len(e)))
        r = np.pad(r, (0, n - len(r)))
    mass = np.abs(r).sum()
    diff = np.abs(e - r).sum()
    if mass == 0 and diff == 0:
        return 0.0
    if mass == 0:
        raise ValueError("NMAE undefined: reference has zero mass")
    return float(diff / mass)


def degree_distribution(g: Graph) -> dict[int, int]:
    if g.n_nodes == 0:
        raise GraphInputError("empty graph")
    ks, counts = np.unique(g.degrees, return_counts=True)
    return {int(k): int(c) for k, c in zip(ks, counts)}


def avg_neighbor_degree(g: Graph) -> dict[int, float]:
    """Knn: for each degree k, mean over degree-k nodes of their mean neighbour degree."""
    if g.n_nodes == 0:
        raise GraphInputError("empty graph")
    deg = g.degrees.astype(float)
    nb_sum = g.adjacency_matrix() @ deg
    has = deg > 0
    per_node = np.zeros(g.n_nodes)
    per_node[has] = nb_sum[has] / deg[has]
    out = {}
    for k in np.unique(g.degrees[has]):
        out[int(k)] = float(per_node[g.degrees == k].mean())
    return out


def edgewise_shared_partners(g: Graph) -> dict[int, int]:
    """Number of edges with exactly s common neighbours, for each s."""
    sp = edge_shared_partners(g)
    vals, counts = np.unique(sp, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def _connected(g: Graph) -> Graph:
    h, kept = largest_component(g)
    if h.n_nodes < g.n_nodes:
        log.info("distance metrics use the largest component (%d of %d nodes)", h.n_nodes, g.n_nodes)
    return h


def _sources(n: int, source_budget: int | None, seed: int) -> np.ndarray:
    budget = source_budget
    if budget is None:
        budget = n if n <= EXACT_PATH_LIMIT else DEFAULT_SOURCE_BUDGET
    if budget >= n:
        return np.arange(n)
    return np.sort(np.random.default_rng(seed).choice(n, size=budget, replace=False))


def _bfs_rows(h: Graph, sources: np.ndarray, chunk: int = 64):
    A = h.adjacency_matrix()
    for i in range(0, len(sources), chunk):
        idx = sources[i:i + chunk]
        yield idx, shortest_path(A, directed=False, unweighted=True, indices=idx)


def shortest_path_counts(g: Graph, source_budget: int | None = None, seed: int = 0) -> dict[int, int]:
    """Hop-distance histogram over ordered (source, target) pairs, source != target."""
    h = _connected(g)
    counts = Counter()
    for _, D in _bfs_rows(h, _sources(h.n_nodes, source_budget, seed)):
        d = D[np.isfinite(D) & (D > 0)].astype(np.int64)
        vals, c = np.unique(d, return_counts=True)
        counts.update(dict(zip(vals.tolist(), c.tolist())))
    return dict(sorted(counts.items()))


def shortest_path_distribution(g: Graph, source_budget: int | None = None, seed: int = 0) -> dict[int, float]:
    counts = shortest_path_counts(g, source_budget, seed)
    total = sum(counts.values())
    return {h: c / total for h, c in counts.items()} if total else {}


def closeness_centrality(g: Graph, source_budget: int | None = None, seed: int = 0) -> np.ndarray:
    """Closeness (reachable - 1) / (sum of distances) of every evaluated source node."""
    h = _connected(g)
    out = []
    for _, D in _bfs_rows(h, _sources(h.n_nodes, source_budget, seed)):
        D = np.where(np.isfinite(D), D, 0.0)
        tot = D.sum(axis=1)
        reach = (D > 0).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out.append(np.where(tot > 0, reach / tot, 0.0))
    return np.concatenate(out) if out else np.empty(0)

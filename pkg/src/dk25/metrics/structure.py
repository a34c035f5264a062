"""Maximal cliques, minimal cycle basis and adjacency spectrum."""
from __future__ import annotations

import logging
import time
from collections import Counter

import networkx as nx
import numpy as np
import scipy.sparse.linalg as sla

from ..graph import Graph, GraphInputError

log = logging.getLogger(__name__)


class MetricTimeout(RuntimeError):
    """A metric ran past its budget; ``partial`` holds what was computed so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MetricSkipped(RuntimeError):
    pass


def maximal_cliques(g: Graph, timeout: float | None = 60.0) -> dict[int, int]:
    """Histogram of maximal-clique sizes (Bron-Kerbosch with pivoting, via networkx).

    Isolated nodes are not counted as cliques.
    """
    t0 = time.perf_counter()
    counts = Counter()
    for i, c in enumerate(nx.find_cliques(g.to_networkx())):
        if len(c) > 1:
            counts[len(c)] += 1
        if timeout is not None and i % 1024 == 0 and time.perf_counter() - t0 > timeout:
            raise MetricTimeout(f"clique enumeration exceeded {timeout}s", dict(counts))
    return dict(sorted(counts.items()))


# ---------------------------------------------------------------------------
# minimal cycle basis


def _two_core_edges(g: Graph) -> list[tuple[int, int]]:
    deg = g.degrees.copy()
    alive = np.ones(g.n_nodes, bool)
    stack = list(np.flatnonzero(deg < 2))
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        alive[v] = False
        for w in g.neighbors(v):
            if alive[w]:
                deg[w] -= 1
                if deg[w] == 1:
                    stack.append(w)
    return [(int(u), int(v)) for u, v in g.edges() if alive[u] and alive[v]]


def _block_basis(edges: list, max_candidates: int) -> list[int]:
    """Minimal cycle basis lengths of one biconnected block via Horton candidates."""
    nodes = sorted({x for e in edges for x in e})
    index = {v: i for i, v in enumerate(nodes)}
    n, m = len(nodes), len(edges)
    need = m - n + 1
    if need <= 0:
        return []
    adj = [[] for _ in range(n)]
    eid = {}
    for i, (a, b) in enumerate(edges):
        a, b = index[a], index[b]
        adj[a].append(b)
        adj[b].append(a)
        eid[(a, b)] = eid[(b, a)] = i
    if n * need > max_candidates:
        raise MetricSkipped(f"block with {n} nodes and {m} edges exceeds the candidate bound")
    cands = {}
    for root in range(n):
        parent = [-1] * n
        branch = [-1] * n
        dist = [-1] * n
        dist[root] = 0
        branch[root] = root
        order = [root]
        for v in order:
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    parent[w] = v
                    branch[w] = w if v == root else branch[v]
                    order.append(w)
        path_bits = [0] * n
        for v in order[1:]:
            path_bits[v] = path_bits[parent[v]] | (1 << eid[(v, parent[v])])
        for (a, b), i in eid.items():
            if a > b or parent[a] == b or parent[b] == a or branch[a] == branch[b]:
                continue
            bits = path_bits[a] ^ path_bits[b] ^ (1 << i)
            length = dist[a] + dist[b] + 1
            if bits not in cands or cands[bits] > length:
                cands[bits] = length
    basis = {}  # leading bit -> reduced vector
    lengths = []
    for bits, length in sorted(cands.items(), key=lambda kv: kv[1]):
        v = bits
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                lengths.append(length)
                break
            v ^= basis[top]
        if len(lengths) == need:
            break
    if len(lengths) != need:
        raise RuntimeError("internal: Horton candidates did not span the cycle space")
    return lengths


def cycle_basis_distribution(g: Graph, max_candidates: int = 200_000) -> dict[int, int]:
    """Histogram of cycle lengths in a minimum-weight cycle basis.

    Trees are stripped first, each biconnected block is handled on its own, and
    a block whose Horton candidate set would exceed ``max_candidates`` makes the
    metric raise :class:`MetricSkipped`.
    """
    core = _two_core_edges(g)
    if not core:
        return {}
    h = nx.Graph(core)
    counts = Counter()
    for block in nx.biconnected_component_edges(h):
        block = list(block)
        if len(block) < 3:
            continue
        counts.update(_block_basis(block, max_candidates))
    return dict(sorted(counts.items()))


# ---------------------------------------------------------------------------
# spectrum

DENSE_LIMIT = 600


def _by_magnitude(vals: np.ndarray) -> np.ndarray:
    # bipartite spectra come in +/- pairs; put the positive one first on a tie
    mag = np.round(np.abs(vals), 9)
    return vals[np.lexsort((-vals, -mag))]


def spectrum_top(g: Graph, count: int = 20, tol: float = 1e-6) -> np.ndarray:
    """The ``count`` largest-magnitude adjacency eigenvalues, sorted by decreasing magnitude."""
    n = g.n_nodes
    if n == 0:
        raise GraphInputError("empty graph")
    A = g.adjacency_matrix().astype(float)
    if n <= DENSE_LIMIT or count >= n - 1:
        vals = np.linalg.eigvalsh(A.toarray())
        return _by_magnitude(vals)[:count]
    try:
        vals, vecs = sla.eigsh(A, k=count, which="LM", tol=1e-10, maxiter=20 * n)
    except sla.ArpackNoConvergence as exc:
        raise RuntimeError(f"eigensolver converged on {len(exc.eigenvalues)} of {count} eigenvalues") from exc
    scale = max(np.abs(vals).max(), 1.0)
    resid = np.linalg.norm(A @ vecs - vecs * vals, axis=0) / scale
    bad = int(np.sum(resid > tol))
    if bad:
        raise RuntimeError(f"eigensolver: {count - bad} of {count} eigenpairs meet the residual tolerance")
    return _by_magnitude(vals)

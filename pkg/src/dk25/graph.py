"""Undirected simple graphs and the exact 2K / clustering quantities defined on them."""
from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)

DegreeClustering = dict  # degree k (>= 2) -> mean clustering of degree-k nodes


class GraphInputError(ValueError):
    pass


class UndefinedClusteringError(ValueError):
    pass


class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    Adjacency is stored CSR-style: ``indices[indptr[v]:indptr[v+1]]`` is the
    sorted neighbour array of ``v``.
    """

    def __init__(self, n_nodes: int, edges=()):
        edges = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                           dtype=np.int64).reshape(-1, 2)
        if len(edges) and (edges.min() < 0 or edges.max() >= n_nodes):
            raise GraphInputError("edge endpoint outside 0..n-1")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        keep = lo != hi
        pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0) if keep.any() \
            else np.empty((0, 2), dtype=np.int64)
        self.n_nodes = int(n_nodes)
        self.n_edges = len(pairs)
        self._edges = pairs
        both = np.concatenate([pairs, pairs[:, ::-1]]) if len(pairs) else pairs
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.empty(0, dtype=np.int64)
        both = both[order]
        self.indices = both[:, 1].copy() if len(both) else np.empty(0, dtype=np.int64)
        counts = np.bincount(both[:, 0], minlength=n_nodes) if len(both) else np.zeros(n_nodes, np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.degrees = counts.astype(np.int64)
        self._sets = None

    @classmethod
    def from_adjacency(cls, adj: Iterable[Iterable[int]]) -> "Graph":
        adj = [list(a) for a in adj]
        edges = [(u, v) for u, nb in enumerate(adj) for v in nb if u < v]
        return cls(len(adj), edges)

    @classmethod
    def from_networkx(cls, nxg) -> "Graph":
        nodes = sorted(nxg.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return cls(len(nodes), [(index[u], index[v]) for u, v in nxg.edges()])

    def to_networkx(self):
        import networkx as nx
        g = nx.Graph()
        g.add_nodes_from(range(self.n_nodes))
        g.add_edges_from(map(tuple, self._edges.tolist()))
        return g

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"

    def __eq__(self, other):
        return (isinstance(other, Graph) and self.n_nodes == other.n_nodes
                and np.array_equal(self._edges, other._edges))

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with ``u < v``, lexicographically sorted."""
        return self._edges

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @property
    def neighbor_sets(self) -> list:
        if self._sets is None:
            self._sets = [frozenset(self.neighbors(v).tolist()) for v in range(self.n_nodes)]
        return self._sets

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def adjacency_matrix(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes))

    def check_node(self, v) -> int:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self.n_nodes):
            raise GraphInputError(f"invalid node id {v!r}")
        return int(v)


def largest_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Return the largest connected component relabelled to ``0..n'-1`` and the
    original ids of its nodes."""
    if g.n_nodes == 0:
        return g, np.empty(0, dtype=np.int64)
    ncomp, labels = connected_components(g.adjacency_matrix(), directed=False)
    if ncomp == 1:
        return g, np.arange(g.n_nodes)
    biggest = np.argmax(np.bincount(labels))
    keep = np.flatnonzero(labels == biggest)
    remap = -np.ones(g.n_nodes, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    e = g.edges()
    e = e[labels[e[:, 0]] == biggest]
    log.info("kept largest component: %d of %d nodes (%d components)", len(keep), g.n_nodes, ncomp)
    return Graph(len(keep), remap[e]), keep


def is_connected(g: Graph) -> bool:
    if g.n_nodes == 0:
        return True
    return connected_components(g.adjacency_matrix(), directed=False)[0] == 1


# ---------------------------------------------------------------------------
# joint degree distribution


class JddMatrix:
    """Sparse symmetric map from degree pairs to edge counts.

    Keys are stored as ``(k, l)`` with ``k <= l``; a same-degree edge is counted
    once in ``(k, k)``.
    """

    def __init__(self, entries: Mapping | None = None):
        self.entries: dict[tuple[int, int], float] = {}
        for (k, l), c in (entries or {}).items():
            if c:
                self[k, l] = self[k, l] + c

    @staticmethod
    def key(k, l) -> tuple[int, int]:
        k, l = int(k), int(l)
        return (k, l) if k <= l else (l, k)

    def __getitem__(self, kl):
        return self.entries.get(self.key(*kl), 0)

    def __setitem__(self, kl, value):
        key = self.key(*kl)
        if value < 0:
            raise ValueError(f"negative JDD count at {key}")
        if value == 0:
            self.entries.pop(key, None)
        else:
            self.entries[key] = value

    def __contains__(self, kl):
        return self.key(*kl) in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def items(self):
        return self.entries.items()

    def __eq__(self, other):
        return isinstance(other, JddMatrix) and self.entries == other.entries

    def __repr__(self):
        return f"JddMatrix({dict(sorted(self.entries.items()))})"

    def copy(self) -> "JddMatrix":
        out = JddMatrix()
        out.entries = dict(self.entries)
        return out

    def total(self) -> float:
        return sum(self.entries.values())

    def degrees(self) -> list[int]:
        return sorted({d for kl in self.entries for d in kl})

    def stubs(self) -> dict[int, float]:
        """Edge endpoints per degree class: sum_{l != k} J(k,l) + 2 J(k,k)."""
        out: dict[int, float] = defaultdict(float)
        for (k, l), c in self.entries.items():
            out[k] += c
            out[l] += c
        return dict(out)

    def degree_counts(self) -> dict[int, float]:
        """D(k) = stubs(k) / k; may be fractional for estimated matrices."""
        out = {}
        for k, s in self.stubs().items():
            d = s / k
            out[k] = int(d) if float(d).is_integer() else d
        return out

    def is_integral(self) -> bool:
        return all(float(c).is_integer() for c in self.entries.values())

    def as_int(self) -> "JddMatrix":
        if not self.is_integral():
            raise ValueError("JDD matrix has non-integer entries")
        out = JddMatrix()
        out.entries = {k: int(c) for k, c in self.entries.items()}
        return out

    def row(self, k) -> dict[int, float]:
        return {(l if kk == k else kk): c for (kk, l), c in self.entries.items() if k in (kk, l)}

    def to_dense(self, kmax: int | None = None) -> np.ndarray:
        """Symmetric dense matrix F with F[k,l] = F[l,k] = J(k,l) (diagonal single-counted)."""
        kmax = kmax or max(self.degrees(), default=0)
        F = np.zeros((kmax + 1, kmax + 1))
        for (k, l), c in self.entries.items():
            F[k, l] = c
            F[l, k] = c
        return F

    @classmethod
    def from_dense(cls, F: np.ndarray, tol: float = 0.0) -> "JddMatrix":
        out = cls()
        ks, ls = np.nonzero(np.triu(F) > tol)
        for k, l in zip(ks.tolist(), ls.tolist()):
            out.entries[(k, l)] = float(F[k, l])
        return out

    def as_vector(self) -> dict:
        return dict(self.entries)


# ---------------------------------------------------------------------------
# exact quantities


def shared_partners(g: Graph, a: int, b: int) -> int:
    a, b = g.check_node(a), g.check_node(b)
    if a == b:
        raise GraphInputError("shared_partners needs two distinct nodes")
    sa, sb = g.neighbor_sets[a], g.neighbor_sets[b]
    if len(sa) > len(sb):
        sa, sb = sb, sa
    return sum(1 for x in sa if x in sb)


def node_triangles(g: Graph) -> np.ndarray:
    """T_v for every node (number of triangles through v)."""
    if g.n_edges == 0:
        return np.zeros(g.n_nodes, dtype=np.int64)
    A = g.adjacency_matrix()
    paths2 = (A @ A).multiply(A)
    return (np.asarray(paths2.sum(axis=1)).ravel() // 2).astype(np.int64)


def edge_shared_partners(g: Graph) -> np.ndarray:
    """sp(u, v) for every edge, aligned with ``g.edges()``."""
    if g.n_edges == 0:
        return np.zeros(0, dtype=np.int64)
    A = g.adjacency_matrix()
    P = (A @ A).multiply(A).tocsr()
    e = g.edges()
    return np.asarray(P[e[:, 0], e[:, 1]]).ravel().astype(np.int64)


def node_clustering(g: Graph, v: int) -> float:
    v = g.check_node(v)
    k = g.degree(v)
    if k < 2:
        raise UndefinedClusteringError(f"node {v} has degree {k} < 2")
    nb = g.neighbors(v).tolist()
    twice_t = sum(shared_partners(g, v, b) for b in nb)
    return twice_t / (k * (k - 1))


def clustering_vector(g: Graph) -> np.ndarray:
    """c_v for every node, 0 where deg(v) < 2."""
    k = g.degrees.astype(float)
    T = node_triangles(g)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(k >= 2, 2.0 * T / (k * (k - 1)), 0.0)
    return c


def degree_clustering(g: Graph) -> DegreeClustering:
    c = clustering_vector(g)
    out = {}
    for k in np.unique(g.degrees):
        if k >= 2:
            out[int(k)] = float(c[g.degrees == k].mean())
    return out


def mean_clustering(g: Graph) -> float:
    if g.n_nodes == 0:
        raise GraphInputError("empty graph")
    isolated = int(np.sum(g.degrees == 0))
    if isolated:
        log.info("mean_clustering: %d isolated nodes contribute c_v = 0", isolated)
    return float(clustering_vector(g).mean())


def exact_jdd(g: Graph) -> JddMatrix:
    e = g.edges()
    out = JddMatrix()
    if not len(e):
        return out
    k = g.degrees[e[:, 0]]
    l = g.degrees[e[:, 1]]
    pairs = np.stack([np.minimum(k, l), np.maximum(k, l)], axis=1)
    keys, counts = np.unique(pairs, axis=0, return_counts=True)
    out.entries = {(int(a), int(b)): int(c) for (a, b), c in zip(keys, counts)}
    return out


def triangle_count_total(g: Graph) -> int:
    """Sum over nodes of T_v (each triangle counted three times)."""
    return int(node_triangles(g).sum())


def degree_class_sizes(g: Graph) -> dict[int, int]:
    ks, counts = np.unique(g.degrees, return_counts=True)
    return {int(k): int(c) for k, c in zip(ks, counts)}


# ---------------------------------------------------------------------------
# text formats


def read_edge_list(path, *, connected_only: bool = False) -> Graph:
    """Read a whitespace-separated edge list; '#' lines are comments.

    Node ids are compacted to ``0..n-1`` in increasing id order. Duplicate edges
    and self-loops are dropped and reported in the log.
    """
    raw = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise GraphInputError(f"{path}:{lineno}: expected two node ids")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphInputError(f"{path}:{lineno}: non-integer node id") from exc
            if u < 0 or v < 0:
                raise GraphInputError(f"{path}:{lineno}: negative node id")
            raw.append((u, v))
    arr = np.asarray(raw, dtype=np.int64).reshape(-1, 2)
    ids, inv = np.unique(arr, return_inverse=True)
    arr = inv.reshape(-1, 2)
    loops = int(np.sum(arr[:, 0] == arr[:, 1]))
    g = Graph(len(ids), arr)
    dups = len(arr) - loops - g.n_edges
    if loops or dups:
        log.info("%s: dropped %d self-loops and %d duplicate edges", path, loops, dups)
    if connected_only:
        g, _ = largest_component(g)
    return g


def write_edge_list(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes {g.n_nodes} edges {g.n_edges}\n")
        for u, v in g.edges().tolist():
            fh.write(f"{u} {v}\n")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) or float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _num(s: str):
    return int(s) if s.lstrip("-").isdigit() else float(s)


def write_jdd(jdd: JddMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (k, l), c in sorted(jdd.items()):
            fh.write(f"{k} {l} {_fmt(c)}\n")


def read_jdd(path) -> JddMatrix:
    out = JddMatrix()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            k, l, c = s.split()
            out[int(k), int(l)] = out[int(k), int(l)] + _num(c)
    return out


def write_ck(ck: Mapping[int, float], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in sorted(ck.items()):
            fh.write(f"{k} {float(v)!r}\n")


def read_ck(path) -> DegreeClustering:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            k, v = s.split()
            out[int(k)] = float(v)
    return out

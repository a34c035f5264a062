"""Node samplers that emulate what a crawler observes: UIS, WIS and simple random walk."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import Graph, GraphInputError

log = logging.getLogger(__name__)

METHODS = ("UIS", "WIS", "RW")


@dataclass(frozen=True)
class SampleRecord:
    node: int
    degree: int
    neighbors: tuple[int, ...]


@dataclass
class SampleTrace:
    method: str
    records: list[SampleRecord]
    seed: int
    _index: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.method = self.method.upper()
        if self.method not in METHODS:
            raise ValueError(f"unknown sampling method {self.method!r}")

    def __len__(self):
        return len(self.records)

    @property
    def nodes(self) -> np.ndarray:
        return np.fromiter((r.node for r in self.records), dtype=np.int64, count=len(self.records))

    @property
    def degrees(self) -> np.ndarray:
        return np.fromiter((r.degree for r in self.records), dtype=np.int64, count=len(self.records))

    def revealed(self) -> dict[int, frozenset]:
        """Neighbour set of every sampled node."""
        if self._index is None:
            self._index = {}
            for r in self.records:
                if r.node not in self._index:
                    self._index[r.node] = frozenset(r.neighbors)
        return self._index


def sample_size(pct: float, n_nodes: int) -> int:
    if not 0 < pct <= 100:
        raise ValueError("sample percentage must lie in (0, 100]")
    return max(1, math.ceil(pct * n_nodes / 100))


def _record(g: Graph, v: int) -> SampleRecord:
    return SampleRecord(int(v), g.degree(v), tuple(g.neighbors(v).tolist()))


def sample_uis(g: Graph, n: int, seed: int, replace: bool = True) -> SampleTrace:
    """Uniform independent draws; ``replace=False`` visits ``n`` distinct nodes."""
    if g.n_nodes == 0:
        raise GraphInputError("cannot sample an empty graph")
    if n < 1:
        raise ValueError("sample length must be >= 1")
    rng = np.random.default_rng(seed)
    if replace:
        picks = rng.integers(0, g.n_nodes, size=n)
    else:
        if n > g.n_nodes:
            raise ValueError(f"cannot draw {n} distinct nodes from {g.n_nodes}")
        picks = rng.choice(g.n_nodes, size=n, replace=False)
    return SampleTrace("UIS", [_record(g, v) for v in picks.tolist()], seed)


def sample_wis(g: Graph, n: int, seed: int) -> SampleTrace:
    """Independent draws with probability deg(v) / 2|E|."""
    if n < 1:
        raise ValueError("sample length must be >= 1")
    if g.n_edges == 0:
        raise GraphInputError("degree-weighted sampling needs at least one edge")
    rng = np.random.default_rng(seed)
    p = g.degrees / g.degrees.sum()
    picks = rng.choice(g.n_nodes, size=n, p=p)
    return SampleTrace("WIS", [_record(g, v) for v in picks.tolist()], seed)


def sample_rw(g: Graph, n: int, seed: int, start: int | None = None, burn_in: int = 0) -> SampleTrace:
    """Simple random walk of ``n`` recorded steps.

    The start node is uniform unless given. No burn-in by default.
    """
    if n < 1:
        raise ValueError("sample length must be >= 1")
    if g.n_nodes == 0:
        raise GraphInputError("cannot sample an empty graph")
    rng = np.random.default_rng(seed)
    if start is None:
        candidates = np.flatnonzero(g.degrees > 0)
        if not len(candidates):
            raise GraphInputError("graph has no edges to walk on")
        start = int(candidates[rng.integers(len(candidates))])
    start = g.check_node(start)
    if g.degree(start) == 0:
        raise GraphInputError(f"start node {start} has degree 0")
    ncomp, labels = connected_components(g.adjacency_matrix(), directed=False)
    if ncomp > 1:
        log.warning("graph is disconnected; walk confined to the component of node %d", start)
    total = n + burn_in
    # one uniform draw per step, mapped onto the neighbour array
    u = rng.random(total - 1) if total > 1 else np.empty(0)
    indptr, indices, deg = g.indptr, g.indices, g.degrees
    walk = np.empty(total, dtype=np.int64)
    v = start
    walk[0] = v
    for i in range(1, total):
        v = int(indices[indptr[v] + int(u[i - 1] * deg[v])])
        walk[i] = v
    return SampleTrace("RW", [_record(g, v) for v in walk[burn_in:].tolist()], seed)


def sample(g: Graph, method: str, n: int, seed: int, *, replace: bool = True, **kw) -> SampleTrace:
    """Dispatch on ``method``; ``replace`` only affects UIS and extra keywords only RW."""
    method = method.upper()
    if method == "UIS":
        return sample_uis(g, n, seed, replace=replace)
    if method == "WIS":
        return sample_wis(g, n, seed)
    if method == "RW":
        return sample_rw(g, n, seed, **kw)
    raise ValueError(f"unknown sampling method {method!r}")


def write_trace(trace: SampleTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{trace.method} {trace.seed} {len(trace.records)}\n")
        for r in trace.records:
            fh.write(f"{r.node} {r.degree} {','.join(map(str, r.neighbors))}\n")


def read_trace(path) -> SampleTrace:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: bad trace header")
        method, seed, n = header[0], int(header[1]), int(header[2])
        records = []
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2 or not line.strip():
                raise ValueError(f"{path}:{lineno}: bad trace record")
            node, degree = int(parts[0]), int(parts[1])
            nb = tuple(int(x) for x in parts[2].split(",")) if len(parts) > 2 and parts[2] else ()
            if len(nb) != degree:
                raise ValueError(f"{path}:{lineno}: degree {degree} != {len(nb)} neighbours")
            records.append(SampleRecord(node, degree, nb))
    if len(records) != n:
        raise ValueError(f"{path}: header says {n} records, found {len(records)}")
    return SampleTrace(method, records, seed)

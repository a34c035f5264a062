"""Exact-JDD graph construction: the triangle-rich local builder and the plain stub-matching baseline."""
from __future__ import annotations

import heapq
import logging
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..graph import Graph, JddMatrix
from ..postprocess import TargetSpec

log = logging.getLogger(__name__)


class ConstructionError(RuntimeError):
    """Raised when the JDD completion step runs out of its iteration budget."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


def _key(k, l):
    return (k, l) if k <= l else (l, k)


@dataclass
class ConstructionState:
    """Mutable graph under construction, indexed by target degree class.

    ``current_jdd`` counts edges by the *target* degrees of their endpoints, so
    it equals the real JDD once every node has reached its target degree.
    """
    adj: list
    target_degree: np.ndarray
    target_jdd: JddMatrix
    coordinates: np.ndarray
    current_jdd: Counter = field(default_factory=Counter)
    members: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.members:
            by_class = {}
            for v, k in enumerate(self.target_degree.tolist()):
                by_class.setdefault(k, []).append(v)
            self.members = by_class

    @property
    def n_nodes(self) -> int:
        return len(self.adj)

    @property
    def graph(self) -> Graph:
        return Graph(self.n_nodes, [(u, v) for u, nb in enumerate(self.adj) for v in nb if u < v])

    def missing(self, v) -> int:
        return int(self.target_degree[v]) - len(self.adj[v])

    def add_edge(self, u, v):
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.current_jdd[_key(int(self.target_degree[u]), int(self.target_degree[v]))] += 1

    def remove_edge(self, u, v):
        self.adj[u].remove(v)
        self.adj[v].remove(u)
        self.current_jdd[_key(int(self.target_degree[u]), int(self.target_degree[v]))] -= 1

    def deficits(self) -> dict:
        out = {}
        for kl, t in self.target_jdd.items():
            d = int(t) - self.current_jdd.get(kl, 0)
            if d:
                out[kl] = d
        return out

    def is_complete(self) -> bool:
        return not self.deficits()


def assign_degrees(spec: TargetSpec, seed: int) -> ConstructionState:
    dk = spec.d_k
    degrees = np.array([k for k in sorted(dk) for _ in range(dk[k])], dtype=np.int64)
    rng = np.random.default_rng(seed)
    rng.shuffle(degrees)
    coords = rng.random(len(degrees))
    return ConstructionState(adj=[set() for _ in range(len(degrees))], target_degree=degrees,
                             target_jdd=spec.jdd.as_int() if len(spec.jdd) else JddMatrix(),
                             coordinates=coords)


class _NextAlive:
    """Union-find over ring positions: smallest alive index >= i."""

    def __init__(self, alive: np.ndarray):
        n = len(alive)
        self.n = n
        self.parent = np.where(alive, np.arange(n), np.arange(1, n + 1)).tolist() + [n]

    def find(self, i):
        p = self.parent
        root = i
        while p[root] != root:
            root = p[root]
        while p[i] != root:
            p[i], i = root, p[i]
        return root

    def kill(self, i):
        self.parent[i] = i + 1

    def after(self, i):
        """Next alive index strictly after i, wrapping around the ring."""
        j = self.find(i + 1)
        return self.find(0) if j == self.n else j


def greedy_local_edges(state: ConstructionState) -> ConstructionState:
    """Add edges between node pairs in increasing ring distance while the targets allow it.

    Pairs are streamed lazily (one clockwise stream per node, merged by a heap)
    instead of materialising all N^2 pairs. A pair that fails the test never
    passes later, since current degrees and JDD entries only grow, so skipping
    saturated nodes and closed classes keeps the processing order exact.
    """
    n = state.n_nodes
    if n < 2:
        return state
    tdeg = state.target_degree.tolist()
    target = {kl: int(c) for kl, c in state.target_jdd.items()}
    cur = state.current_jdd
    adj = state.adj
    order = np.argsort(state.coordinates, kind="stable")
    pos = state.coordinates[order].tolist()
    node_at = order.tolist()
    alive = np.array([tdeg[v] > len(adj[v]) for v in node_at])
    ring = _NextAlive(alive)
    alive_count = Counter(tdeg[v] for v in node_at if tdeg[v] > len(adj[v]))
    partner_classes = {}
    for (k, l) in target:
        partner_classes.setdefault(k, set()).add(l)
        partner_classes.setdefault(l, set()).add(k)

    def has_open_partner(k):
        return any(cur.get(_key(k, l), 0) < target[_key(k, l)] and alive_count[l] > 0
                   for l in partner_classes.get(k, ()))

    def kill(i):
        v = node_at[i]
        ring.kill(i)
        alive_count[tdeg[v]] -= 1

    heap = []

    def push(i, j):
        if j == i:
            return
        gap = (pos[j] - pos[i]) % 1.0
        if gap <= 0.5:
            heapq.heappush(heap, (gap, i, j))

    for i in range(n):
        if alive[i]:
            push(i, ring.after(i))
    skips = Counter()
    dead = ~alive
    while heap:
        gap, i, j = heapq.heappop(heap)
        if dead[i]:
            continue
        if dead[j]:
            push(i, ring.after(j))
            continue
        u, v = node_at[i], node_at[j]
        kl = _key(tdeg[u], tdeg[v])
        if v not in adj[u] and cur.get(kl, 0) < target.get(kl, 0):
            state.add_edge(u, v)
            skips[i] = 0
            for idx, w in ((i, u), (j, v)):
                if len(adj[w]) >= tdeg[w]:
                    dead[idx] = True
                    kill(idx)
        else:
            skips[i] += 1
            if skips[i] % 64 == 0 and not has_open_partner(tdeg[u]):
                dead[i] = True
                kill(i)
        if not dead[i]:
            push(i, ring.after(j))
    return state


def _random_order(items, rnd: random.Random):
    items = list(items)
    rnd.shuffle(items)
    return items


class _Completer:
    def __init__(self, state: ConstructionState, rnd: random.Random):
        self.s = state
        self.rnd = rnd
        self.tdeg = state.target_degree.tolist()
        self.unsat = {}
        for v in range(state.n_nodes):
            if state.missing(v) > 0:
                self.unsat.setdefault(self.tdeg[v], set()).add(v)

    def _touch(self, *nodes):
        for v in nodes:
            k = self.tdeg[v]
            if self.s.missing(v) > 0:
                self.unsat.setdefault(k, set()).add(v)
            else:
                self.unsat.get(k, set()).discard(v)

    def add(self, u, v):
        self.s.add_edge(u, v)
        self._touch(u, v)

    def remove(self, u, v):
        self.s.remove_edge(u, v)
        self._touch(u, v)

    def direct(self, k, l) -> bool:
        adj = self.s.adj
        A = sorted(self.unsat.get(k, ()))
        B = sorted(self.unsat.get(l, ()))
        for a in _random_order(A, self.rnd)[:64]:
            for b in _random_order(B, self.rnd)[:64]:
                if a != b and b not in adj[a]:
                    self.add(a, b)
                    return True
        return False

    def pick_pair(self, k, l):
        A = sorted(self.unsat[k])
        a = self.rnd.choice(A)
        B = [b for b in sorted(self.unsat[l]) if b != a]
        if not B:
            if self.s.missing(a) < 2:
                raise ConstructionError(f"inconsistent deficit bookkeeping at class pair {(k, l)}")
            return a, a
        return a, self.rnd.choice(B)

    def case_bc(self, a, b, helpers) -> bool:
        """Create (a,c) and move (c,d) onto (b,d); requires the helper c in b's class."""
        adj = self.s.adj
        for c in helpers:
            for d in _random_order(sorted(adj[c]), self.rnd):
                if d != b and d not in adj[b]:
                    self.add(a, c)
                    self.remove(c, d)
                    self.add(b, d)
                    return True
        return False

    def case_de(self, a, b, helpers) -> bool:
        """Create (a,c), drop (c,d): the deficit moves to the pair (class(c), class(d))."""
        adj = self.s.adj
        for c in helpers:
            ds = [d for d in sorted(adj[c]) if d != b]
            if ds:
                d = self.rnd.choice(ds)
                self.add(a, c)
                self.remove(c, d)
                return True
        return False

    def case_fh(self, a, b, k, l, tries=256) -> bool:
        """Join two saturated nodes c (class l) and e (class k), free one edge at each."""
        adj = self.s.adj
        cs, es = self.s.members[l], self.s.members[k]
        for _ in range(tries):
            c, e = self.rnd.choice(cs), self.rnd.choice(es)
            if c == e or e in adj[c] or self.s.missing(c) or self.s.missing(e):
                continue
            fs = [f for f in sorted(adj[c]) if f not in (a, b)]
            gs = [g for g in sorted(adj[e]) if g not in (a, b)]
            if not fs or not gs:
                continue
            f, g = self.rnd.choice(fs), self.rnd.choice(gs)
            self.remove(c, f)
            self.remove(e, g)
            self.add(c, e)
            return True
        return False

    def step(self, k, l) -> str:
        if self.direct(k, l):
            return "direct"
        a, b = self.pick_pair(k, l)
        adj = self.s.adj
        orient = [(a, b, l), (b, a, k)] if a != b else [(a, b, l)]
        helper_sets = []
        for x, y, cls in orient:
            hs = [c for c in self.s.members[cls] if c != x and c not in adj[x]]
            helper_sets.append((x, y, _random_order(hs, self.rnd)))
        for x, y, hs in helper_sets:
            if self.case_bc(x, y, hs[:256]):
                return "B-C"
        for x, y, hs in helper_sets:
            if self.case_de(x, y, hs):
                return "D-E"
        if self.case_fh(a, b, k, l):
            return "F-H"
        return "stuck"


def complete_jdd(state: ConstructionState, seed: int = 0, max_rounds: int | None = None) -> Graph:
    """Throw the remaining edges until the current JDD equals the target exactly."""
    s = state
    deficits = s.deficits()
    if any(d < 0 for d in deficits.values()):
        raise ConstructionError("current JDD exceeds the target", {"deficits": deficits})
    total = sum(deficits.values())
    if max_rounds is None:
        max_rounds = 1000 + 100 * total
    rnd = random.Random(seed)
    comp = _Completer(s, rnd)
    counts = Counter()
    rounds = 0
    while deficits:
        rounds += 1
        if rounds > max_rounds:
            raise ConstructionError(
                f"JDD completion did not finish within {max_rounds} rounds",
                {"deficits": deficits, "unsaturated": {k: sorted(v) for k, v in comp.unsat.items() if v},
                 "cases": dict(counts)})
        k, l = rnd.choice(sorted(deficits))
        counts[comp.step(k, l)] += 1
        deficits = s.deficits()
        if any(d < 0 for d in deficits.values()):
            raise ConstructionError("internal: JDD overshoot during completion", {"deficits": deficits})
    if counts:
        log.debug("JDD completion: %d rounds, cases %s", rounds, dict(counts))
    s.notes = dict(counts)
    return s.graph


def construct_2kt(spec: TargetSpec, seed: int) -> Graph:
    """Triangle-rich exact-JDD graph: degree assignment, local greedy edges, completion."""
    state = assign_degrees(spec, seed)
    greedy_local_edges(state)
    return complete_jdd(state, seed=seed)


def construct_2k_baseline(spec: TargetSpec, seed: int, rematch_rounds: int = 20) -> Graph:
    """Configuration-model style exact-JDD graph.

    Stubs of each degree class are shuffled and split among the partner
    classes, then matched at random within every class pair. Matches that
    would create a self-loop or a multi-edge are put back and re-matched a few
    times; whatever is still left over goes to the completion step.
    """
    state = assign_degrees(spec, seed)
    rng = np.random.default_rng(seed)
    target = {kl: int(c) for kl, c in state.target_jdd.items()}
    stubs = {}
    for k, nodes in state.members.items():
        pool = np.repeat(np.asarray(nodes, dtype=np.int64), k)
        rng.shuffle(pool)
        stubs[k] = pool.tolist()
    cursor = Counter()
    pending = {}
    for (k, l), c in sorted(target.items()):
        if k == l:
            take = stubs[k][cursor[k]:cursor[k] + 2 * c]
            cursor[k] += 2 * c
            pending[(k, l)] = (take[0::2], take[1::2])
        else:
            a = stubs[k][cursor[k]:cursor[k] + c]
            b = stubs[l][cursor[l]:cursor[l] + c]
            cursor[k] += c
            cursor[l] += c
            pending[(k, l)] = (a, b)
    adj = state.adj
    for _ in range(rematch_rounds):
        left = 0
        for kl, (a, b) in pending.items():
            b = list(b)
            rng.shuffle(b)
            ra, rb = [], []
            for u, v in zip(a, b):
                if u != v and v not in adj[u]:
                    state.add_edge(u, v)
                else:
                    ra.append(u)
                    rb.append(v)
            pending[kl] = (ra, rb)
            left += len(ra)
        if not left:
            break
    return complete_jdd(state, seed=seed)

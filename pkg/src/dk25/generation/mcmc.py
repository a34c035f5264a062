"""JDD-preserving double-edge swaps that steer degree-dependent clustering toward a target."""
from __future__ import annotations

import bisect
import csv
import itertools
import logging
import random
import time
from dataclasses import dataclass, field

import numpy as np

from ..graph import DegreeClustering, Graph, node_triangles

log = logging.getLogger(__name__)

VARIANTS = ("plain", "improved")


@dataclass
class McmcConfig:
    variant: str = "improved"
    nmae_stop: float = 0.02
    max_swaps: int | None = None     # proposals; None -> 500 * |E|
    seed: int = 0
    progress_interval: int = 10_000
    bias: float = 0.8                # improved variant: probability of drawing from the favoured bucket
    bias_mode: str = "endpoint"       # improved variant: "global" error sign or per-"endpoint" class sign
    class_focus: float = 0.0         # improved variant: share of draws that start in an error-weighted degree class
    max_seconds: float | None = None
    debug_check: bool = False        # verify JDD and triangle counts after every accepted swap

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown MCMC variant {self.variant!r}")
        if not self.nmae_stop > 0:
            raise ValueError("nmae_stop must be > 0")
        if self.max_swaps is not None and self.max_swaps <= 0:
            raise ValueError("max_swaps must be > 0")
        if not 0.0 <= self.bias <= 1.0:
            raise ValueError("bias must lie in [0, 1]")
        if self.bias_mode not in ("global", "endpoint"):
            raise ValueError(f"unknown bias_mode {self.bias_mode!r}")
        if not 0.0 <= self.class_focus <= 1.0:
            raise ValueError("class_focus must lie in [0, 1]")


@dataclass
class McmcResult:
    graph: Graph
    converged: bool
    nmae: float
    proposals: int
    accepted: int
    elapsed: float
    trace: list = field(default_factory=list)  # (swaps, elapsed_ms, nmae, mean_clustering)
    stop_reason: str = ""


def write_trace_csv(trace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["swaps", "elapsed_ms", "nmae", "mean_clustering"])
        for swaps, ms, nm, mc in trace:
            w.writerow([swaps, f"{ms:.3f}", f"{nm:.6g}", f"{mc:.6g}"])


def _ekey(a, b):
    return (a, b) if a < b else (b, a)


def _median_threshold(sp: dict) -> float:
    """Split point between low- and high-triangle edges (high means sp >= threshold)."""
    vals = np.fromiter(sp.values(), dtype=np.int64, count=len(sp))
    med = float(np.median(vals)) if len(vals) else 0.0
    return med if med > 0 else 0.5


class _Buckets:
    """Edges split at a triangle-count threshold, each half sampled uniformly in O(1)."""

    def __init__(self, sp: dict, rnd: random.Random):
        self.sp = sp
        self.rnd = rnd
        self.rebuild()

    def rebuild(self):
        self.theta = _median_threshold(self.sp)
        self.lists = ([], [])
        self.where = {}
        for e, s in self.sp.items():
            self._put(e, s)

    def _put(self, e, s):
        b = 1 if s >= self.theta else 0
        lst = self.lists[b]
        self.where[e] = (b, len(lst))
        lst.append(e)

    def _drop(self, e):
        b, i = self.where.pop(e)
        lst = self.lists[b]
        last = lst.pop()
        if i < len(lst):
            lst[i] = last
            self.where[last] = (b, i)

    def update(self, e, s):
        b = 1 if s >= self.theta else 0
        if self.where[e][0] != b:
            self._drop(e)
            self._put(e, s)

    def replace(self, old, new, s):
        self._drop(old)
        self._put(new, s)

    def draw(self, high: bool):
        lst = self.lists[1 if high else 0]
        if not lst:
            lst = self.lists[0 if high else 1]
        return lst[int(self.rnd.random() * len(lst))]

    def balanced(self) -> bool:
        n = len(self.where)
        return n == 0 or min(len(self.lists[0]), len(self.lists[1])) >= 0.1 * n


class _Chain:
    def __init__(self, g: Graph, target_ck: DegreeClustering, cfg: McmcConfig):
        self.cfg = cfg
        self.rnd = random.Random(cfg.seed)
        self.n = g.n_nodes
        self.deg = g.degrees.tolist()
        self.nbl = [g.neighbors(v).tolist() for v in range(self.n)]
        self.nbpos = [{w: i for i, w in enumerate(nb)} for nb in self.nbl]
        self.adj = [set(nb) for nb in self.nbl]
        self.edges = [tuple(e) for e in g.edges().tolist()]
        self.members = {}
        for v, k in enumerate(self.deg):
            self.members.setdefault(k, []).append(v)
        self.T = node_triangles(g).astype(np.int64).tolist()
        # S[k] = total triangle incidences of degree-k nodes; c(k) = S[k] / norm[k]
        self.S = {k: 0 for k in self.members if k >= 2}
        for v, t in enumerate(self.T):
            if self.deg[v] >= 2:
                self.S[self.deg[v]] += t
        self.norm = {k: k * (k - 1) / 2 * len(self.members[k]) for k in self.S}
        self.target = {int(k): float(c) for k, c in target_ck.items()}
        self.ref = sum(self.target.values())
        self.err = {}
        self.const_err = 0.0
        for k, t in self.target.items():
            if k in self.S:
                self.err[k] = abs(t - self.S[k] / self.norm[k])
            else:
                self.const_err += abs(t)  # degree absent from the graph: c(k) reads as 0
        self.total = self.const_err + sum(self.err.values())
        self.improved = cfg.variant == "improved"
        self._sign_stale, self._over, self._since_rebuild = True, False, 0
        self._epos = {e: i for i, e in enumerate(self.edges)}
        self._err_keys = sorted(self.err)
        self.signed = self.signed_error()
        self._class_cum = []
        if self.improved:
            self.sp = {e: len(self.adj[e[0]] & self.adj[e[1]]) for e in self.edges}
            if cfg.bias_mode == "global":
                self.buckets = _Buckets(self.sp, self.rnd)
                self.theta = self.buckets.theta
            else:
                # endpoint mode reads sp on demand; only the split point is kept
                self.buckets = None
                self.theta = _median_threshold(self.sp)
                self.sp = None

    def nmae(self) -> float:
        if self.ref > 0:
            return self.total / self.ref
        return 0.0 if self.total == 0 else float("inf")

    def mean_clustering(self) -> float:
        if not self.n:
            return 0.0
        return sum(2.0 * s / (k * (k - 1)) for k, s in self.S.items()) / self.n

    def signed_error(self) -> float:
        return sum(self.S[k] / self.norm[k] - t for k, t in self.target.items() if k in self.S)

    def propose(self):
        rnd = self.rnd
        if self.improved:
            if self._sign_stale and self.cfg.class_focus > 0:
                self._class_cum = list(itertools.accumulate(self.err[k] for k in self._err_keys))
                self._sign_stale = False
            cum = self._class_cum
            if cum and cum[-1] > 0 and rnd.random() < self.cfg.class_focus:
                k = self._err_keys[bisect.bisect_right(cum, rnd.random() * cum[-1])]
                cls = self.members[k]
                u = cls[int(rnd.random() * len(cls))]
                nb = self.nbl[u]
                v = nb[int(rnd.random() * len(nb))]
            elif self.cfg.bias_mode == "endpoint":
                # thin a uniform edge draw: keep with weight `bias` when the edge's
                # triangle load matches what u's degree class needs, else 1 - bias
                edges, adj, theta = self.edges, self.adj, self.theta
                S, norm, target = self.S, self.norm, self.target
                bias = self.cfg.bias
                for _ in range(16):
                    u, v = edges[int(rnd.random() * len(edges))]
                    if rnd.random() < 0.5:
                        u, v = v, u
                    k = self.deg[u]
                    t = target.get(k)
                    if t is None or k < 2:
                        break
                    want_high = S[k] / norm[k] > t
                    if rnd.random() < (bias if (len(adj[u] & adj[v]) >= theta) == want_high else 1 - bias):
                        break
            else:
                favoured = rnd.random() < self.cfg.bias
                high = favoured if self.signed > 0 else not favoured
                u, v = self.buckets.draw(high)
                if rnd.random() < 0.5:
                    u, v = v, u
        else:
            u, v = self.edges[int(rnd.random() * len(self.edges))]
            if rnd.random() < 0.5:
                u, v = v, u
        cls = self.members[self.deg[u]]
        x = cls[int(rnd.random() * len(cls))]
        if x == u or x == v:
            return None
        nx_ = self.nbl[x]
        y = nx_[int(rnd.random() * len(nx_))]
        if y == u or y == v:
            return None
        if y in self.adj[u] or v in self.adj[x]:
            return None
        return u, v, x, y

    def evaluate(self, u, v, x, y):
        adj, deg = self.adj, self.deg
        lost1 = adj[u] & adj[v]
        lost2 = adj[x] & adj[y]
        gain1 = (adj[u] & adj[y]) - {v, x}
        gain2 = (adj[x] & adj[v]) - {y, u}
        dT = {}
        for (a, b), common, sign in (((u, v), lost1, -1), ((x, y), lost2, -1),
                                     ((u, y), gain1, 1), ((x, v), gain2, 1)):
            if not common:
                continue
            c = len(common) * sign
            dT[a] = dT.get(a, 0) + c
            dT[b] = dT.get(b, 0) + c
            for w in common:
                dT[w] = dT.get(w, 0) + sign
        dS = {}
        for w, d in dT.items():
            if d and deg[w] >= 2:
                dS[deg[w]] = dS.get(deg[w], 0) + d
        new_total = self.total
        for k, d in dS.items():
            if d and k in self.err:
                new_err = abs(self.target[k] - (self.S[k] + d) / self.norm[k])
                new_total += new_err - self.err[k]
        return new_total, dT, dS, (lost1, lost2, gain1, gain2)

    def apply(self, u, v, x, y, dT, dS, new_total, sets):
        adj, nbl, nbpos = self.adj, self.nbl, self.nbpos
        for a, old, new in ((u, v, y), (v, u, x), (x, y, v), (y, x, u)):
            adj[a].remove(old)
            adj[a].add(new)
            i = nbpos[a].pop(old)
            nbl[a][i] = new
            nbpos[a][new] = i
        for w, d in dT.items():
            self.T[w] += d
        for k, d in dS.items():
            self.S[k] += d
            if k in self.err:
                self.err[k] = abs(self.target[k] - self.S[k] / self.norm[k])
                self.signed += d / self.norm[k]
        self.total = new_total
        self._replace_edge(_ekey(u, v), _ekey(u, y))
        self._replace_edge(_ekey(x, y), _ekey(x, v))
        if self.improved:
            if self.sp is not None:
                self._update_sp(u, v, x, y, sets)
            else:
                self._since_rebuild += 1
                if self._since_rebuild >= 2000:
                    self._since_rebuild = 0
                    self._resample_theta()

    def _replace_edge(self, old, new):
        i = self._epos.pop(old)
        self.edges[i] = new
        self._epos[new] = i

    def _update_sp(self, u, v, x, y, sets):
        lost1, lost2, gain1, gain2 = sets
        sp, b = self.sp, self.buckets
        touched = set()
        for (a, c), common, sign in (((u, v), lost1, -1), ((x, y), lost2, -1),
                                     ((u, y), gain1, 1), ((x, v), gain2, 1)):
            for w in common:
                for e in (_ekey(a, w), _ekey(c, w)):
                    sp[e] += sign
                    touched.add(e)
        e_uv, e_uy = _ekey(u, v), _ekey(u, y)
        e_xy, e_xv = _ekey(x, y), _ekey(x, v)
        del sp[e_uv], sp[e_xy]
        sp[e_uy], sp[e_xv] = len(gain1), len(gain2)
        self._since_rebuild += 1
        b.replace(e_uv, e_uy, sp[e_uy])
        b.replace(e_xy, e_xv, sp[e_xv])
        for e in touched:
            b.update(e, sp[e])
        if self._since_rebuild >= 1000:
            self._since_rebuild = 0
            if not b.balanced():
                b.rebuild()
                self.theta = b.theta

    def _resample_theta(self, n=512):
        adj, edges, rnd = self.adj, self.edges, self.rnd
        picks = (edges[int(rnd.random() * len(edges))] for _ in range(n))
        self.theta = _median_threshold({i: len(adj[a] & adj[b]) for i, (a, b) in enumerate(picks)})

    def graph(self) -> Graph:
        return Graph(self.n, [(a, c) for a, nb in enumerate(self.nbl) for c in nb if a < c])

    def check(self, jdd_ref):
        from ..graph import exact_jdd
        g = self.graph()
        if exact_jdd(g) != jdd_ref:
            raise AssertionError("JDD changed by a swap")
        if node_triangles(g).tolist() != self.T:
            raise AssertionError("incremental triangle counts drifted")


def mcmc_target_ck(g: Graph, target_ck: DegreeClustering, cfg: McmcConfig | None = None,
                   progress=None) -> McmcResult:
    """Rewire ``g`` with degree-class-preserving double-edge swaps until c(k) is close to ``target_ck``.

    A proposal replaces (u,v),(x,y) with (u,y),(x,v) where deg(u) = deg(x); it
    is rejected on a self-loop or multi-edge, or when the total absolute
    clustering error grows. ``progress`` (optional) is called with each trace
    row as it is recorded.
    """
    cfg = cfg or McmcConfig()
    t0 = time.perf_counter()
    chain = _Chain(g, target_ck, cfg)
    max_swaps = cfg.max_swaps if cfg.max_swaps is not None else 500 * max(g.n_edges, 1)
    jdd_ref = None
    if cfg.debug_check:
        from ..graph import exact_jdd
        jdd_ref = exact_jdd(g)
    trace = []

    def record(n_prop):
        row = (n_prop, (time.perf_counter() - t0) * 1e3, chain.nmae(), chain.mean_clustering())
        trace.append(row)
        if progress is not None:
            progress(row)

    record(0)
    proposals = accepted = 0
    reason = ""
    if chain.nmae() < cfg.nmae_stop:
        reason = "converged"
    elif g.n_edges < 2:
        reason = "no swaps possible"
    interval = max(1, cfg.progress_interval)
    eps = 1e-12 * max(1.0, chain.ref)
    while not reason:
        if proposals >= max_swaps:
            reason = "max_swaps"
            break
        if cfg.max_seconds is not None and proposals % 256 == 0 \
                and time.perf_counter() - t0 > cfg.max_seconds:
            reason = "max_seconds"
            break
        proposals += 1
        if proposals % interval == 0:
            record(proposals)
        prop = chain.propose()
        if prop is None:
            continue
        new_total, dT, dS, sets = chain.evaluate(*prop)
        if new_total > chain.total + eps:
            continue
        chain.apply(*prop, dT, dS, new_total, sets)
        accepted += 1
        chain._sign_stale = True
        if accepted % 1000 == 0:
            chain.total = chain.const_err + sum(chain.err.values())
        if jdd_ref is not None:
            chain.check(jdd_ref)
        if chain.nmae() < cfg.nmae_stop:
            reason = "converged"
    chain.total = chain.const_err + sum(chain.err.values())
    if not trace or trace[-1][0] != proposals:
        record(proposals)
    out = chain.graph()
    converged = chain.nmae() < cfg.nmae_stop
    if not converged:
        log.warning("MCMC stopped (%s) at NMAE %.4f > %.4f", reason, chain.nmae(), cfg.nmae_stop)
    return McmcResult(graph=out, converged=converged, nmae=chain.nmae(), proposals=proposals,
                      accepted=accepted, elapsed=time.perf_counter() - t0, trace=trace,
                      stop_reason=reason)

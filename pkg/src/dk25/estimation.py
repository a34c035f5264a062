"""Estimators of JDD(k,l) and c(k) from a sample trace, with per-method bias correction.

UIS traces use the plain induced-edge estimators, WIS traces the Hansen-Hurwitz
reweighted ones (w(v) = deg(v)), and RW traces either induced edges with a safety
margin ``M``, traversed edges, or the hybrid of the two.
"""
from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import DegreeClustering, JddMatrix, read_ck, read_jdd, write_ck, write_jdd
from .sampling import SampleTrace

log = logging.getLogger(__name__)


class EstimationError(ValueError):
    pass


@dataclass
class EstimatorConfig:
    margin: int = 50
    hybrid_threshold: float | None = None  # None: estimate average degree from the trace
    known_n: int | None = None
    known_e: int | None = None
    rw_estimator: str = "hybrid"  # hybrid | induced | traversed

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin M must be >= 0")
        if self.hybrid_threshold is not None and self.hybrid_threshold < 0:
            raise ValueError("hybrid threshold must be >= 0")
        if self.rw_estimator not in ("hybrid", "induced", "traversed"):
            raise ValueError(f"unknown RW estimator {self.rw_estimator!r}")


@dataclass
class EstimateBundle:
    jdd: JddMatrix
    ck: DegreeClustering
    vk: dict[int, float]
    diagnostics: dict = field(default_factory=dict)


def _require(trace: SampleTrace, method: str):
    if trace.method != method:
        raise EstimationError(f"estimator expects a {method} trace, got {trace.method}")
    if not trace.records:
        raise EstimationError("empty trace")


def _sp(revealed, a, b) -> int:
    sa, sb = revealed[a], revealed[b]
    if len(sa) > len(sb):
        sa, sb = sb, sa
    return sum(1 for x in sa if x in sb)


def _finish_ck(num, den, diag) -> DegreeClustering:
    out = {}
    clamped = 0
    for k in sorted(num):
        if k < 2:
            continue
        if den[k] <= 0:
            diag.setdefault("omitted_degrees", []).append(k)
            continue
        c = num[k] / den[k] / (k - 1)
        if c < 0 or c > 1:
            clamped += 1
            c = min(1.0, max(0.0, c))
        out[k] = c
    diag["clamped"] = diag.get("clamped", 0) + clamped
    return out


# ---------------------------------------------------------------------------
# clustering


def _ck_independent(trace: SampleTrace, weighted: bool, diag=None) -> DegreeClustering:
    diag = {} if diag is None else diag
    revealed = trace.revealed()
    count = Counter(r.node for r in trace.records)
    deg = {v: len(nb) for v, nb in revealed.items()}
    num: dict[int, float] = defaultdict(float)
    den: dict[int, float] = defaultdict(float)
    for a, ca in count.items():
        k = deg[a]
        if k < 2:
            continue
        n_sum = d_sum = 0.0
        for b in revealed[a]:
            cb = count.get(b)
            if not cb:
                continue
            w = cb / deg[b] if weighted else cb
            n_sum += _sp(revealed, a, b) * w
            d_sum += w
        num[k] += ca * n_sum
        den[k] += ca * d_sum
    return _finish_ck(num, den, diag)


def estimate_ck_uis(trace: SampleTrace) -> DegreeClustering:
    _require(trace, "UIS")
    return _ck_independent(trace, weighted=False)


def estimate_ck_wis(trace: SampleTrace) -> DegreeClustering:
    _require(trace, "WIS")
    return _ck_independent(trace, weighted=True)


def _positions(trace: SampleTrace) -> dict[int, np.ndarray]:
    pos = defaultdict(list)
    for i, r in enumerate(trace.records):
        pos[r.node].append(i)
    return {v: np.asarray(p, dtype=np.int64) for v, p in pos.items()}


def _far_pairs(pa: np.ndarray, pb: np.ndarray, margin: int) -> int:
    """Number of index pairs (i in pa, j in pb) with |i - j| > margin."""
    close = np.searchsorted(pb, pa + margin, side="right") - np.searchsorted(pb, pa - margin, side="left")
    return int(len(pa) * len(pb) - close.sum())


def estimate_ck_rw_induced(trace: SampleTrace, margin: int, diag=None) -> DegreeClustering:
    """Induced-edge estimator ignoring sample pairs closer than ``margin`` in the walk.

    With ``margin=0`` this is exactly the WIS estimator applied to the trace.
    """
    _require(trace, "RW")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    diag = {} if diag is None else diag
    revealed = trace.revealed()
    pos = _positions(trace)
    deg = {v: len(nb) for v, nb in revealed.items()}
    num: dict[int, float] = defaultdict(float)
    den: dict[int, float] = defaultdict(float)
    for a, pa in pos.items():
        k = deg[a]
        if k < 2:
            continue
        for b in revealed[a]:
            pb = pos.get(b)
            if pb is None:
                continue
            n_pairs = _far_pairs(pa, pb, margin)
            if n_pairs:
                num[k] += _sp(revealed, a, b) / deg[b] * n_pairs
                den[k] += n_pairs / deg[b]
    return _finish_ck(num, den, diag)


def estimate_ck_rw_traversed(trace: SampleTrace, diag=None) -> DegreeClustering:
    _require(trace, "RW")
    diag = {} if diag is None else diag
    revealed = trace.revealed()
    num: dict[int, float] = defaultdict(float)
    den: dict[int, float] = defaultdict(float)
    recs = trace.records
    for r0, r1 in zip(recs, recs[1:]):
        s = _sp(revealed, r0.node, r1.node)
        for k in (r0.degree, r1.degree):
            num[k] += s
            den[k] += 1
    return _finish_ck(num, den, diag)


# ---------------------------------------------------------------------------
# joint degree distribution


def harmonic_mean_degree(trace: SampleTrace) -> float:
    """Average degree debiased for degree-proportional sampling: |S| / sum 1/deg."""
    d = trace.degrees.astype(float)
    d = d[d > 0]
    if not len(d):
        raise EstimationError("trace has no node with positive degree")
    return len(d) / np.sum(1.0 / d)


def class_sizes_uniform(trace: SampleTrace, n_nodes: float) -> dict[int, float]:
    c = Counter(trace.degrees.tolist())
    total = len(trace)
    return {k: n_nodes * v / total for k, v in c.items()}


def class_sizes_weighted(trace: SampleTrace, n_nodes: float) -> dict[int, float]:
    """|V_k| = N * (sum_s 1{deg s = k}/deg s) / (sum_s 1/deg s)."""
    inv = defaultdict(float)
    for d in trace.degrees.tolist():
        if d > 0:
            inv[d] += 1.0 / d
    z = sum(inv.values())
    if z == 0:
        raise EstimationError("trace has no node with positive degree")
    return {k: n_nodes * v / z for k, v in inv.items()}


def _jdd_from_ratio(ratio: dict, vk: dict) -> JddMatrix:
    out = JddMatrix()
    for (k, l), r in ratio.items():
        if k > l or r <= 0:
            continue
        val = vk.get(k, 0.0) * vk.get(l, 0.0) * r
        if k == l:
            val /= 2.0
        if val > 0:
            out[k, l] = val
    return out


def _jdd_independent(trace: SampleTrace, vk: dict) -> JddMatrix:
    revealed = trace.revealed()
    count = Counter(r.node for r in trace.records)
    deg = {v: len(nb) for v, nb in revealed.items()}
    s_k = Counter()
    for v, c in count.items():
        s_k[deg[v]] += c
    observed: dict[tuple, float] = defaultdict(float)
    for a, ca in count.items():
        for b in revealed[a]:
            cb = count.get(b)
            if cb:
                observed[deg[a], deg[b]] += ca * cb
    ratio = {(k, l): o / (s_k[k] * s_k[l]) for (k, l), o in observed.items()}
    return _jdd_from_ratio(ratio, vk)


def estimate_jdd_uis(trace: SampleTrace, known_n: int) -> JddMatrix:
    _require(trace, "UIS")
    if not known_n or known_n <= 0:
        raise EstimationError("UIS JDD estimation needs the node count N")
    return _jdd_independent(trace, class_sizes_uniform(trace, known_n))


def estimate_jdd_wis(trace: SampleTrace, known_n: int) -> JddMatrix:
    _require(trace, "WIS")
    if not known_n or known_n <= 0:
        raise EstimationError("WIS JDD estimation needs the node count N")
    return _jdd_independent(trace, class_sizes_weighted(trace, known_n))


def _close_pair_counts(classes: np.ndarray, n_classes: int, margin: int) -> np.ndarray:
    """Ordered index pairs (i, j), |i - j| <= margin, tallied by (class_i, class_j)."""
    n = len(classes)
    out = np.zeros(n_classes * n_classes, dtype=np.int64)
    for d in range(0, min(margin, n - 1) + 1):
        a, b = classes[: n - d], classes[d:]
        out += np.bincount(a * n_classes + b, minlength=n_classes * n_classes)
        if d:
            out += np.bincount(b * n_classes + a, minlength=n_classes * n_classes)
    return out.reshape(n_classes, n_classes)


def estimate_jdd_rw_induced(trace: SampleTrace, margin: int, known_n: int) -> JddMatrix:
    """Fraction of induced edges among index pairs further apart than ``margin``,
    per degree-class pair, scaled by the debiased class sizes."""
    _require(trace, "RW")
    if not known_n or known_n <= 0:
        raise EstimationError("RW induced-edge JDD estimation needs the node count N")
    revealed = trace.revealed()
    pos = _positions(trace)
    deg = {v: len(nb) for v, nb in revealed.items()}
    observed: dict[tuple, int] = defaultdict(int)
    for a, pa in pos.items():
        for b in revealed[a]:
            pb = pos.get(b)
            if pb is not None:
                observed[deg[a], deg[b]] += _far_pairs(pa, pb, margin)
    degs = trace.degrees
    ks, classes = np.unique(degs, return_inverse=True)
    n_per = np.bincount(classes)
    close = _close_pair_counts(classes, len(ks), margin)
    idx = {int(k): i for i, k in enumerate(ks)}
    ratio = {}
    for (k, l), o in observed.items():
        if not o:
            continue
        i, j = idx[k], idx[l]
        total = int(n_per[i]) * int(n_per[j]) - int(close[i, j])
        if total > 0:
            ratio[k, l] = o / total
    return _jdd_from_ratio(ratio, class_sizes_weighted(trace, known_n))


def estimate_jdd_rw_traversed(trace: SampleTrace, known_e: float) -> JddMatrix:
    """|E| times the fraction of traversed edges joining degrees k and l."""
    _require(trace, "RW")
    if len(trace) < 2:
        raise EstimationError("traversed-edge estimator needs at least two records")
    if not known_e or known_e <= 0:
        raise EstimationError("traversed-edge JDD estimation needs |E|")
    counts = Counter()
    recs = trace.records
    for r0, r1 in zip(recs, recs[1:]):
        counts[JddMatrix.key(r0.degree, r1.degree)] += 1
    n_edges = len(recs) - 1
    return JddMatrix({kl: known_e * c / n_edges for kl, c in counts.items()})


def estimate_hybrid(trace: SampleTrace, cfg: EstimatorConfig) -> EstimateBundle:
    """Traversed edges for small degrees, induced edges for large ones.

    c(k) switches at k < kbar, JDD(k,l) at k + l < 2 kbar, where kbar is the
    configured threshold or the debiased average degree of the trace.
    """
    _require(trace, "RW")
    diag: dict = {}
    kbar = harmonic_mean_degree(trace)
    threshold = cfg.hybrid_threshold if cfg.hybrid_threshold is not None else kbar
    if not cfg.known_n:
        raise EstimationError("RW estimation needs the node count N (known_n)")
    n_edges = cfg.known_e if cfg.known_e else cfg.known_n * kbar / 2.0
    diag.update(kbar=kbar, threshold=threshold, n_edges_used=n_edges)

    ck_te = estimate_ck_rw_traversed(trace, diag.setdefault("ck_traversed", {}))
    ck_ie = estimate_ck_rw_induced(trace, cfg.margin, diag.setdefault("ck_induced", {}))
    jdd_te = estimate_jdd_rw_traversed(trace, n_edges)
    jdd_ie = estimate_jdd_rw_induced(trace, cfg.margin, cfg.known_n)

    if cfg.rw_estimator == "traversed":
        ck, jdd = ck_te, jdd_te
    elif cfg.rw_estimator == "induced":
        ck, jdd = ck_ie, jdd_ie
    else:
        ck = {}
        fallbacks = 0
        for k in sorted(set(ck_te) | set(ck_ie)):
            first, second = (ck_te, ck_ie) if k < threshold else (ck_ie, ck_te)
            if k in first:
                ck[k] = first[k]
            else:
                ck[k] = second[k]
                fallbacks += 1
        jdd = JddMatrix()
        for kl in set(jdd_te) | set(jdd_ie):
            first, second = (jdd_te, jdd_ie) if sum(kl) < 2 * threshold else (jdd_ie, jdd_te)
            if kl in first:
                jdd[kl] = first[kl]
            else:
                jdd[kl] = second[kl]
                fallbacks += 1
        diag["fallbacks"] = fallbacks
        if fallbacks:
            log.info("hybrid estimator: %d entries taken from the other base estimator", fallbacks)
    vk = class_sizes_weighted(trace, cfg.known_n)
    diag["support"] = dict(Counter(trace.degrees.tolist()))
    diag["clamped"] = diag["ck_traversed"].get("clamped", 0) + diag["ck_induced"].get("clamped", 0)
    return EstimateBundle(jdd=jdd, ck=ck, vk=vk, diagnostics=diag)


def estimate(trace: SampleTrace, cfg: EstimatorConfig | None = None) -> EstimateBundle:
    """Dispatch to the right estimator family for ``trace.method``."""
    cfg = cfg or EstimatorConfig()
    if trace.method == "RW":
        return estimate_hybrid(trace, cfg)
    if not cfg.known_n:
        raise EstimationError(f"{trace.method} estimation needs the node count N (known_n)")
    diag: dict = {"support": dict(Counter(trace.degrees.tolist()))}
    if trace.method == "UIS":
        ck = _ck_independent(trace, weighted=False, diag=diag)
        vk = class_sizes_uniform(trace, cfg.known_n)
        jdd = estimate_jdd_uis(trace, cfg.known_n)
    else:
        ck = _ck_independent(trace, weighted=True, diag=diag)
        vk = class_sizes_weighted(trace, cfg.known_n)
        jdd = estimate_jdd_wis(trace, cfg.known_n)
    return EstimateBundle(jdd=jdd, ck=ck, vk=vk, diagnostics=diag)


def write_bundle(bundle: EstimateBundle, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_jdd(bundle.jdd, d / "jdd.txt")
    write_ck(bundle.ck, d / "ck.txt")
    with open(d / "vk.txt", "w", encoding="utf-8") as fh:
        for k, v in sorted(bundle.vk.items()):
            fh.write(f"{k} {float(v)!r}\n")
    (d / "diagnostics.json").write_text(json.dumps(bundle.diagnostics, indent=1, sort_keys=True,
                                                   default=str))


def read_bundle(directory) -> EstimateBundle:
    d = Path(directory)
    for name in ("jdd.txt", "ck.txt"):
        if not (d / name).exists():
            raise FileNotFoundError(f"estimate bundle {d} is missing {name}")
    vk = {}
    if (d / "vk.txt").exists():
        vk = {int(k): float(v) for k, v in (line.split() for line in
                                            (d / "vk.txt").read_text().splitlines() if line.strip())}
    diag = json.loads((d / "diagnostics.json").read_text()) if (d / "diagnostics.json").exists() else {}
    return EstimateBundle(jdd=read_jdd(d / "jdd.txt"), ck=read_ck(d / "ck.txt"), vk=vk, diagnostics=diag)

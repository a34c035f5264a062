"""Side-by-side scoring of a generated graph against a reference graph."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..graph import Graph, degree_clustering, exact_jdd
from .distributions import (avg_neighbor_degree, closeness_centrality, degree_distribution,
                            edgewise_shared_partners, nmae, shortest_path_counts)
from .structure import MetricSkipped, MetricTimeout, cycle_basis_distribution, maximal_cliques, spectrum_top

log = logging.getLogger(__name__)

# column order of the report table
METRICS = ("DD", "Knn", "JDD", "CC", "ESP", "ShP", "Cliq", "Cycl", "Spect", "Clo")
N_BINS = 30


@dataclass
class Budgets:
    path_sources: int | None = None     # None: exact up to 5000 nodes, 1000 sampled sources above
    clique_timeout: float | None = 60.0
    cycle_candidates: int = 200_000
    spectrum_count: int = 20
    seed: int = 0
    workers: int = 1


@dataclass
class ComparisonReport:
    nmae: dict = field(default_factory=dict)          # metric -> value, or None when unavailable
    raw: dict = field(default_factory=dict)           # metric -> (reference, generated)
    binned: dict = field(default_factory=dict)        # metric -> (edges, reference counts, generated counts)
    runtime: dict = field(default_factory=dict)       # metric -> seconds for both graphs
    status: dict = field(default_factory=dict)        # metric -> "ok" | "timeout" | "skipped" | "error: ..."

    def table(self) -> str:
        head = " ".join(f"{m:>7}" for m in METRICS)
        vals = " ".join(f"{self.nmae[m]:7.3f}" if self.nmae.get(m) is not None else f"{'-':>7}"
                        for m in METRICS)
        return f"{head}\n{vals}"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "nmae", "status", "seconds"])
            for m in METRICS:
                v = self.nmae.get(m)
                w.writerow([m, "" if v is None else f"{v:.6g}", self.status.get(m, ""),
                            f"{self.runtime.get(m, 0.0):.3f}"])

    def write_binned(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for m, (edges, ref, gen) in self.binned.items():
            with open(d / f"{m}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["bin_lo", "bin_hi", "reference", "generated"])
                for i in range(len(ref)):
                    w.writerow([f"{edges[i]:.6g}", f"{edges[i + 1]:.6g}", f"{ref[i]:.6g}", f"{gen[i]:.6g}"])


def bin_pair(a: dict, b: dict, n_bins: int = N_BINS):
    """Put two keyed distributions on the same equal-width bins over their joint support."""
    keys = [k for k in set(a) | set(b)]
    if not keys:
        return np.zeros(n_bins + 1), np.zeros(n_bins), np.zeros(n_bins)
    lo, hi = float(min(keys)), float(max(keys))
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, n_bins + 1)

    def hist(d):
        if not d:
            return np.zeros(n_bins)
        ks = np.fromiter(d.keys(), float, len(d))
        vs = np.fromiter(d.values(), float, len(d))
        return np.histogram(ks, bins=edges, weights=vs)[0]
    return edges, hist(a), hist(b)


def _closeness_hist(ref: np.ndarray, gen: np.ndarray, n_bins: int = N_BINS):
    both = np.concatenate([ref, gen])
    lo, hi = (float(both.min()), float(both.max())) if len(both) else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1e-9
    edges = np.linspace(lo, hi, n_bins + 1)
    r = np.histogram(ref, bins=edges)[0] / max(len(ref), 1)
    g = np.histogram(gen, bins=edges)[0] / max(len(gen), 1)
    return edges, r, g


def _compute(metric: str, g: Graph, b: Budgets):
    if metric == "DD":
        return degree_distribution(g)
    if metric == "Knn":
        return avg_neighbor_degree(g)
    if metric == "JDD":
        return dict(exact_jdd(g).items())
    if metric == "CC":
        return degree_clustering(g)
    if metric == "ESP":
        return edgewise_shared_partners(g)
    if metric == "ShP":
        counts = shortest_path_counts(g, b.path_sources, b.seed)
        total = sum(counts.values())
        return {h: c / total for h, c in counts.items()}
    if metric == "Cliq":
        return maximal_cliques(g, b.clique_timeout)
    if metric == "Cycl":
        return cycle_basis_distribution(g, b.cycle_candidates)
    if metric == "Spect":
        return spectrum_top(g, b.spectrum_count)
    if metric == "Clo":
        return closeness_centrality(g, b.path_sources, b.seed)
    raise ValueError(metric)


def _timed(args):
    metric, g, b = args
    t0 = time.perf_counter()
    try:
        return "ok", _compute(metric, g, b), time.perf_counter() - t0
    except MetricTimeout as exc:
        return "timeout", exc.partial, time.perf_counter() - t0
    except MetricSkipped as exc:
        return "skipped", str(exc), time.perf_counter() - t0
    except Exception as exc:  # one failing metric must not sink the report
        log.exception("metric %s failed", metric)
        return f"error: {exc}", None, time.perf_counter() - t0


def compare(g_ref: Graph, g_gen: Graph, budgets: Budgets | None = None,
            metrics=METRICS) -> ComparisonReport:
    b = budgets or Budgets()
    jobs = [(m, g, b) for m in metrics for g in (g_ref, g_gen)]
    if b.workers > 1:
        with ProcessPoolExecutor(max_workers=b.workers) as ex:
            results = list(ex.map(_timed, jobs))
    else:
        results = [_timed(j) for j in jobs]
    rep = ComparisonReport()
    for i, m in enumerate(metrics):
        (s1, ref, t1), (s2, gen, t2) = results[2 * i], results[2 * i + 1]
        rep.runtime[m] = t1 + t2
        status = s1 if s1 != "ok" else s2
        rep.status[m] = status
        if status != "ok":
            rep.nmae[m] = None
            continue
        rep.raw[m] = (ref, gen)
        try:
            if m == "Clo":
                edges, r, g = _closeness_hist(ref, gen)
                rep.binned[m] = (edges, r, g)
                rep.nmae[m] = nmae(g, r)
                continue
            rep.nmae[m] = nmae(gen, ref)
            if m == "Spect":
                edges = np.arange(len(ref) + 1, dtype=float)
                rep.binned[m] = (edges, np.asarray(ref), np.asarray(gen)[:len(ref)])
            elif m != "JDD":
                rep.binned[m] = bin_pair(ref, gen)
        except ValueError as exc:  # e.g. zero reference mass
            rep.nmae[m] = None
            rep.status[m] = f"error: {exc}"
    return rep

"""Property-based checks of the invariants that hold for every input."""
import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from dk25.estimation import (estimate_ck_rw_induced, estimate_ck_uis, estimate_ck_wis, estimate_hybrid,
                             estimate_jdd_uis, EstimatorConfig)
from dk25.generation import McmcConfig, construct_2k_baseline, construct_2kt, mcmc_target_ck
from dk25.graph import (Graph, JddMatrix, degree_class_sizes, degree_clustering, exact_jdd, mean_clustering,
                        node_clustering, shared_partners)
from dk25.metrics import edgewise_shared_partners, shortest_path_counts, spectrum_top
from dk25.postprocess import (RepairError, TargetSpec, repair_realizability, smooth_jdd,
                              verify_realizability)
from dk25.sampling import SampleTrace, sample_rw, sample_uis

SETTINGS = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def graphs(draw, min_nodes=1, max_nodes=12):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return Graph(n, chosen)


def connected(g: Graph) -> bool:
    return g.n_nodes > 0 and nx.is_connected(g.to_networkx())


# -- graph core ------------------------------------------------------------


@SETTINGS
@given(graphs())
def test_class_weighted_clustering_sums_to_total(g):
    sizes = degree_class_sizes(g)
    ck = degree_clustering(g)
    total = sum(sizes[k] * c for k, c in ck.items())
    assert total == pytest.approx(g.n_nodes * mean_clustering(g), abs=1e-9)


@SETTINGS
@given(graphs())
def test_jdd_mass_is_edge_count(g):
    assert exact_jdd(g).total() == g.n_edges


@SETTINGS
@given(graphs(max_nodes=50))
def test_node_clustering_brute_force(g):
    adj = [set(g.neighbors(v).tolist()) for v in range(g.n_nodes)]
    for v in range(g.n_nodes):
        d = len(adj[v])
        if d < 2:
            continue
        links = sum(1 for a, b in itertools.combinations(sorted(adj[v]), 2) if b in adj[a])
        assert node_clustering(g, v) == pytest.approx(links / (d * (d - 1) / 2))


@SETTINGS
@given(graphs(min_nodes=2), st.data())
def test_shared_partners_symmetric(g, data):
    a = data.draw(st.integers(0, g.n_nodes - 1))
    b = data.draw(st.integers(0, g.n_nodes - 1).filter(lambda x: x != a))
    assert shared_partners(g, a, b) == shared_partners(g, b, a)


# -- sampling --------------------------------------------------------------


@SETTINGS
@given(graphs(min_nodes=2), st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_rw_steps_follow_edges_and_replay(g, n, seed):
    if g.n_edges == 0:
        return
    start = int(np.flatnonzero(g.degrees)[0])
    tr = sample_rw(g, n, seed, start=start)
    assert len(tr) == n
    for a, b in zip(tr.records, tr.records[1:]):
        assert b.node in a.neighbors
    assert sample_rw(g, n, seed, start=start).records == tr.records


@pytest.mark.parametrize("seed", [0, 1])
def test_rw_visits_match_stationary_distribution(seed):
    g = Graph.from_networkx(nx.powerlaw_cluster_graph(60, 2, 0.3, seed=seed))
    tr = sample_rw(g, 100_000, seed=seed)
    obs = np.bincount(tr.nodes, minlength=g.n_nodes)
    # successive steps are dependent, so thin the walk before a chi-square test
    thin = np.bincount(tr.nodes[::10], minlength=g.n_nodes)
    exp = g.degrees / g.degrees.sum()
    assert chisquare(thin, exp * thin.sum()).pvalue > 0.001
    assert np.abs(obs / obs.sum() - exp).max() < 0.01


# -- estimation ------------------------------------------------------------


@SETTINGS
@given(graphs(max_nodes=30), st.integers(0, 1000))
def test_uis_full_coverage_is_exact(g, seed):
    if g.n_edges == 0:
        return
    tr = sample_uis(g, g.n_nodes, seed, replace=False)
    assert estimate_ck_uis(tr) == pytest.approx(degree_clustering(g))
    assert dict(estimate_jdd_uis(tr, g.n_nodes).items()) == pytest.approx(dict(exact_jdd(g).items()))


@SETTINGS
@given(graphs(min_nodes=3, max_nodes=20), st.integers(5, 200), st.integers(0, 1000))
def test_zero_margin_reduces_to_wis(g, n, seed):
    if not connected(g) or g.n_edges < 2:
        return
    tr = sample_rw(g, n, seed)
    as_wis = SampleTrace("WIS", tr.records, tr.seed)
    assert estimate_ck_rw_induced(tr, 0) == pytest.approx(estimate_ck_wis(as_wis))


@SETTINGS
@given(graphs(min_nodes=3, max_nodes=20), st.integers(5, 200), st.integers(0, 1000))
def test_estimated_clustering_in_unit_interval(g, n, seed):
    if not connected(g) or g.n_edges < 2:
        return
    b = estimate_hybrid(sample_rw(g, n, seed), EstimatorConfig(known_n=g.n_nodes, margin=3))
    assert all(0.0 <= v <= 1.0 for v in b.ck.values())


# -- postprocess -----------------------------------------------------------


@SETTINGS
@given(graphs(min_nodes=2, max_nodes=15), st.integers(0, 100))
def test_repair_is_idempotent_on_graph_jdds(g, seed):
    if g.n_edges == 0:
        return
    jdd = exact_jdd(g)
    spec = repair_realizability(jdd, seed=seed)
    assert spec.edges_changed == 0
    assert dict(spec.jdd.items()) == dict(jdd.items())


@SETTINGS
@given(st.dictionaries(st.tuples(st.integers(1, 8), st.integers(1, 8)).map(lambda t: tuple(sorted(t))),
                       st.integers(1, 30), min_size=1, max_size=10),
       st.integers(0, 100))
def test_repair_is_valid_or_raises(entries, seed):
    try:
        spec = repair_realizability(JddMatrix(entries), seed=seed)
    except RepairError:
        return
    assert verify_realizability(spec.jdd).ok


@SETTINGS
@given(st.dictionaries(st.tuples(st.integers(1, 40), st.integers(1, 40)).map(lambda t: tuple(sorted(t))),
                       st.floats(0.1, 50), min_size=1, max_size=40))
def test_smoothing_preserves_mass_and_symmetry(entries):
    m = JddMatrix(entries)
    s = smooth_jdd(m)
    assert s.total() == pytest.approx(m.total(), rel=1e-9)
    assert all(k <= l for (k, l), _ in s.items())
    assert all(v >= 0 for _, v in s.items())


# -- generation ------------------------------------------------------------


def simple(g: Graph) -> bool:
    e = g.edges()
    return bool(np.all(e[:, 0] != e[:, 1])) and len({tuple(x) for x in e.tolist()}) == len(e)


@SETTINGS
@given(graphs(min_nodes=2, max_nodes=25), st.integers(0, 1000))
def test_constructions_hit_target_jdd(g, seed):
    if g.n_edges == 0:
        return
    spec = TargetSpec.from_graph(g)
    for build in (construct_2kt, construct_2k_baseline):
        out = build(spec, seed)
        assert simple(out)
        assert dict(exact_jdd(out).items()) == dict(exact_jdd(g).items())


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(graphs(min_nodes=6, max_nodes=25), st.integers(0, 1000), st.sampled_from(["plain", "improved"]))
def test_mcmc_keeps_jdd_and_never_worsens(g, seed, variant):
    ck = degree_clustering(g)
    if g.n_edges < 4 or not any(ck.values()):
        return
    start = construct_2k_baseline(TargetSpec.from_graph(g), seed)
    cfg = McmcConfig(variant=variant, seed=seed, max_swaps=2000, progress_interval=50, debug_check=True)
    res = mcmc_target_ck(start, ck, cfg)
    assert simple(res.graph)
    assert dict(exact_jdd(res.graph).items()) == dict(exact_jdd(g).items())
    errs = [row[2] for row in res.trace]
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


# -- metrics ---------------------------------------------------------------


@SETTINGS
@given(graphs(min_nodes=2))
def test_metric_masses(g):
    assert sum(edgewise_shared_partners(g).values()) == g.n_edges
    if g.n_edges == 0:
        return
    comp = max(nx.connected_components(g.to_networkx()), key=len)
    assert sum(shortest_path_counts(g).values()) == len(comp) * (len(comp) - 1)


@SETTINGS
@given(graphs(min_nodes=2))
def test_spectrum_sorted_and_bounded(g):
    if g.n_edges == 0:
        return
    top = spectrum_top(g, 5)
    mags = np.abs(top)
    assert np.all(np.diff(mags) <= 1e-9)
    assert top[0] >= 2 * g.n_edges / g.n_nodes - 1e-9

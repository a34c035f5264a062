import itertools

import networkx as nx
import numpy as np
import pytest

from dk25.graph import Graph
from dk25.metrics import (METRICS, Budgets, MetricTimeout, avg_neighbor_degree, bin_pair, closeness_centrality,
                          compare, cycle_basis_distribution, degree_distribution, edgewise_shared_partners,
                          maximal_cliques, nmae, shortest_path_counts, shortest_path_distribution, spectrum_top)

from conftest import atlas, cycle, from_edges, k4_minus_edge, k_n, path, star


def test_nmae_examples():
    assert nmae({1: 3, 2: 5}, {1: 3, 2: 5}) == 0
    assert nmae({1: 6, 2: 10}, {1: 3, 2: 5}) == pytest.approx(1.0)
    assert nmae({1: 1, 2: 0}, {1: 0, 2: 1}) == pytest.approx(2.0)
    # missing keys on either side count as zero
    assert nmae({3: 1}, {1: 1}) == pytest.approx(2.0)
    assert nmae([1.0, 2.0], [1.0, 2.0, 1.0]) == pytest.approx(0.25)


def test_nmae_zero_reference_raises():
    with pytest.raises(ValueError):
        nmae({1: 1}, {1: 0})
    assert nmae({2: 0.0}, {2: 0.0}) == 0


def test_degree_distribution_and_knn():
    assert degree_distribution(star(4)) == {1: 4, 4: 1}
    assert avg_neighbor_degree(star(4)) == {1: 4.0, 4: 1.0}
    assert degree_distribution(k_n(3)) == {2: 3}
    assert avg_neighbor_degree(k_n(3)) == {2: 2.0}


def test_knn_matches_networkx_on_atlas():
    for g in atlas(7, 2):
        if not g.n_edges:
            continue
        ref = nx.average_degree_connectivity(g.to_networkx())
        ours = avg_neighbor_degree(g)
        assert set(ours) == {k for k in ref if k > 0}
        for k, v in ours.items():
            assert v == pytest.approx(ref[k])


def test_esp_examples():
    assert edgewise_shared_partners(k_n(3)) == {1: 3}
    tree = Graph.from_networkx(nx.random_labeled_tree(12, seed=0))
    assert edgewise_shared_partners(tree) == {0: 11}
    assert edgewise_shared_partners(k_n(4)) == {2: 6}


def test_esp_brute_force_on_atlas():
    for g in atlas(6, 2):
        G = g.to_networkx()
        want = {}
        for u, v in G.edges():
            s = len(set(G[u]) & set(G[v]))
            want[s] = want.get(s, 0) + 1
        assert edgewise_shared_partners(g) == want


def test_shortest_paths_examples():
    assert shortest_path_distribution(path(3)) == pytest.approx({1: 2 / 3, 2: 1 / 3})
    # counts are over ordered pairs, which is what source sampling evaluates
    assert shortest_path_counts(k_n(4)) == {1: 12}
    assert shortest_path_counts(cycle(6)) == {1: 12, 2: 12, 3: 6}


def test_shortest_paths_brute_force_on_atlas():
    for g in atlas(7, 2):
        G = g.to_networkx()
        if not nx.is_connected(G):
            continue
        want = {}
        for u, d in nx.all_pairs_shortest_path_length(G):
            for v, h in d.items():
                if u != v:
                    want[h] = want.get(h, 0) + 1
        assert shortest_path_counts(g) == want


def test_shortest_paths_use_largest_component():
    g = from_edges(7, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6)])
    assert shortest_path_counts(g) == {1: 6, 2: 4, 3: 2}


def test_source_sampling_is_an_estimate_of_shape():
    g = Graph.from_networkx(nx.powerlaw_cluster_graph(400, 3, 0.3, seed=0))
    full = shortest_path_distribution(g)
    approx = shortest_path_distribution(g, source_budget=100, seed=1)
    assert nmae(approx, full) < 0.1


def test_closeness():
    c = closeness_centrality(star(3))
    assert sorted(c.tolist()) == pytest.approx([0.6, 0.6, 0.6, 1.0])
    G = nx.les_miserables_graph()
    g = Graph.from_networkx(nx.convert_node_labels_to_integers(G))
    ref = np.sort(list(nx.closeness_centrality(nx.convert_node_labels_to_integers(G)).values()))
    assert np.sort(closeness_centrality(g)) == pytest.approx(ref)


def test_cliques_examples():
    assert maximal_cliques(k_n(4)) == {4: 1}
    assert maximal_cliques(cycle(4)) == {2: 4}
    assert maximal_cliques(k4_minus_edge()) == {3: 2}


def _brute_cliques(G):
    nodes = list(G)
    cliques = [frozenset(c) for r in range(1, len(nodes) + 1) for c in itertools.combinations(nodes, r)
               if all(G.has_edge(a, b) for a, b in itertools.combinations(c, 2))]
    maximal = [c for c in cliques if not any(c < d for d in cliques)]
    out = {}
    for c in maximal:
        if len(c) >= 2:
            out[len(c)] = out.get(len(c), 0) + 1
    return out


def test_cliques_brute_force_on_atlas():
    for g in atlas(6, 2):
        assert maximal_cliques(g) == _brute_cliques(g.to_networkx())


def test_clique_timeout_keeps_partial_counts():
    g = Graph.from_networkx(nx.gnp_random_graph(300, 0.5, seed=0))
    with pytest.raises(MetricTimeout) as info:
        maximal_cliques(g, timeout=1e-4)
    assert isinstance(info.value.partial, dict)


def test_cycle_basis_examples():
    assert cycle_basis_distribution(cycle(4)) == {4: 1}
    assert cycle_basis_distribution(k_n(4)) == {3: 3}
    assert cycle_basis_distribution(Graph.from_networkx(nx.random_labeled_tree(15, seed=1))) == {}


def test_cycle_basis_size_and_minimality_on_atlas():
    for g in atlas(7, 3):
        G = g.to_networkx()
        G.remove_nodes_from([v for v in list(G) if G.degree(v) == 0])
        want = G.number_of_edges() - G.number_of_nodes() + nx.number_connected_components(G)
        got = cycle_basis_distribution(g)
        assert sum(got.values()) == want
        if want:
            # total length of a minimum basis matches networkx's own minimum basis
            mcb = nx.minimum_cycle_basis(G)
            assert sum(k * c for k, c in got.items()) == sum(len(c) for c in mcb)


def test_spectrum_examples():
    for n in (3, 5, 8):
        assert spectrum_top(k_n(n), 1)[0] == pytest.approx(n - 1)
    top = spectrum_top(star(5), 2)
    assert sorted(np.abs(top).tolist())[-1] == pytest.approx(np.sqrt(5))
    g = Graph.from_networkx(nx.random_regular_graph(4, 30, seed=0))
    assert spectrum_top(g, 1)[0] == pytest.approx(4)


def test_spectrum_large_graph_uses_sparse_path():
    G = nx.powerlaw_cluster_graph(1200, 3, 0.3, seed=0)
    g = Graph.from_networkx(G)
    ref = np.sort(np.abs(np.linalg.eigvalsh(nx.to_numpy_array(G))))[::-1][:5]
    assert np.sort(np.abs(spectrum_top(g, 5)))[::-1] == pytest.approx(ref, abs=1e-4)


def test_bin_pair_shares_edges():
    edges, a, b = bin_pair({1: 1, 10: 2}, {5: 4}, n_bins=3)
    assert edges[0] == 1 and edges[-1] == 10
    assert a.sum() == 3 and b.sum() == 4


def test_compare_self_is_zero():
    g = Graph.from_networkx(nx.convert_node_labels_to_integers(nx.les_miserables_graph()))
    rep = compare(g, g)
    assert set(rep.nmae) == set(METRICS)
    for m in METRICS:
        assert rep.nmae[m] == pytest.approx(0, abs=1e-9), m
    assert "Cycl" in rep.table()


def test_compare_reports_timeouts_and_writes_files(tmp_path):
    a = Graph.from_networkx(nx.gnp_random_graph(200, 0.4, seed=0))
    b = Graph.from_networkx(nx.gnp_random_graph(200, 0.4, seed=1))
    rep = compare(a, b, Budgets(clique_timeout=1e-4), metrics=("DD", "Cliq"))
    assert rep.status["Cliq"] == "timeout" and rep.nmae["Cliq"] is None
    assert rep.nmae["DD"] > 0
    rep.write_csv(tmp_path / "r.csv")
    rep.write_binned(tmp_path / "bins")
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "metric,nmae,status,seconds"
    assert (tmp_path / "bins" / "DD.csv").exists()

import math

import networkx as nx
import numpy as np
import pytest

from dk25.graph import (Graph, GraphInputError, JddMatrix, UndefinedClusteringError, degree_class_sizes,
                        degree_clustering, edge_shared_partners, exact_jdd, mean_clustering, node_clustering,
                        node_triangles, read_ck, read_edge_list, read_jdd, shared_partners, triangle_count_total,
                        write_ck, write_edge_list, write_jdd)

from conftest import atlas, cycle, k4_minus_edge, k_n, path, star


def test_shared_partners_small():
    assert shared_partners(k_n(3), 0, 1) == 1
    assert shared_partners(star(4), 1, 2) == 1
    p = path(3)
    assert shared_partners(p, 0, 2) == 1
    assert shared_partners(p, 0, 1) == 0


def test_node_clustering_small():
    assert node_clustering(k_n(3), 0) == 1.0
    assert node_clustering(star(4), 0) == 0.0
    assert node_clustering(k4_minus_edge(), 0) == pytest.approx(2 / 3)
    with pytest.raises(UndefinedClusteringError):
        node_clustering(path(3), 0)


def test_degree_clustering_small():
    assert degree_clustering(k_n(3)) == {2: 1.0}
    dc = degree_clustering(k4_minus_edge())
    assert dc.keys() == {2, 3}
    assert dc[2] == 1.0 and dc[3] == pytest.approx(2 / 3)
    # degree-1 nodes never appear as keys
    assert 1 not in degree_clustering(star(4))


def test_mean_clustering_small():
    assert mean_clustering(k_n(3)) == 1.0
    assert mean_clustering(cycle(4)) == 0.0


def test_exact_jdd_small():
    assert dict(exact_jdd(k_n(3)).items()) == {(2, 2): 3}
    assert dict(exact_jdd(star(3)).items()) == {(1, 3): 3}
    assert dict(exact_jdd(path(4)).items()) == {(1, 2): 2, (2, 2): 1}


def test_triangle_count_total():
    assert triangle_count_total(k_n(3)) == 3
    assert triangle_count_total(k_n(4)) == 12


@pytest.mark.parametrize("g", atlas(7, 3)[::7], ids=lambda g: f"n{g.n_nodes}m{g.n_edges}")
def test_clustering_matches_networkx(g):
    G = g.to_networkx()
    tri = nx.triangles(G)
    assert node_triangles(g).tolist() == [tri[v] for v in range(g.n_nodes)]
    cl = nx.clustering(G)
    for v in range(g.n_nodes):
        if g.degree(v) >= 2:
            assert node_clustering(g, v) == pytest.approx(cl[v], abs=1e-12)
    assert mean_clustering(g) == pytest.approx(nx.average_clustering(G), abs=1e-12)


def test_jdd_mass_and_degree_counts():
    G = nx.powerlaw_cluster_graph(300, 3, 0.3, seed=4)
    g = Graph.from_networkx(G)
    jdd = exact_jdd(g)
    assert jdd.total() == g.n_edges
    assert {k: int(v) for k, v in jdd.degree_counts().items()} == degree_class_sizes(g)


def test_edge_shared_partners_order_matches_edges():
    g = k4_minus_edge()
    sp = edge_shared_partners(g)
    for (u, v), s in zip(g.edges().tolist(), sp.tolist()):
        assert s == shared_partners(g, u, v)


def test_graph_drops_loops_and_duplicates():
    g = Graph(3, [(0, 1), (1, 0), (1, 1), (1, 2)])
    assert g.n_edges == 2
    assert g.neighbors(1).tolist() == [0, 2]


def test_graph_rejects_bad_endpoint():
    with pytest.raises(GraphInputError):
        Graph(2, [(0, 5)])


def test_edge_list_roundtrip(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# comment\n0 1\n1 2\n2 0\n1 1\n0 1\n", encoding="utf-8")
    g = read_edge_list(p)
    assert g.n_edges == 3
    write_edge_list(g, tmp_path / "h.txt")
    h = read_edge_list(tmp_path / "h.txt")
    assert h.edges().tolist() == g.edges().tolist()


def test_edge_list_rejects_garbage(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 1\nzero one\n", encoding="utf-8")
    with pytest.raises(GraphInputError):
        read_edge_list(p)


def test_jdd_and_ck_files_roundtrip(tmp_path):
    jdd = JddMatrix()
    jdd[2, 3] = 4
    jdd[3, 3] = 1.5
    write_jdd(jdd, tmp_path / "j.txt")
    back = read_jdd(tmp_path / "j.txt")
    assert dict(back.items()) == dict(jdd.items())
    ck = {2: 0.25, 5: 1.0}
    write_ck(ck, tmp_path / "c.txt")
    assert read_ck(tmp_path / "c.txt") == ck


def test_jdd_symmetric_keys():
    jdd = JddMatrix()
    jdd[5, 2] = 3
    assert jdd[2, 5] == 3
    assert dict(jdd.items()) == {(2, 5): 3}


def test_degree_counts_diagonal_convention():
    # K4: six (3,3) edges stored once each, so D(3) = 2*6/3 = 4
    assert exact_jdd(k_n(4)).degree_counts() == {3: 4}
    assert math.isclose(sum(exact_jdd(cycle(5)).degree_counts().values()), 5)


def test_adjacency_matrix_symmetric():
    g = k4_minus_edge()
    A = g.adjacency_matrix().toarray()
    assert np.array_equal(A, A.T)
    assert A.sum() == 2 * g.n_edges

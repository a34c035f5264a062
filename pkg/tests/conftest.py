import logging

import networkx as nx
import pytest

from dk25.graph import Graph


def from_edges(n, edges):
    return Graph(n, edges)


def k_n(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star(leaves):
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def k4_minus_edge():
    # nodes 0 and 1 keep degree 3, nodes 2 and 3 lose the (2,3) edge
    return Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])


def atlas(max_nodes=7, min_nodes=1):
    """Every graph on min_nodes..max_nodes nodes (networkx graph atlas), as Graph objects."""
    out = []
    for G in nx.graph_atlas_g():
        if min_nodes <= G.number_of_nodes() <= max_nodes:
            out.append(Graph.from_networkx(G))
    return out


@pytest.fixture(autouse=True)
def _quiet_logs():
    logging.getLogger("dk25").setLevel(logging.ERROR)
    yield


# acceptance results, printed once at the end of the session
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def record(criterion: int, status: str, detail: str) -> None:
    ACCEPTANCE[criterion] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")

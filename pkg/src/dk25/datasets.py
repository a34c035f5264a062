"""Test graphs: small real networks shipped with networkx, seeded synthetic clustered graphs,
and optional SNAP edge lists read from ``$DK25_DATA_DIR``."""
from __future__ import annotations

import os
from pathlib import Path

import networkx as nx

from .graph import Graph, GraphInputError, largest_component, read_edge_list

DATA_ENV = "DK25_DATA_DIR"

# file names probed under $DK25_DATA_DIR for the larger networks
SNAP_FILES = {
    "caida": ("as-caida20071105.txt", "as-caida.txt", "caida.txt"),
    "epinions": ("soc-Epinions1.txt", "epinions.txt"),
    "enron": ("Email-Enron.txt", "email-Enron.txt", "enron.txt"),
    "new_orleans": ("facebook-links.txt", "new_orleans.txt"),
}


def _from_nx(G) -> Graph:
    g, _ = largest_component(Graph.from_networkx(nx.convert_node_labels_to_integers(G)))
    return g


def clustered_synthetic(n: int, m: int = 4, p: float = 0.5, seed: int = 0) -> Graph:
    """Holme-Kim power-law graph with tunable clustering (triad formation probability ``p``)."""
    return _from_nx(nx.powerlaw_cluster_graph(n, m, p, seed=seed))


SMALL = {
    "karate": lambda: _from_nx(nx.karate_club_graph()),
    "les_miserables": lambda: _from_nx(nx.les_miserables_graph()),
    "florentine": lambda: _from_nx(nx.florentine_families_graph()),
    "davis": lambda: _from_nx(nx.davis_southern_women_graph()),
}

SYNTHETIC = {
    "plc1000": lambda: clustered_synthetic(1000, seed=1),
    "plc2000": lambda: clustered_synthetic(2000, seed=2),
    "plc5000": lambda: clustered_synthetic(5000, seed=5),
}


def corpus(include_large: bool = True) -> dict[str, Graph]:
    """Every built-in graph, keyed by name. ``include_large=False`` keeps graphs under 1000 nodes."""
    out = {name: f() for name, f in SMALL.items()}
    if include_large:
        out.update({name: f() for name, f in SYNTHETIC.items()})
    return out


def data_dir() -> Path | None:
    d = os.environ.get(DATA_ENV)
    return Path(d) if d else None


def find_snap(name: str) -> Path | None:
    d = data_dir()
    if d is None:
        return None
    for fname in SNAP_FILES.get(name, (name,)):
        p = d / fname
        if p.exists():
            return p
    return None


def load_snap(name: str) -> Graph:
    """Largest connected component of a SNAP edge list found under ``$DK25_DATA_DIR``."""
    p = find_snap(name)
    if p is None:
        raise GraphInputError(f"dataset {name!r} not found; set {DATA_ENV} to a directory holding "
                              f"one of {SNAP_FILES.get(name, (name,))}")
    return read_edge_list(p, connected_only=True)

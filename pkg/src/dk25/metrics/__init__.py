from .compare import METRICS, Budgets, ComparisonReport, bin_pair, compare
from .distributions import (avg_neighbor_degree, closeness_centrality, degree_distribution,
                            edgewise_shared_partners, nmae, shortest_path_counts, shortest_path_distribution)
from .structure import (MetricSkipped, MetricTimeout, cycle_basis_distribution, maximal_cliques,
                        spectrum_top)

__all__ = [
    "METRICS", "Budgets", "ComparisonReport", "bin_pair", "compare", "avg_neighbor_degree",
    "closeness_centrality", "degree_distribution", "edgewise_shared_partners", "nmae",
    "shortest_path_counts", "shortest_path_distribution", "MetricSkipped", "MetricTimeout",
    "cycle_basis_distribution", "maximal_cliques", "spectrum_top",
]
